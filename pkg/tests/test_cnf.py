import io
import random
from math import comb

import pytest

from permdd.cnf import (CnfFormula, count_models, encode_permanent, enumerate_models,
                        parse_dimacs, to_dimacs, write_dimacs)
from permdd.errors import ParseError
from permdd.matrix import Matrix01
from permdd.permanent import perm_brute_force

from _util import random_matrix


def matchings(m: Matrix01):
    """All perfect matchings as frozensets of (row, col) edges, by backtracking."""
    out = []

    def go(i, used, acc):
        if i > m.n:
            out.append(frozenset(acc))
            return
        for j in m.row_support(i):
            if j not in used:
                go(i + 1, used | {j}, acc + [(i, j)])

    go(1, frozenset(), [])
    return out


class TestEncode:
    def test_identity_2(self):
        f = encode_permanent(Matrix01.identity(2))
        assert f.num_vars == 2
        assert f.clauses == [[1], [2], [1], [2]]
        assert list(enumerate_models(f)) == [frozenset({1, 2})]

    def test_ones_2(self):
        f = encode_permanent(Matrix01.ones(2))
        assert f.num_vars == 4
        alo = [c for c in f.clauses if all(l > 0 for l in c)]
        amo = [c for c in f.clauses if all(l < 0 for l in c)]
        assert len(alo) == 4 and all(len(c) == 2 for c in alo)
        assert len(amo) == 4 and all(len(c) == 2 for c in amo)
        # enumerate all 16 assignments
        assert len(list(enumerate_models(f))) == 2 == perm_brute_force(Matrix01.ones(2)).value

    def test_var_map_row_major(self):
        m = Matrix01.from_rows([[0, 1, 1], [1, 0, 0], [0, 1, 0]])
        f = encode_permanent(m)
        assert f.var_map == {(1, 2): 1, (1, 3): 2, (2, 1): 3, (3, 2): 4}

    def test_empty_row_contradiction(self):
        m = Matrix01.from_rows([[1, 1], [0, 0]])
        f = encode_permanent(m)
        assert all(c for c in f.clauses)
        v = f.num_vars
        assert [v] in f.clauses and [-v] in f.clauses
        assert v not in f.var_map.values()
        assert count_models(f) == 0

    def test_clause_count_formula(self):
        rng = random.Random(7)
        for _ in range(30):
            n = rng.randint(2, 7)
            m = random_matrix(rng, n, 0.6)
            if m.has_zero_line():
                continue
            s = [len(m.row_support(i)) for i in range(1, n + 1)]
            t = [len(m.col_support(j)) for j in range(1, n + 1)]
            expected = 2 * n + sum(comb(k, 2) for k in s) + sum(comb(k, 2) for k in t)
            assert encode_permanent(m).num_clauses == expected

    def test_literals_in_range(self):
        with pytest.raises(ValueError):
            CnfFormula(2, [[3]])


class TestModels:
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_solutions_are_matchings(self, n):
        rng = random.Random(n)
        for _ in range(8):
            m = random_matrix(rng, n, 0.55)
            f = encode_permanent(m)
            if f.num_vars > 20:
                continue
            inverse = {v: e for e, v in f.var_map.items()}
            models = {frozenset(inverse[v] for v in model) for model in enumerate_models(f)}
            assert models == set(matchings(m))

    def test_dpll_matches_brute_force(self):
        rng = random.Random(66)
        for _ in range(20):
            m = random_matrix(rng, 6, rng.choice([0.4, 0.6, 0.8]))
            assert count_models(encode_permanent(m)) == perm_brute_force(m).value

    def test_dpll_free_variables(self):
        assert count_models(CnfFormula(3, [[1]])) == 4
        assert count_models(CnfFormula(2, [[1, -1]])) == 4
        assert count_models(CnfFormula(1, [[]])) == 0


class TestDimacs:
    def test_identity_1_exact(self):
        f = encode_permanent(Matrix01.identity(1))
        assert to_dimacs(f, comments=False) == "p cnf 1 2\n1 0\n1 0\n"

    def test_comments_precede_header(self):
        text = to_dimacs(encode_permanent(Matrix01.identity(1)))
        lines = text.splitlines()
        assert "c map 1 1 1" in lines
        body = [ln for ln in lines if not ln.startswith("c")]
        assert "\n".join(body) + "\n" == "p cnf 1 2\n1 0\n1 0\n"

    def test_round_trip(self):
        rng = random.Random(3)
        for _ in range(10):
            f = encode_permanent(random_matrix(rng, 5, 0.5))
            g = parse_dimacs(to_dimacs(f))
            assert (g.num_vars, g.clauses, g.var_map) == (f.num_vars, f.clauses, f.var_map)

    def test_empty_row_file_has_no_models(self):
        buf = io.StringIO()
        write_dimacs(encode_permanent(Matrix01.from_rows([[1, 0], [0, 0]])), buf)
        assert count_models(parse_dimacs(buf.getvalue())) == 0

    def test_lf_line_endings(self):
        assert "\r" not in to_dimacs(encode_permanent(Matrix01.ones(3)))

    @pytest.mark.parametrize("text", ["1 0\n", "p cnf 1 2\n1 0\n", "p dnf 1 1\n1 0\n", "p cnf 1 1\nx 0\n"])
    def test_parse_errors(self, text):
        with pytest.raises(ParseError):
            parse_dimacs(text)


def sweep(f: CnfFormula):
    for bits in range(1 << f.num_vars):
        if all(any((bits >> (abs(l) - 1) & 1) == (l > 0) for l in c) for c in f.clauses):
            yield frozenset(v for v in range(1, f.num_vars + 1) if bits >> (v - 1) & 1)


def test_enumerator_matches_flat_sweep():
    rng = random.Random(12)
    for _ in range(200):
        nv = rng.randint(1, 9)
        clauses = [[rng.choice([-1, 1]) * rng.randint(1, nv) for _ in range(rng.randint(1, 3))]
                   for _ in range(rng.randint(0, 12))]
        f = CnfFormula(nv, clauses)
        models = list(enumerate_models(f))
        assert set(models) == set(sweep(f)) and len(models) == len(set(models))
        assert count_models(f) == len(models)


def test_enumerator_limit():
    with pytest.raises(ValueError):
        list(enumerate_models(encode_permanent(Matrix01.ones(5)), max_vars=20))
