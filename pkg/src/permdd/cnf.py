"""#SAT encoding of the permanent in DIMACS CNF (pairwise at-most-one).

One propositional variable per nonzero entry; each row and each column gets
an exactly-one constraint.  A row or column with no nonzero entry is encoded
as ``v`` and ``-v`` on a fresh variable, so the formula is unsatisfiable
without needing an empty clause.

Also holds a small DIMACS reader and an exact DPLL model counter used to
check emitted files independently.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from itertools import combinations
from typing import TextIO

from .errors import ParseError
from .matrix import Matrix01

__all__ = [
    "CnfFormula",
    "encode_permanent",
    "write_dimacs",
    "to_dimacs",
    "parse_dimacs",
    "count_models",
    "enumerate_models",
]


@dataclass
class CnfFormula:
    num_vars: int
    clauses: list[list[int]]
    var_map: dict[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        for clause in self.clauses:
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range 1..{self.num_vars}")

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)


def _exactly_one(lits: list[int], fresh) -> list[list[int]]:
    if not lits:
        v = fresh()
        return [[v], [-v]]
    clauses = [list(lits)]
    clauses.extend([-a, -b] for a, b in combinations(lits, 2))
    return clauses


def encode_permanent(m: Matrix01) -> CnfFormula:
    """CNF whose model count equals ``perm(m)``."""
    var_map: dict[tuple[int, int], int] = {}
    for i in range(1, m.n + 1):
        for j in m.row_support(i):
            var_map[(i, j)] = len(var_map) + 1
    counter = [len(var_map)]

    def fresh() -> int:
        counter[0] += 1
        return counter[0]

    clauses: list[list[int]] = []
    for i in range(1, m.n + 1):
        clauses += _exactly_one([var_map[i, j] for j in m.row_support(i)], fresh)
    for j in range(1, m.n + 1):
        clauses += _exactly_one([var_map[i, j] for i in m.col_support(j)], fresh)
    return CnfFormula(counter[0], clauses, var_map)


def write_dimacs(f: CnfFormula, sink: TextIO, comments: bool = True) -> None:
    """Write ``f`` in DIMACS; with ``comments`` the entry map precedes the header."""
    if comments:
        sink.write("c permanent encoding, pairwise at-most-one\n")
        if f.num_vars > len(f.var_map):
            sink.write("c variables beyond the map encode an empty row/column as v and -v\n")
        for (i, j), v in sorted(f.var_map.items(), key=lambda kv: kv[1]):
            sink.write(f"c map {i} {j} {v}\n")
    sink.write(f"p cnf {f.num_vars} {len(f.clauses)}\n")
    for clause in f.clauses:
        sink.write(" ".join(map(str, clause)) + " 0\n")


def to_dimacs(f: CnfFormula, comments: bool = True) -> str:
    buf = io.StringIO()
    write_dimacs(f, buf, comments)
    return buf.getvalue()


def parse_dimacs(text: str) -> CnfFormula:
    """Read DIMACS CNF, recovering ``c map i j v`` comments into ``var_map``."""
    header = None
    clauses: list[list[int]] = []
    var_map: dict[tuple[int, int], int] = {}
    current: list[int] = []
    for no, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("c"):
            toks = s.split()
            if len(toks) == 5 and toks[1] == "map":
                try:
                    i, j, v = map(int, toks[2:])
                except ValueError:
                    raise ParseError("malformed map comment", no) from None
                var_map[(i, j)] = v
            continue
        if s.startswith("p"):
            toks = s.split()
            if len(toks) != 4 or toks[1] != "cnf":
                raise ParseError("malformed problem line", no)
            header = (int(toks[2]), int(toks[3]))
            continue
        if header is None:
            raise ParseError("clause before problem line", no)
        for tok in s.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", no) from None
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                current.append(lit)
    if header is None:
        raise ParseError("missing problem line")
    if current:
        clauses.append(current)
    if len(clauses) != header[1]:
        raise ParseError(f"header declares {header[1]} clauses, found {len(clauses)}")
    return CnfFormula(header[0], clauses, var_map)


def count_models(f: CnfFormula) -> int:
    """Exact model count by DPLL with unit propagation.

    Variables left unconstrained once every clause is satisfied each double
    the count.
    """

    def simplify(clauses, lit):
        out = []
        for c in clauses:
            if lit in c:
                continue
            if -lit in c:
                c = [x for x in c if x != -lit]
                if not c:
                    return None
            out.append(c)
        return out

    def count(clauses, free: int) -> int:
        # free: number of variables not yet assigned
        while True:
            unit = next((c[0] for c in clauses if len(c) == 1), None)
            if unit is None:
                break
            clauses = simplify(clauses, unit)
            free -= 1
            if clauses is None:
                return 0
        if not clauses:
            return 1 << free
        # branch on the most frequent variable
        freq: dict[int, int] = {}
        for c in clauses:
            for lit in c:
                freq[abs(lit)] = freq.get(abs(lit), 0) + 1
        v = max(freq, key=lambda x: (freq[x], -x))
        total = 0
        for lit in (v, -v):
            sub = simplify(clauses, lit)
            if sub is not None:
                total += count(sub, free - 1)
        return total

    if any(not c for c in f.clauses):
        return 0
    clauses = [list(dict.fromkeys(c)) for c in f.clauses]
    clauses = [c for c in clauses if not any(-x in c for x in c)]
    return count(clauses, f.num_vars)


def enumerate_models(f: CnfFormula, max_vars: int | None = None):
    """Yield every satisfying assignment as a frozenset of true variables.

    Walks the full assignment tree over variables ``1..num_vars`` in order.
    Each clause is checked as soon as its highest variable is set, so a
    falsified prefix cuts its whole subtree; nothing is inferred, which keeps
    this an independent check on the DPLL counter.
    """
    n = f.num_vars
    if max_vars is not None and n > max_vars:
        raise ValueError(f"{n} variables exceeds enumeration limit {max_vars}")
    closing: list[list[list[int]]] = [[] for _ in range(n + 1)]
    for clause in f.clauses:
        if not clause:
            return
        closing[max(abs(l) for l in clause)].append(clause)
    value = [False] * (n + 1)

    def walk(v):
        if v > n:
            yield frozenset(u for u in range(1, n + 1) if value[u])
            return
        for bit in (False, True):
            value[v] = bit
            if all(any(value[abs(l)] == (l > 0) for l in c) for c in closing[v]):
                yield from walk(v + 1)

    yield from walk(1)
