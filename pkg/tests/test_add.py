import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permdd.add import Add, AddManager, VariableOrder
from permdd.errors import NodeBudgetExceeded, Timeout
from permdd.matrix import GenParams, Matrix01, generate
from permdd.permanent import build_parity_add, build_row_sum_add, build_row_sum_product

from _util import all_subsets

NVARS = 6


def exprs(nvars=NVARS):
    var = st.integers(1, nvars)
    leaves = st.one_of(st.tuples(st.just("c"), st.integers(-3, 3)), st.tuples(st.just("x"), var))
    return st.recursive(leaves, lambda sub: st.one_of(
        st.tuples(st.just("+"), sub, sub),
        st.tuples(st.just("*"), sub, sub),
        st.tuples(st.just("ite"), st.lists(var, min_size=1, max_size=3, unique=True), sub, sub),
        st.tuples(st.just("ex"), var, sub),
    ), max_leaves=12)


def build(mgr: AddManager, e) -> Add:
    tag = e[0]
    if tag == "c":
        return mgr.constant(e[1])
    if tag == "x":
        return mgr.variable(e[1])
    if tag == "+":
        return build(mgr, e[1]) + build(mgr, e[2])
    if tag == "*":
        return build(mgr, e[1]) * build(mgr, e[2])
    if tag == "ite":
        return mgr.xor_all(e[1]).ite(build(mgr, e[2]), build(mgr, e[3]))
    return build(mgr, e[2]).exists(e[1])


def meaning(e, tau) -> int:
    tag = e[0]
    if tag == "c":
        return e[1]
    if tag == "x":
        return int(e[1] in tau)
    if tag == "+":
        return meaning(e[1], tau) + meaning(e[2], tau)
    if tag == "*":
        return meaning(e[1], tau) * meaning(e[2], tau)
    if tag == "ite":
        odd = sum(v in tau for v in e[1]) % 2
        return meaning(e[2], tau) if odd else meaning(e[3], tau)
    x = e[1]
    return meaning(e[2], tau - {x}) + meaning(e[2], tau | {x})


def from_table(mgr: AddManager, table: dict) -> Add:
    """Sum of value * minterm over every assignment; an independent construction path."""
    variables = list(mgr.order)
    acc = mgr.constant(0)
    for tau, v in table.items():
        term = mgr.constant(v)
        for x in variables:
            lit = mgr.variable(x) if x in tau else mgr.constant(1) + mgr.variable(x) * -1
            term = term * lit
        acc = acc + term
    return acc


def check_structure(mgr: AddManager, f: Add):
    """Ordering and reduction rules over every reachable node."""
    for u in mgr.reachable([f.node]):
        if mgr.is_terminal(u):
            continue
        lo, hi = mgr.low(u), mgr.high(u)
        assert lo != hi
        for c in (lo, hi):
            assert mgr.level(u) < mgr.level(c)


class TestConstantsAndVariables:
    def test_constant_hash_consed(self):
        mgr = AddManager(3)
        assert mgr.constant(0).node == mgr.constant(0).node
        assert mgr.constant(-1).node != mgr.constant(1).node
        big = 10**40
        assert mgr.constant(big).node == mgr.constant(big).node

    def test_constant_evaluate(self):
        mgr = AddManager(3)
        assert mgr.constant(5).evaluate(set()) == 5
        assert mgr.constant(7).evaluate({1, 2}) == 7

    def test_variable(self):
        mgr = AddManager(3)
        x1 = mgr.variable(1)
        assert x1.evaluate({1}) == 1
        assert x1.evaluate(set()) == 0
        assert mgr.variable(2).evaluate({1}) == 0
        assert x1.node_count() == (1, 2)
        assert x1.terminal_values() == {0, 1}

    def test_unknown_variable(self):
        with pytest.raises(KeyError):
            AddManager(3).variable(4)

    def test_order_validation(self):
        with pytest.raises(ValueError):
            VariableOrder([1, 2, 1])
        assert VariableOrder([3, 1, 2]).rank(1) == 2


class TestApply:
    def test_sum(self):
        mgr = AddManager(2)
        assert (mgr.variable(1) + mgr.variable(2)).evaluate({1, 2}) == 2

    def test_identities(self):
        mgr = AddManager(4)
        f = mgr.variable(1) * 3 + mgr.variable(3)
        assert (f + mgr.constant(0)).node == f.node
        assert (f * mgr.constant(1)).node == f.node
        assert (f * mgr.constant(0)).node == mgr.constant(0).node

    def test_row_sum_of_three_selected(self):
        mgr = AddManager(4)
        rs = build_row_sum_add(mgr, Matrix01.ones(4), 1)
        # oracle: direct count of chosen columns in the row's support
        for tau in all_subsets(range(1, 5)):
            assert rs.evaluate(tau) == len(tau)
            if len(tau) == 3:
                assert rs.evaluate(tau) == 3

    def test_power_leaves(self):
        mgr = AddManager(4)
        rs = build_row_sum_add(mgr, Matrix01.ones(4), 1)
        rsp = rs * rs * rs * rs
        assert rsp.terminal_values() == {0, 1, 16, 81, 256}

    def test_ite(self):
        mgr = AddManager(3)
        g, h = mgr.constant(2), mgr.constant(7)
        assert mgr.variable(1).ite(g, h).evaluate({1}) == 2
        assert mgr.variable(1).ite(g, h).evaluate(set()) == 7
        f = mgr.variable(2) * 5
        assert mgr.constant(1).ite(f, h).node == f.node
        parity = mgr.xor_all([1, 2])
        assert parity.ite(mgr.constant(-1), mgr.constant(1)).evaluate({1}) == -1

    def test_ite_rejects_non_boolean_condition(self):
        mgr = AddManager(2)
        with pytest.raises(ValueError):
            (mgr.variable(1) * 2).ite(mgr.constant(1), mgr.constant(0))

    def test_foreign_manager(self):
        a, b = AddManager(2), AddManager(2)
        with pytest.raises(ValueError):
            a.variable(1) + b.variable(1)


class TestAbstraction:
    def test_variable(self):
        mgr = AddManager(2)
        assert mgr.variable(1).exists(1).node == mgr.constant(1).node

    def test_absent_variable_doubles(self):
        mgr = AddManager(2)
        assert mgr.constant(3).exists(1).node == mgr.constant(6).node
        f = mgr.variable(2) * 5 + 1
        assert f.exists(1).node == (f * 2).node

    def test_many_at_once_matches_one_by_one(self):
        rng = random.Random(3)
        mgr = AddManager(7)
        for _ in range(40):
            f = mgr.constant(rng.randint(-2, 2))
            for _ in range(5):
                g = mgr.variable(rng.randint(1, 7)) * rng.randint(-3, 3) + rng.randint(-1, 1)
                f = f * g if rng.random() < 0.5 else f + g
            xs = rng.sample(range(1, 8), rng.randint(1, 7))
            one_by_one = f
            for x in xs:
                one_by_one = one_by_one.exists(x)
            assert f.exists(*xs).node == one_by_one.node

    def test_full_abstraction_of_ryser_4x4(self):
        # 4x4 all-ones permanent is 4! = 24 (checked by the brute-force enumerator elsewhere)
        mgr = AddManager(4)
        m = Matrix01.ones(4)
        ryser = build_row_sum_product(mgr, m) * build_parity_add(mgr, 4)
        total = ryser.exists(1, 2, 3, 4)
        assert total.is_constant()
        assert (-1) ** 4 * total.value() == 24


class TestXor:
    def test_values(self):
        mgr = AddManager(4)
        assert mgr.xor_all([1]).evaluate({1}) == 1
        assert mgr.xor_all([1, 2]).evaluate({1, 2}) == 0

    @pytest.mark.parametrize("k", [1, 2, 3, 4, 7, 10])
    def test_node_count(self, k):
        mgr = AddManager(10)
        assert mgr.xor_all(range(1, k + 1)).node_count() == (2 * k - 1, 2)

    def test_node_count_any_order(self):
        rng = random.Random(0)
        for _ in range(10):
            order = list(range(1, 9))
            rng.shuffle(order)
            mgr = AddManager(VariableOrder(order))
            sub = rng.sample(range(1, 9), 5)
            assert mgr.xor_all(sub).node_count() == (9, 2)

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            AddManager(3).xor_all([1, 1])
        with pytest.raises(ValueError):
            AddManager(3).xor_all([])


class TestAllOnesFour:
    def test_row_sum_counts(self):
        mgr = AddManager(4)
        assert build_row_sum_add(mgr, Matrix01.ones(4), 1).node_count() == (10, 5)

    def test_row_sum_product_isomorphic(self):
        mgr = AddManager(4)
        m = Matrix01.ones(4)
        rsp = build_row_sum_product(mgr, m)
        assert rsp.node_count() == (10, 5)
        assert rsp.terminal_values() == {0, 1, 16, 81, 256}
        assert rsp.evaluate({2, 4}) == 16

    def test_constant_count(self):
        assert AddManager(1).constant(3).node_count() == (0, 1)

    def test_dot(self):
        mgr = AddManager(4)
        dot = build_row_sum_add(mgr, Matrix01.ones(4), 1).to_dot("frs")
        assert dot.startswith("digraph frs {")
        assert dot.count("style=solid") == 10 and dot.count("style=dotted") == 10
        assert dot.count("shape=box") == 5


class TestProperties:
    @settings(max_examples=300, deadline=None)
    @given(exprs())
    def test_semantics(self, e):
        mgr = AddManager(NVARS)
        f = build(mgr, e)
        for tau in all_subsets(range(1, NVARS + 1)):
            assert f.evaluate(tau) == meaning(e, tau)
        check_structure(mgr, f)

    @settings(max_examples=150, deadline=None)
    @given(exprs(), st.permutations(list(range(1, NVARS + 1))))
    def test_canonicity(self, e, order):
        mgr = AddManager(VariableOrder(order))
        f = build(mgr, e)
        table = {tau: meaning(e, tau) for tau in all_subsets(range(1, NVARS + 1))}
        assert from_table(mgr, table).node == f.node

    @settings(max_examples=100, deadline=None)
    @given(exprs(), exprs())
    def test_distinct_functions_distinct_ids(self, e1, e2):
        mgr = AddManager(NVARS)
        f, g = build(mgr, e1), build(mgr, e2)
        same = all(meaning(e1, t) == meaning(e2, t) for t in all_subsets(range(1, NVARS + 1)))
        assert (f.node == g.node) == same

    @settings(max_examples=200, deadline=None)
    @given(exprs(), exprs(), st.integers(1, NVARS))
    def test_early_abstraction(self, e1, e2, x):
        mgr = AddManager(NVARS)
        f, g = build(mgr, e1), build(mgr, e2)
        g = g.exists(x)  # x no longer occurs in g
        assert x not in g.support()
        assert (f * g).exists(x).node == (f.exists(x) * g).node

    def test_canonicity_twelve_vars(self):
        rng = random.Random(12)
        for _ in range(5):
            mgr = AddManager(VariableOrder(rng.sample(range(1, 13), 12)))
            f = mgr.constant(1)
            for _ in range(4):
                row = mgr.constant(0)
                for x in rng.sample(range(1, 13), 4):
                    row = row + mgr.variable(x)
                f = f * row
            # evaluate exhaustively, rebuild in a fresh order-identical manager by tables
            table = {tau: f.evaluate(tau) for tau in all_subsets(range(1, 13))}
            mgr2 = AddManager(mgr.order)
            g = mgr2.constant(0)
            for tau, v in table.items():
                if v:
                    term = mgr2.constant(v)
                    for x in range(1, 13):
                        term = term * (mgr2.variable(x) if x in tau else 1 + mgr2.variable(x) * -1)
                    g = g + term
            assert g.node_count() == f.node_count()
            assert all(g.evaluate(t) == v for t, v in table.items())


class TestBookkeeping:
    def test_peak_never_below_current(self):
        mgr = AddManager(8)
        f = build_row_sum_product(mgr, Matrix01.band(8))
        assert mgr.peak_nodes >= mgr.current_nodes
        before = mgr.peak_nodes
        freed = mgr.collect([f])
        assert freed > 0
        assert mgr.peak_nodes == before >= mgr.current_nodes
        assert mgr.current_nodes == len(mgr.reachable([f.node, mgr.zero, mgr.one]))

    def test_collect_keeps_roots_valid(self):
        mgr = AddManager(6)
        m = Matrix01.band(6)
        f = build_row_sum_product(mgr, m)
        table = {t: f.evaluate(t) for t in all_subsets(range(1, 7))}
        mgr.collect([f])
        assert all(f.evaluate(t) == v for t, v in table.items())
        g = build_row_sum_product(mgr, m)  # rebuilt after collection, reuses freed ids
        assert g.node == f.node
        check_structure(mgr, g)

    def test_node_budget(self):
        mgr = AddManager(12, node_budget=50)
        with pytest.raises(NodeBudgetExceeded):
            build_row_sum_product(mgr, Matrix01.ones(12))

    def test_deadline(self):
        import time
        # checked every 2^16 apply steps, so the workload must exceed that
        m = generate(GenParams("dense", 24, 1.0, seed=0))
        mgr = AddManager(24, deadline=time.monotonic() - 1)
        with pytest.raises(Timeout):
            build_row_sum_product(mgr, m)
