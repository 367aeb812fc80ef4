"""Permanent algorithms for 0-1 matrices.

Reference algorithms (permutation sum, Gray-code Ryser, identical-rows closed
form) and the symbolic ones built on ADDs: monolithic construction of the
signed Ryser summand followed by full quantification, and the clustered
variant that abstracts each column variable as soon as no pending row-sum
mentions it.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from math import comb
from typing import Hashable, Mapping, Sequence

from .add import DEFAULT_NODE_BUDGET, Add, AddManager, VariableOrder
from .errors import InternalAssertion, LimitExceeded, Timeout
from .matrix import Matrix01, has_perfect_matching, primal_graph

__all__ = [
    "HEURISTICS",
    "ALGORITHMS",
    "ClusterPlan",
    "PermanentResult",
    "PermConfig",
    "perm_brute_force",
    "perm_ryser_gray",
    "perm_identical_rows",
    "build_row_sum_add",
    "build_parity_add",
    "build_row_sum_product",
    "perm_monolithic",
    "mcs_order",
    "cluster_rank",
    "plan_clusters",
    "perm_early_abstraction",
    "perm",
]

HEURISTICS = ("be", "bm-list", "mono")
ALGORITHMS = ("brute", "gray", "mono", "early")


@dataclass
class PermanentResult:
    value: int
    algorithm: str
    wall_time_ms: float = 0.0
    peak_add_nodes: int = 0
    total_add_nodes_created: int = 0
    clusters_processed: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def stats(self) -> dict:
        return {
            "wallTimeMillis": self.wall_time_ms,
            "peakAddNodes": self.peak_add_nodes,
            "totalAddNodesCreated": self.total_add_nodes_created,
            "clustersProcessed": self.clusters_processed,
        }


def _deadline_from(timeout: float | None) -> float | None:
    return None if timeout is None else time.monotonic() + timeout


def _check(deadline):
    if deadline is not None and time.monotonic() >= deadline:
        raise Timeout("deadline reached")


# ---------------------------------------------------------------------------
# Reference algorithms


def perm_brute_force(m: Matrix01, limit: int = 12, timeout: float | None = None) -> PermanentResult:
    """Sum of ``prod_i a_{i,sigma(i)}`` over all permutations ``sigma``.

    Permutations are enumerated row by row; branches through a zero entry
    contribute nothing and are cut, and the count below each (row, used
    columns) prefix is shared between the prefixes that reach it.
    """
    n = m.n
    if n > limit:
        raise LimitExceeded(f"brute force limited to n <= {limit}, got n = {n}")
    t0 = time.perf_counter()
    deadline = _deadline_from(timeout)
    _check(deadline)
    supports = [[j - 1 for j in m.row_support(i)] for i in range(1, n + 1)]
    memo: dict[tuple[int, int], int] = {}

    def count(i: int, used: int) -> int:
        if i == n:
            return 1
        key = (i, used)
        c = memo.get(key)
        if c is None:
            if not len(memo) & 0xFFFF:
                _check(deadline)
            c = 0
            for j in supports[i]:
                if not used >> j & 1:
                    c += count(i + 1, used | (1 << j))
            memo[key] = c
        return c

    value = count(0, 0)
    return PermanentResult(value, "brute", (time.perf_counter() - t0) * 1000)


def perm_ryser_gray(m: Matrix01, limit: int = 30, timeout: float | None = None,
                    nijenhuis_wilf: bool = False) -> PermanentResult:
    """Ryser's inclusion-exclusion over column subsets in binary reflected Gray-code order.

    Each step toggles one column and updates the ``n`` row sums by ``+-a_ij``.
    With ``nijenhuis_wilf`` only the subsets of the first ``n-1`` columns are
    visited, using doubled row sums so everything stays integral.
    """
    n = m.n
    if n > limit:
        raise LimitExceeded(f"Gray-code Ryser limited to n <= {limit}, got n = {n}")
    t0 = time.perf_counter()
    deadline = _deadline_from(timeout)
    _check(deadline)
    cols = [list(c) for c in zip(*m.rows)]
    prod = math.prod

    if nijenhuis_wilf:
        # doubled start: 2*x_i = 2*a_in - sum_j a_ij
        sums = [2 * row[-1] - sum(row) for row in m.rows]
        ncols = n - 1
    else:
        sums = [0] * n
        ncols = n
    cols2 = [[2 * v for v in c] for c in cols] if nijenhuis_wilf else cols
    total = prod(sums) if nijenhuis_wilf else 0
    in_set = [False] * ncols
    sign = 1
    for k in range(1, 1 << ncols):
        # column toggled at step k is the index of k's lowest set bit
        j = (k & -k).bit_length() - 1
        col = cols2[j]
        if in_set[j]:
            sums = [s - c for s, c in zip(sums, col)]
        else:
            sums = [s + c for s, c in zip(sums, col)]
        in_set[j] = not in_set[j]
        sign = -sign
        total += sign * prod(sums)
        if not k & 0xFFFF:
            _check(deadline)
    if nijenhuis_wilf:
        # perm = (-1)^(n-1) * 2 * sum(...) with sums scaled by 2^n
        value = (-1) ** (n - 1) * 2 * total
        value, rem = divmod(value, 1 << n)
        if rem:
            raise InternalAssertion("Nijenhuis-Wilf sum not divisible by 2^n")
    else:
        value = (-1) ** n * total
    return PermanentResult(value, "gray", (time.perf_counter() - t0) * 1000)


def perm_identical_rows(n: int, k: int) -> int:
    """Permanent of an ``n x n`` matrix whose rows all share one support of size ``k``."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    total = 0
    for j in range(k + 1):
        pj = j ** n
        for r in range(j, n - k + j + 1):
            total += (-1) ** r * comb(k, j) * comb(n - k, r - j) * pj
    return (-1) ** n * total


# ---------------------------------------------------------------------------
# ADD construction


def build_row_sum_add(mgr: AddManager, m: Matrix01, i: int) -> Add:
    """ADD mapping a column subset to the number of ones of row ``i`` inside it."""
    rank = mgr.order.rank
    support = sorted(m.row_support(i), key=rank, reverse=True)
    f = mgr.zero
    for j in support:
        f = mgr._add(mgr.variable(j).node, f)
    return mgr.wrap(f)


def build_parity_add(mgr: AddManager, n: int) -> Add:
    """ADD for ``(-1)^|tau|`` over column variables ``1..n``."""
    odd = mgr.xor_all(range(1, n + 1))
    return mgr.wrap(mgr._ite(odd.node, mgr._terminal(-1), mgr.one))


def build_row_sum_product(mgr: AddManager, m: Matrix01, rows: Sequence[int] | None = None) -> Add:
    """Product of the row-sum ADDs of ``rows`` (all rows by default)."""
    if rows is None:
        rows = range(1, m.n + 1)
    f = mgr.one
    for i in rows:
        f = mgr._mul(f, build_row_sum_add(mgr, m, i).node)
    return mgr.wrap(f)


def _signed(n: int, v: int) -> int:
    return -v if n % 2 else v


def _zero_result(algorithm: str, t0: float) -> PermanentResult:
    return PermanentResult(0, algorithm, (time.perf_counter() - t0) * 1000)


def perm_monolithic(m: Matrix01, order: VariableOrder | None = None,
                    node_budget: int | None = DEFAULT_NODE_BUDGET,
                    timeout: float | None = None) -> PermanentResult:
    """Build the full row-sum product, multiply by parity, sum out every column."""
    t0 = time.perf_counter()
    n = m.n
    if m.has_zero_line():
        return _zero_result("mono", t0)
    mgr = AddManager(order or VariableOrder.natural(n), node_budget, _deadline_from(timeout))
    mgr.check_deadline()
    rsp = build_row_sum_product(mgr, m)
    peak = rsp.size()
    ryser = rsp * build_parity_add(mgr, n)
    peak = max(peak, ryser.size())
    total = ryser.exists(*range(1, n + 1))
    if not total.is_constant():
        raise InternalAssertion("variables remain after full abstraction")
    return PermanentResult(
        _signed(n, total.value()), "mono", (time.perf_counter() - t0) * 1000,
        peak_add_nodes=peak, total_add_nodes_created=mgr.total_created,
        clusters_processed=1, extra={"rsp_nodes": rsp.size(), "manager_peak": mgr.peak_nodes},
    )


# ---------------------------------------------------------------------------
# Clustering


def mcs_order(graph: Mapping[int, set[int]]) -> VariableOrder:
    """Maximum cardinality search; ties go to the smallest vertex."""
    vertices = sorted(graph)
    weight = {v: 0 for v in vertices}
    order = []
    remaining = set(vertices)
    while remaining:
        v = min(remaining, key=lambda u: (-weight[u], u))
        order.append(v)
        remaining.discard(v)
        for u in graph[v]:
            if u in remaining:
                weight[u] += 1
    return VariableOrder(order)


def cluster_rank(row: int, m: Matrix01, eta: VariableOrder, heuristic: str) -> int:
    """Cluster index of ``row``: min (be) or max (bm-list) ``eta`` rank over its support."""
    if heuristic == "mono":
        return 1
    support = m.row_support(row)
    if not support:
        raise ValueError(f"row {row} is all zero; it has no cluster rank")
    ranks = [eta.rank(j) for j in support]
    if heuristic == "be":
        return min(ranks)
    if heuristic == "bm-list":
        return max(ranks)
    raise ValueError(f"unknown heuristic {heuristic!r}")


@dataclass
class ClusterPlan:
    eta: VariableOrder
    heuristic: str
    clusters: dict[int, list[int]]  # cluster rank -> rows, only nonempty ranks
    m: int  # largest possible rank

    def ranks(self) -> list[int]:
        return sorted(self.clusters)


def plan_clusters(m: Matrix01, eta: VariableOrder, heuristic: str) -> ClusterPlan:
    clusters: dict[int, list[int]] = {}
    for i in range(1, m.n + 1):
        clusters.setdefault(cluster_rank(i, m, eta, heuristic), []).append(i)
    top = 1 if heuristic == "mono" else max(eta.rank(x) for x in eta)
    return ClusterPlan(eta, heuristic, clusters, top)


def perm_early_abstraction(m: Matrix01, pi: VariableOrder | None = None,
                           eta: VariableOrder | None = None, heuristic: str = "bm-list",
                           node_budget: int | None = DEFAULT_NODE_BUDGET,
                           timeout: float | None = None, collect_garbage: bool = True) -> PermanentResult:
    """Clustered symbolic Ryser with early abstraction.

    Rows are grouped by :func:`cluster_rank`.  Starting from the parity ADD,
    clusters are multiplied in by increasing rank; after each one every
    variable not used by a later cluster is summed out.
    """
    t0 = time.perf_counter()
    n = m.n
    if m.has_zero_line():
        return _zero_result("early", t0)
    pi = pi or VariableOrder.natural(n)
    eta = eta or mcs_order(primal_graph(m))
    plan = plan_clusters(m, eta, heuristic)
    ranks = plan.ranks()

    # later_vars[k]: columns used by clusters ranks[k+1:]
    later_vars: list[frozenset] = [frozenset()] * len(ranks)
    acc: set = set()
    for k in range(len(ranks) - 1, -1, -1):
        later_vars[k] = frozenset(acc)
        for i in plan.clusters[ranks[k]]:
            acc.update(m.row_support(i))

    mgr = AddManager(pi, node_budget, _deadline_from(timeout))
    mgr.check_deadline()
    f = build_parity_add(mgr, n)
    remaining = set(range(1, n + 1))
    peak = f.size()
    processed = 0
    for k, r in enumerate(ranks):
        for i in plan.clusters[r]:
            f = f * build_row_sum_add(mgr, m, i)
            peak = max(peak, f.size())
        # every unabstracted variable is still in f's domain; absent ones double it
        done = [x for x in remaining if x not in later_vars[k]]
        f = f.exists(*done)
        remaining.difference_update(done)
        processed += 1
        if collect_garbage:
            mgr.collect([f])
    if remaining or not f.is_constant():
        raise InternalAssertion(f"variables {sorted(remaining)} left unabstracted")
    return PermanentResult(
        _signed(n, f.value()), "early", (time.perf_counter() - t0) * 1000,
        peak_add_nodes=peak, total_add_nodes_created=mgr.total_created,
        clusters_processed=processed,
        extra={"heuristic": heuristic, "manager_peak": mgr.peak_nodes},
    )


# ---------------------------------------------------------------------------
# Dispatcher


@dataclass
class PermConfig:
    algorithm: str = "early"
    heuristic: str | None = None  # None: mono for density >= 0.5, else bm-list
    order: str | None = None  # cluster rank-order: "index" or "mcs"; None follows heuristic
    node_budget: int | None = DEFAULT_NODE_BUDGET
    timeout: float | None = None
    brute_limit: int = 12
    gray_limit: int = 30

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.heuristic is not None and self.heuristic not in HEURISTICS:
            raise ValueError(f"heuristic must be one of {HEURISTICS}")
        if self.order is not None and self.order not in ("index", "mcs"):
            raise ValueError("order must be 'index' or 'mcs'")


def _auto_heuristic(m: Matrix01) -> str:
    return "mono" if m.density() >= 0.5 else "bm-list"


def perm(m: Matrix01, config: PermConfig | None = None) -> PermanentResult:
    """Compute the permanent with the configured algorithm.

    Matrices without a perfect matching return 0 before any heavy work.
    """
    config = config or PermConfig()
    t0 = time.perf_counter()
    if config.timeout is not None and config.timeout <= 0:
        raise Timeout("timeout of zero seconds")
    if not has_perfect_matching(m):
        return _zero_result(config.algorithm, t0)
    if config.algorithm == "brute":
        return perm_brute_force(m, config.brute_limit, config.timeout)
    if config.algorithm == "gray":
        return perm_ryser_gray(m, config.gray_limit, config.timeout)
    if config.algorithm == "mono":
        return perm_monolithic(m, node_budget=config.node_budget, timeout=config.timeout)
    heuristic = config.heuristic or _auto_heuristic(m)
    order = config.order or ("index" if heuristic == "mono" else "mcs")
    eta = VariableOrder.natural(m.n) if order == "index" else mcs_order(primal_graph(m))
    return perm_early_abstraction(m, eta=eta, heuristic=heuristic,
                                  node_budget=config.node_budget, timeout=config.timeout)
