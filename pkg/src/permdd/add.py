"""Reduced ordered Algebraic Decision Diagrams over exact integers.

Nodes live in a :class:`AddManager` and are addressed by integer ids.  Every
node is hash-consed: internal nodes by ``(level, low, high)`` and terminals by
value, so two ids are equal exactly when they denote the same function under
the manager's variable order.  :class:`Add` is a thin handle pairing a manager
with a root id and carries the arithmetic operators.

Variables are arbitrary hashable labels (column numbers in this package);
internally each is replaced by its *level*, its 0-based rank in the order.
"""

from __future__ import annotations

import sys
import time
from bisect import bisect_left
from typing import Hashable, Iterable, Sequence

from .errors import NodeBudgetExceeded, Timeout

__all__ = ["VariableOrder", "AddManager", "Add", "DEFAULT_NODE_BUDGET"]

DEFAULT_NODE_BUDGET = 50_000_000
_LEAF = sys.maxsize  # level of terminal nodes; sorts below every variable
_CHECK_MASK = (1 << 16) - 1


class VariableOrder:
    """Ordered list of variables; ``rank(x)`` is the 1-based position of ``x``."""

    __slots__ = ("vars", "_rank")

    def __init__(self, variables: Iterable[Hashable]):
        self.vars = tuple(variables)
        self._rank = {x: r for r, x in enumerate(self.vars, start=1)}
        if len(self._rank) != len(self.vars):
            raise ValueError("variable order contains duplicates")

    @classmethod
    def natural(cls, n: int) -> "VariableOrder":
        return cls(range(1, n + 1))

    def rank(self, x: Hashable) -> int:
        try:
            return self._rank[x]
        except KeyError:
            raise KeyError(f"unknown variable {x!r}") from None

    def __contains__(self, x) -> bool:
        return x in self._rank

    def __len__(self) -> int:
        return len(self.vars)

    def __iter__(self):
        return iter(self.vars)

    def __eq__(self, other) -> bool:
        return isinstance(other, VariableOrder) and self.vars == other.vars

    def __hash__(self) -> int:
        return hash(self.vars)

    def __repr__(self) -> str:
        return f"VariableOrder({list(self.vars)!r})"


class AddManager:
    """Node store, unique tables and operation caches for one family of ADDs.

    A manager is not thread-safe; use one per thread.

    ``node_budget`` bounds the number of live nodes and ``deadline`` (a
    :func:`time.monotonic` timestamp) bounds wall time; both are checked
    cooperatively while operations run and raise
    :class:`~permdd.errors.NodeBudgetExceeded` / :class:`~permdd.errors.Timeout`.
    """

    def __init__(self, order: VariableOrder | Sequence[Hashable] | int,
                 node_budget: int | None = DEFAULT_NODE_BUDGET,
                 deadline: float | None = None):
        if isinstance(order, int):
            order = VariableOrder.natural(order)
        elif not isinstance(order, VariableOrder):
            order = VariableOrder(order)
        self.order = order
        # apply recursion is up to ~2 frames per level and nests inside quantification
        need = 8 * len(order) + 1000
        if sys.getrecursionlimit() < need:
            sys.setrecursionlimit(need)
        self.node_budget = node_budget
        self.deadline = deadline

        # Parallel arrays indexed by node id.  Terminals: level _LEAF, value in _val.
        self._level: list[int] = []
        self._lo: list[int] = []
        self._hi: list[int] = []
        self._val: list[int | None] = []
        self._free: list[int] = []
        self._unique: dict[tuple[int, int, int], int] = {}
        self._terminals: dict[int, int] = {}

        self._cache_add: dict = {}
        self._cache_mul: dict = {}
        self._cache_ite: dict = {}
        self._cache_xor: dict = {}
        self._cache_scale: dict = {}

        self.current_nodes = 0
        self.peak_nodes = 0
        self.total_created = 0
        self._ops = 0

        self.zero = self._terminal(0)
        self.one = self._terminal(1)

    # -- node construction ---------------------------------------------------

    def _alloc(self, level, lo, hi, val) -> int:
        if self._free:
            u = self._free.pop()
            self._level[u] = level
            self._lo[u] = lo
            self._hi[u] = hi
            self._val[u] = val
        else:
            u = len(self._level)
            self._level.append(level)
            self._lo.append(lo)
            self._hi.append(hi)
            self._val.append(val)
        self.total_created += 1
        self.current_nodes += 1
        if self.current_nodes > self.peak_nodes:
            self.peak_nodes = self.current_nodes
            if self.node_budget is not None and self.current_nodes > self.node_budget:
                raise NodeBudgetExceeded(
                    f"live ADD nodes exceeded budget of {self.node_budget}")
        return u

    def _terminal(self, value: int) -> int:
        u = self._terminals.get(value)
        if u is None:
            u = self._alloc(_LEAF, -1, -1, value)
            self._terminals[value] = u
        return u

    def _mk(self, level: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (level, lo, hi)
        u = self._unique.get(key)
        if u is None:
            u = self._alloc(level, lo, hi, None)
            self._unique[key] = u
        return u

    def _tick(self):
        self._ops += 1
        if not self._ops & _CHECK_MASK:
            self.check_deadline()

    def check_deadline(self):
        if self.deadline is not None and time.monotonic() >= self.deadline:
            raise Timeout("deadline reached during ADD operation")

    # -- public constructors -------------------------------------------------

    def wrap(self, u: int) -> "Add":
        return Add(self, u)

    def constant(self, value: int) -> "Add":
        return Add(self, self._terminal(int(value)))

    def variable(self, x: Hashable) -> "Add":
        """Indicator ADD of ``x``: 1 when ``x`` is true, else 0."""
        level = self.order.rank(x) - 1
        return Add(self, self._mk(level, self.zero, self.one))

    def xor_all(self, variables: Sequence[Hashable]) -> "Add":
        """0/1-valued parity of ``variables``, combined pairwise in a balanced tree."""
        variables = list(variables)
        if not variables:
            raise ValueError("xor_all needs at least one variable")
        if len(set(variables)) != len(variables):
            raise ValueError("xor_all variables must be distinct")
        layer = [self.variable(x).node for x in variables]
        while len(layer) > 1:
            nxt = [self._xor(layer[k], layer[k + 1]) for k in range(0, len(layer) - 1, 2)]
            if len(layer) % 2:
                nxt.append(layer[-1])
            layer = nxt
        return Add(self, layer[0])

    # -- queries -------------------------------------------------------------

    def is_terminal(self, u: int) -> bool:
        return self._level[u] == _LEAF

    def value(self, u: int) -> int:
        if self._level[u] != _LEAF:
            raise ValueError(f"node {u} is not a terminal")
        return self._val[u]

    def var_of(self, u: int):
        return self.order.vars[self._level[u]]

    def low(self, u: int) -> int:
        return self._lo[u]

    def high(self, u: int) -> int:
        return self._hi[u]

    def level(self, u: int) -> int:
        """0-based order position of ``u``'s variable; ``sys.maxsize`` for terminals."""
        return self._level[u]

    def reachable(self, roots: Iterable[int]) -> set[int]:
        lvl, lo, hi = self._level, self._lo, self._hi
        seen = set()
        stack = list(roots)
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            if lvl[u] != _LEAF:
                stack.append(lo[u])
                stack.append(hi[u])
        return seen

    def node_count(self, u: int) -> tuple[int, int]:
        """(internal, terminal) counts of nodes reachable from ``u``."""
        nodes = self.reachable([u])
        terminals = sum(1 for v in nodes if self._level[v] == _LEAF)
        return len(nodes) - terminals, terminals

    def support_levels(self, u: int) -> set[int]:
        lvl = self._level
        return {lvl[v] for v in self.reachable([u]) if lvl[v] != _LEAF}

    def terminal_values(self, u: int) -> set[int]:
        lvl, val = self._level, self._val
        return {val[v] for v in self.reachable([u]) if lvl[v] == _LEAF}

    def evaluate(self, u: int, assignment) -> int:
        """Value of ``u`` when exactly the variables in ``assignment`` are true."""
        lvl, lo, hi, vars_ = self._level, self._lo, self._hi, self.order.vars
        true = set(assignment)
        while lvl[u] != _LEAF:
            u = hi[u] if vars_[lvl[u]] in true else lo[u]
        return self._val[u]

    # -- apply operations on node ids ----------------------------------------

    def _add(self, f: int, g: int) -> int:
        if f > g:
            f, g = g, f
        lvl = self._level
        lf = lvl[f]
        lg = lvl[g]
        if lf == _LEAF:
            vf = self._val[f]
            if lg == _LEAF:
                return self._terminal(vf + self._val[g])
            if vf == 0:
                return g
        elif lg == _LEAF and self._val[g] == 0:
            return f
        key = (f, g)
        cache = self._cache_add
        r = cache.get(key)
        if r is not None:
            return r
        self._ops += 1
        if not self._ops & _CHECK_MASK:
            self.check_deadline()
        lo, hi = self._lo, self._hi
        if lf == lg:
            r = self._mk(lf, self._add(lo[f], lo[g]), self._add(hi[f], hi[g]))
        elif lf < lg:
            r = self._mk(lf, self._add(lo[f], g), self._add(hi[f], g))
        else:
            r = self._mk(lg, self._add(f, lo[g]), self._add(f, hi[g]))
        cache[key] = r
        return r

    def _mul(self, f: int, g: int) -> int:
        if f > g:
            f, g = g, f
        lvl = self._level
        lf = lvl[f]
        lg = lvl[g]
        if lf == _LEAF:
            vf = self._val[f]
            if lg == _LEAF:
                return self._terminal(vf * self._val[g])
            if vf == 0:
                return f
            if vf == 1:
                return g
        elif lg == _LEAF:
            vg = self._val[g]
            if vg == 0:
                return g
            if vg == 1:
                return f
        key = (f, g)
        cache = self._cache_mul
        r = cache.get(key)
        if r is not None:
            return r
        self._ops += 1
        if not self._ops & _CHECK_MASK:
            self.check_deadline()
        lo, hi = self._lo, self._hi
        if lf == lg:
            r = self._mk(lf, self._mul(lo[f], lo[g]), self._mul(hi[f], hi[g]))
        elif lf < lg:
            r = self._mk(lf, self._mul(lo[f], g), self._mul(hi[f], g))
        else:
            r = self._mk(lg, self._mul(f, lo[g]), self._mul(f, hi[g]))
        cache[key] = r
        return r

    def _xor(self, f: int, g: int) -> int:
        # 0/1-valued operands only
        if f > g:
            f, g = g, f
        if f == g:
            return self.zero
        lvl = self._level
        lf = lvl[f]
        lg = lvl[g]
        if lf == _LEAF and lg == _LEAF:
            return self._terminal(self._val[f] ^ self._val[g])
        if f == self.zero:
            return g
        if g == self.zero:
            return f
        key = (f, g)
        r = self._cache_xor.get(key)
        if r is not None:
            return r
        self._tick()
        lo, hi = self._lo, self._hi
        top = min(lf, lg)
        f0, f1 = (lo[f], hi[f]) if lf == top else (f, f)
        g0, g1 = (lo[g], hi[g]) if lg == top else (g, g)
        r = self._mk(top, self._xor(f0, g0), self._xor(f1, g1))
        self._cache_xor[key] = r
        return r

    def _ite(self, c: int, g: int, h: int) -> int:
        if c == self.one:
            return g
        if c == self.zero:
            return h
        if g == h:
            return g
        key = (c, g, h)
        r = self._cache_ite.get(key)
        if r is not None:
            return r
        self._tick()
        lvl, lo, hi = self._level, self._lo, self._hi
        top = min(lvl[c], lvl[g], lvl[h])
        c0, c1 = (lo[c], hi[c]) if lvl[c] == top else (c, c)
        g0, g1 = (lo[g], hi[g]) if lvl[g] == top else (g, g)
        h0, h1 = (lo[h], hi[h]) if lvl[h] == top else (h, h)
        r = self._mk(top, self._ite(c0, g0, h0), self._ite(c1, g1, h1))
        self._cache_ite[key] = r
        return r

    def _scale(self, f: int, k: int) -> int:
        """Multiply every terminal of ``f`` by the integer ``k``."""
        if k == 1:
            return f
        if k == 0:
            return self.zero
        key = (f, k)
        r = self._cache_scale.get(key)
        if r is not None:
            return r
        self._tick()
        if self._level[f] == _LEAF:
            r = self._terminal(self._val[f] * k)
        else:
            r = self._mk(self._level[f], self._scale(self._lo[f], k), self._scale(self._hi[f], k))
        self._cache_scale[key] = r
        return r

    def _nonzero(self, f: int, cache: dict) -> int:
        r = cache.get(f)
        if r is None:
            if self._level[f] == _LEAF:
                r = self.zero if self._val[f] == 0 else self.one
            else:
                r = self._mk(self._level[f], self._nonzero(self._lo[f], cache),
                             self._nonzero(self._hi[f], cache))
            cache[f] = r
        return r

    def _exists(self, f: int, levels: tuple[int, ...], i: int, cache: dict) -> int:
        """Sum out ``levels[i:]`` (ascending) from ``f``."""
        nlev = len(levels)
        if i == nlev:
            return f
        key = (f, i)
        r = cache.get(key)
        if r is not None:
            return r
        self._tick()
        lf = self._level[f]
        if lf == _LEAF:
            r = self._terminal(self._val[f] << (nlev - i))
        else:
            # variables ordered above f's top do not occur in f: each doubles it
            j = bisect_left(levels, lf, i)
            if j < nlev and levels[j] == lf:
                r = self._add(self._exists(self._lo[f], levels, j + 1, cache),
                              self._exists(self._hi[f], levels, j + 1, cache))
            else:
                r = self._mk(lf, self._exists(self._lo[f], levels, j, cache),
                             self._exists(self._hi[f], levels, j, cache))
            if j > i:
                r = self._scale(r, 1 << (j - i))
        cache[key] = r
        return r

    def exists(self, f: int, variables: Iterable[Hashable]) -> int:
        """Additive quantification of ``f`` over every variable in ``variables``."""
        levels = tuple(sorted({self.order.rank(x) - 1 for x in variables}))
        if not levels:
            return f
        return self._exists(f, levels, 0, {})

    # -- housekeeping --------------------------------------------------------

    def clear_caches(self):
        self._cache_add.clear()
        self._cache_mul.clear()
        self._cache_ite.clear()
        self._cache_xor.clear()
        self._cache_scale.clear()

    def collect(self, roots: Iterable["Add | int"]) -> int:
        """Free every node not reachable from ``roots``; returns the number freed.

        Ids held outside ``roots`` become invalid.  Operation caches are dropped.
        """
        ids = [r.node if isinstance(r, Add) else r for r in roots]
        live = self.reachable(ids + [self.zero, self.one])
        lvl, lo, hi, val = self._level, self._lo, self._hi, self._val
        freed = 0
        self._unique = {k: u for k, u in self._unique.items() if u in live}
        self._terminals = {v: u for v, u in self._terminals.items() if u in live}
        for u in range(len(lvl)):
            if u not in live and lvl[u] is not None:
                lvl[u] = None
                lo[u] = hi[u] = -1
                val[u] = None
                self._free.append(u)
                freed += 1
        self.current_nodes -= freed
        self.clear_caches()
        return freed

    def stats(self) -> dict:
        return {
            "current_nodes": self.current_nodes,
            "peak_nodes": self.peak_nodes,
            "total_created": self.total_created,
        }

    def to_dot(self, u: int, name: str = "add") -> str:
        """Graphviz rendering: solid edges for the 1-branch, dotted for the 0-branch."""
        nodes = sorted(self.reachable([u]))
        out = [f"digraph {name} {{"]
        for v in nodes:
            if self._level[v] == _LEAF:
                out.append(f'  n{v} [shape=box,label="{self._val[v]}"];')
            else:
                out.append(f'  n{v} [shape=circle,label="x{self.var_of(v)}"];')
        for v in nodes:
            if self._level[v] != _LEAF:
                out.append(f"  n{v} -> n{self._hi[v]} [label=1,style=solid];")
                out.append(f"  n{v} -> n{self._lo[v]} [label=0,style=dotted];")
        out.append("}")
        return "\n".join(out) + "\n"


class Add:
    """Handle to one ADD root inside a manager."""

    __slots__ = ("mgr", "node")

    def __init__(self, mgr: AddManager, node: int):
        self.mgr = mgr
        self.node = node

    def _coerce(self, other) -> int:
        if isinstance(other, Add):
            if other.mgr is not self.mgr:
                raise ValueError("operands belong to different managers")
            return other.node
        if isinstance(other, int):
            return self.mgr._terminal(other)
        return NotImplemented

    def __add__(self, other):
        g = self._coerce(other)
        if g is NotImplemented:
            return g
        return Add(self.mgr, self.mgr._add(self.node, g))

    __radd__ = __add__

    def __mul__(self, other):
        g = self._coerce(other)
        if g is NotImplemented:
            return g
        return Add(self.mgr, self.mgr._mul(self.node, g))

    __rmul__ = __mul__

    def __neg__(self):
        return Add(self.mgr, self.mgr._scale(self.node, -1))

    def __eq__(self, other) -> bool:
        return isinstance(other, Add) and other.mgr is self.mgr and other.node == self.node

    def __hash__(self) -> int:
        return hash((id(self.mgr), self.node))

    def __repr__(self) -> str:
        return f"Add(node={self.node})"

    def sum(self, other) -> "Add":
        return self + other

    def product(self, other) -> "Add":
        return self * other

    def ite(self, then, else_) -> "Add":
        """``self * then + (1 - self) * else_``; ``self`` must be 0/1-valued."""
        bad = self.mgr.terminal_values(self.node) - {0, 1}
        if bad:
            raise ValueError(f"ITE condition has non-Boolean terminals {sorted(bad)}")
        g, h = self._coerce(then), self._coerce(else_)
        return Add(self.mgr, self.mgr._ite(self.node, g, h))

    def exists(self, *variables) -> "Add":
        """Additively quantify the given variables (``f|x=0 + f|x=1`` for each)."""
        return Add(self.mgr, self.mgr.exists(self.node, variables))

    def evaluate(self, assignment=()) -> int:
        return self.mgr.evaluate(self.node, assignment)

    def nonzero(self) -> "Add":
        """0/1 ADD (a BDD) that is 1 exactly where ``self`` is nonzero."""
        return Add(self.mgr, self.mgr._nonzero(self.node, {}))

    def node_count(self) -> tuple[int, int]:
        return self.mgr.node_count(self.node)

    def size(self) -> int:
        return len(self.mgr.reachable([self.node]))

    def support(self) -> set:
        vars_ = self.mgr.order.vars
        return {vars_[lv] for lv in self.mgr.support_levels(self.node)}

    def terminal_values(self) -> set[int]:
        return self.mgr.terminal_values(self.node)

    def is_constant(self) -> bool:
        return self.mgr.is_terminal(self.node)

    def value(self) -> int:
        return self.mgr.value(self.node)

    def to_dot(self, name: str = "add") -> str:
        return self.mgr.to_dot(self.node, name)
