"""0-1 matrices: representation, text formats, matching feasibility, generators.

Rows, columns and column variables are numbered from 1 throughout the public
API (row ``i``, column ``j``, variable ``x_j``).  ``Matrix01.rows`` is the raw
0-indexed storage.
"""

from __future__ import annotations

import hashlib
import random
from collections import deque
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

from .errors import GenerationError, ParseError

__all__ = [
    "Matrix01",
    "GenParams",
    "parse_dense",
    "serialize_dense",
    "parse_matrix_market",
    "read_matrix",
    "bipartite_edges",
    "has_perfect_matching",
    "maximum_matching",
    "generate",
    "derive_seed",
    "primal_graph",
    "round_half_up",
]


@dataclass(frozen=True)
class Matrix01:
    """Square 0-1 matrix.  Immutable and hashable."""

    rows: tuple[tuple[int, ...], ...]
    source: str = field(default="", compare=False)

    def __post_init__(self):
        n = len(self.rows)
        if n < 1:
            raise ValueError("matrix dimension must be at least 1")
        for r, row in enumerate(self.rows, start=1):
            if len(row) != n:
                raise ValueError(f"row {r} has length {len(row)}, expected {n}")
            for v in row:
                if v != 0 and v != 1:
                    raise ValueError(f"row {r} contains non-binary entry {v!r}")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], source: str = "") -> "Matrix01":
        return cls(tuple(tuple(int(v) for v in row) for row in rows), source)

    @classmethod
    def identity(cls, n: int) -> "Matrix01":
        return cls.from_rows(([int(i == j) for j in range(n)] for i in range(n)), f"identity:{n}")

    @classmethod
    def ones(cls, n: int) -> "Matrix01":
        return cls.from_rows(([1] * n for _ in range(n)), f"ones:{n}")

    @classmethod
    def band(cls, n: int, width: int = 1) -> "Matrix01":
        """Band matrix with ones where ``|i - j| <= width`` (tridiagonal for 1)."""
        return cls.from_rows(
            ([int(abs(i - j) <= width) for j in range(n)] for i in range(n)),
            f"band:{n}:{width}",
        )

    @property
    def n(self) -> int:
        return len(self.rows)

    def entry(self, i: int, j: int) -> int:
        return self.rows[i - 1][j - 1]

    def row_support(self, i: int) -> tuple[int, ...]:
        """Columns ``j`` with ``a_ij = 1``, ascending."""
        return tuple(j for j, v in enumerate(self.rows[i - 1], start=1) if v)

    def col_support(self, j: int) -> tuple[int, ...]:
        return tuple(i for i, row in enumerate(self.rows, start=1) if row[j - 1])

    def ones_count(self) -> int:
        return sum(map(sum, self.rows))

    def density(self) -> float:
        return self.ones_count() / (self.n * self.n)

    def transpose(self) -> "Matrix01":
        return Matrix01(tuple(zip(*self.rows)), self.source)

    def permute_columns(self, perm: Sequence[int]) -> "Matrix01":
        """New matrix whose column ``k`` is old column ``perm[k-1]`` (1-based)."""
        if sorted(perm) != list(range(1, self.n + 1)):
            raise ValueError("not a permutation of the columns")
        return Matrix01(tuple(tuple(row[p - 1] for p in perm) for row in self.rows), self.source)

    def has_zero_line(self) -> bool:
        """True when some row or some column is entirely zero."""
        if any(not any(row) for row in self.rows):
            return True
        return any(not any(col) for col in zip(*self.rows))

    def __str__(self) -> str:
        return "\n".join("".join(map(str, row)) for row in self.rows)


def round_half_up(x) -> int:
    """Round half away from zero for nonnegative inputs; exact for decimal literals."""
    return int(Decimal(str(x)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


# ---------------------------------------------------------------------------
# Text formats


def parse_dense(text: str, source: str = "") -> Matrix01:
    """Parse the dense format: ``n`` on the first line, then ``n`` lines of 0/1 characters."""
    lines = [(no, ln.strip()) for no, ln in enumerate(text.splitlines(), start=1)]
    lines = [(no, ln) for no, ln in lines if ln]
    if not lines:
        raise ParseError("empty input")
    head_no, head = lines[0]
    try:
        n = int(head)
    except ValueError:
        raise ParseError(f"malformed dimension {head!r}", head_no, 1) from None
    if n < 1:
        raise ParseError(f"dimension must be positive, got {n}", head_no, 1)
    body = lines[1:]
    if len(body) != n:
        line = body[n][0] if len(body) > n else (body[-1][0] if body else head_no) + 1
        raise ParseError(f"expected {n} matrix rows, found {len(body)}", line)
    rows = []
    for no, ln in body:
        if len(ln) != n:
            raise ParseError(f"row has {len(ln)} entries, expected {n}", no, min(len(ln), n) + 1)
        row = []
        for col, ch in enumerate(ln, start=1):
            if ch == "0":
                row.append(0)
            elif ch == "1":
                row.append(1)
            else:
                raise ParseError(f"illegal character {ch!r}", no, col)
        rows.append(tuple(row))
    return Matrix01(tuple(rows), source)


def serialize_dense(m: Matrix01) -> str:
    return f"{m.n}\n{m}\n"


def parse_matrix_market(text: str, source: str = "") -> Matrix01:
    """Parse a Matrix Market ``coordinate pattern`` file (general or symmetric)."""
    lines = text.splitlines()
    if not lines or not lines[0].lower().startswith("%%matrixmarket"):
        raise ParseError("missing %%MatrixMarket banner", 1, 1)
    banner = lines[0].split()
    if len(banner) != 5:
        raise ParseError("malformed banner", 1)
    _, obj, fmt, fieldtype, symmetry = (t.lower() for t in banner)
    if obj != "matrix" or fmt != "coordinate":
        raise ParseError(f"unsupported object/format {obj} {fmt}", 1)
    if fieldtype != "pattern":
        raise ParseError(f"unsupported field type {fieldtype!r}; only 'pattern' is accepted", 1)
    if symmetry not in ("general", "symmetric"):
        raise ParseError(f"unsupported symmetry {symmetry!r}", 1)

    it = ((no, ln.strip()) for no, ln in enumerate(lines[1:], start=2))
    size = None
    for no, ln in it:
        if not ln or ln.startswith("%"):
            continue
        size = (no, ln.split())
        break
    if size is None:
        raise ParseError("missing size line")
    no, toks = size
    if len(toks) != 3:
        raise ParseError("size line must hold rows, cols, nnz", no)
    try:
        nrows, ncols, nnz = map(int, toks)
    except ValueError:
        raise ParseError("non-integer size line", no) from None
    if nrows != ncols:
        raise ParseError(f"matrix is not square ({nrows}x{ncols})", no)
    if nrows < 1:
        raise ParseError("dimension must be positive", no)
    n = nrows
    grid = [[0] * n for _ in range(n)]
    seen = 0
    for no, ln in it:
        if not ln or ln.startswith("%"):
            continue
        toks = ln.split()
        if len(toks) != 2:
            raise ParseError("pattern entries carry exactly two indices", no)
        try:
            i, j = int(toks[0]), int(toks[1])
        except ValueError:
            raise ParseError("non-integer index", no) from None
        if not (1 <= i <= n and 1 <= j <= n):
            raise ParseError(f"index ({i}, {j}) out of range 1..{n}", no)
        grid[i - 1][j - 1] = 1
        if symmetry == "symmetric":
            grid[j - 1][i - 1] = 1
        seen += 1
    if seen != nnz:
        raise ParseError(f"declared {nnz} entries, found {seen}")
    return Matrix01(tuple(map(tuple, grid)), source)


def read_matrix(path, fmt: str | None = None) -> Matrix01:
    """Read a matrix file; ``fmt`` is ``dense``, ``mm`` or None to sniff."""
    with open(path, encoding="ascii") as fh:
        text = fh.read()
    if fmt is None:
        fmt = "mm" if text.lstrip().startswith("%%") else "dense"
    if fmt == "mm":
        return parse_matrix_market(text, str(path))
    if fmt == "dense":
        return parse_dense(text, str(path))
    raise ValueError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# Bipartite view and matching


def bipartite_edges(m: Matrix01) -> set[tuple[int, int]]:
    """Edge set of G_A: ``(i, j)`` for each ``a_ij = 1`` (row vertex i, column vertex j)."""
    return {(i, j) for i in range(1, m.n + 1) for j in m.row_support(i)}


def maximum_matching(m: Matrix01) -> dict[int, int]:
    """Hopcroft-Karp maximum matching of G_A, returned as ``{row: column}``."""
    n = m.n
    adj = [m.row_support(i) for i in range(1, n + 1)]
    adj.insert(0, ())
    free = 0
    pair_u = [free] * (n + 1)
    pair_v = [free] * (n + 1)
    dist = [0] * (n + 1)
    inf = n + 2

    def bfs() -> bool:
        queue = deque()
        for u in range(1, n + 1):
            if pair_u[u] == free:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = inf
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = pair_v[v]
                if w == free:
                    found = True
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(u: int) -> bool:
        for v in adj[u]:
            w = pair_v[v]
            if w == free or (dist[w] == dist[u] + 1 and dfs(w)):
                pair_u[u] = v
                pair_v[v] = u
                return True
        dist[u] = inf
        return False

    while bfs():
        for u in range(1, n + 1):
            if pair_u[u] == free:
                dfs(u)
    return {u: pair_u[u] for u in range(1, n + 1) if pair_u[u] != free}


def has_perfect_matching(m: Matrix01) -> bool:
    if m.has_zero_line():
        return False
    return len(maximum_matching(m)) == m.n


# ---------------------------------------------------------------------------
# Generators

FAMILIES = ("dense", "sparse", "similar")


@dataclass(frozen=True)
class GenParams:
    family: str
    n: int
    flip_factor: float
    row_density: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.flip_factor < 0:
            raise ValueError("flip factor must be nonnegative")
        rho = self.row_density
        if rho is None:
            if self.family == "similar":
                raise ValueError("family 'similar' requires a row density")
            object.__setattr__(self, "row_density", 1.0 if self.family == "dense" else 0.0)
            rho = self.row_density
        if self.family == "dense" and rho != 1:
            raise ValueError("dense family requires row density 1")
        if self.family == "sparse" and rho != 0:
            raise ValueError("sparse family requires row density 0")
        if self.family == "similar" and not 0 < rho < 1:
            raise ValueError("similar family requires 0 < row density < 1")
        if self.flips > self.n * self.n:
            raise ValueError(f"cannot flip {self.flips} cells of a {self.n}x{self.n} matrix")

    @property
    def flips(self) -> int:
        return round_half_up(Decimal(str(self.flip_factor)) * self.n)

    @property
    def row_ones(self) -> int:
        return round_half_up(Decimal(str(self.row_density)) * self.n)

    def describe(self) -> str:
        return f"{self.family}:n={self.n}:cf={self.flip_factor}:rho={self.row_density}:seed={self.seed}"


def _attempt_rng(seed: int, attempt: int) -> random.Random:
    return random.Random(f"permdd-gen:{seed}:{attempt}")


def _sample_matrix(p: GenParams, rng: random.Random) -> Matrix01:
    n = p.n
    first = [0] * n
    for j in rng.sample(range(n), p.row_ones):
        first[j] = 1
    grid = [list(first) for _ in range(n)]
    for cell in rng.sample(range(n * n), p.flips):
        i, j = divmod(cell, n)
        grid[i][j] ^= 1
    return Matrix01(tuple(map(tuple, grid)), p.describe())


def generate(p: GenParams, max_attempts: int = 1000) -> Matrix01:
    """Sample a matrix of the requested family that has a perfect matching.

    Infeasible samples are rejected and redrawn from the next RNG stream.
    """
    for attempt in range(max_attempts):
        m = _sample_matrix(p, _attempt_rng(p.seed, attempt))
        if has_perfect_matching(m):
            return m
    raise GenerationError(f"no feasible matrix after {max_attempts} attempts for {p.describe()}")


def derive_seed(base: int, family: str, n: int, cf, rho, index: int) -> int:
    """Stable 64-bit per-instance seed."""
    key = f"{base}|{family}|{n}|{cf}|{rho}|{index}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


# ---------------------------------------------------------------------------
# Primal graph


def primal_graph(m: Matrix01) -> dict[int, set[int]]:
    """Column co-occurrence graph: ``j -- k`` iff some row has ones in both."""
    g = {j: set() for j in range(1, m.n + 1)}
    for i in range(1, m.n + 1):
        sup = m.row_support(i)
        for a in sup:
            g[a].update(sup)
    for j in g:
        g[j].discard(j)
    return g
