"""Benchmark harness: run permanent configurations over instance files, emit CSV."""

from __future__ import annotations

import csv
import re
import statistics
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .errors import NodeBudgetExceeded, Timeout
from .matrix import GenParams, Matrix01, derive_seed, generate, read_matrix, serialize_dense
from .permanent import PermConfig, perm

__all__ = [
    "BenchRecord",
    "CSV_FIELDS",
    "RunSpec",
    "instance_filename",
    "parse_instance_name",
    "write_instances",
    "run_one",
    "run_bench",
    "summarize",
    "spearman",
]

# CSV column name -> BenchRecord attribute
CSV_FIELDS = {
    "instanceId": "instance_id",
    "family": "family",
    "n": "n",
    "C_f": "cf",
    "rho": "rho",
    "seed": "seed",
    "algorithm": "algorithm",
    "heuristic": "heuristic",
    "value": "value",
    "wallTimeMillis": "wall_time_ms",
    "peakAddNodes": "peak_add_nodes",
    "totalAddNodesCreated": "total_add_nodes_created",
    "outcome": "outcome",
}

OUTCOMES = ("ok", "timeout", "node-budget", "error")


@dataclass
class BenchRecord:
    instance_id: str
    family: str
    n: int
    cf: str
    rho: str
    seed: str
    algorithm: str
    heuristic: str
    value: str
    wall_time_ms: float
    peak_add_nodes: int
    total_add_nodes_created: int
    outcome: str

    def as_row(self) -> dict:
        d = asdict(self)
        d["wall_time_ms"] = f"{self.wall_time_ms:.3f}"
        return {col: d[attr] for col, attr in CSV_FIELDS.items()}

    @classmethod
    def from_row(cls, row: dict) -> "BenchRecord":
        kw = {attr: row[col] for col, attr in CSV_FIELDS.items()}
        kw["n"] = int(kw["n"])
        kw["wall_time_ms"] = float(kw["wall_time_ms"])
        kw["peak_add_nodes"] = int(kw["peak_add_nodes"])
        kw["total_add_nodes_created"] = int(kw["total_add_nodes_created"])
        return cls(**kw)


@dataclass(frozen=True)
class RunSpec:
    """One algorithm configuration, written ``ALGO[:HEURISTIC[:ORDER]]`` on the command line."""

    algorithm: str
    heuristic: str | None = None
    order: str | None = None

    @classmethod
    def parse(cls, text: str) -> "RunSpec":
        parts = text.split(":")
        if len(parts) > 3:
            raise ValueError(f"bad config {text!r}")
        parts += [None] * (3 - len(parts))
        spec = cls(*(p or None for p in parts))
        PermConfig(algorithm=spec.algorithm, heuristic=spec.heuristic, order=spec.order)
        return spec

    def label(self) -> str:
        return self.heuristic or ("auto" if self.algorithm == "early" else "-")

    def config(self, timeout: float | None, node_budget: int | None) -> PermConfig:
        return PermConfig(algorithm=self.algorithm, heuristic=self.heuristic, order=self.order,
                          timeout=timeout, node_budget=node_budget, brute_limit=64, gray_limit=64)


# ---------------------------------------------------------------------------
# Instance files

_NAME_RE = re.compile(
    r"^(?P<family>[a-z]+)_n(?P<n>\d+)_cf(?P<cf>[0-9.]+)_rho(?P<rho>[0-9.]+)_i(?P<index>\d+)_s(?P<seed>\d+)\.txt$"
)


def instance_filename(p: GenParams, index: int) -> str:
    return f"{p.family}_n{p.n}_cf{p.flip_factor:g}_rho{p.row_density:g}_i{index:03d}_s{p.seed}.txt"


def parse_instance_name(name: str) -> dict:
    mt = _NAME_RE.match(Path(name).name)
    if not mt:
        return {"family": "unknown", "n": None, "cf": "", "rho": "", "seed": ""}
    d = mt.groupdict()
    d["n"] = int(d["n"])
    return d


def write_instances(out_dir, family: str, n: int, cf: float, rho: float | None,
                    count: int, seed: int, max_attempts: int = 1000) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for index in range(count):
        probe = GenParams(family, n, cf, rho, 0)
        s = derive_seed(seed, family, n, cf, probe.row_density, index)
        p = GenParams(family, n, cf, probe.row_density, s)
        m = generate(p, max_attempts)
        path = out / instance_filename(p, index)
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(serialize_dense(m))
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# Running


def _record(path: Path, n: int, spec: RunSpec, outcome: str, value="", wall=0.0, peak=0, total=0):
    meta = parse_instance_name(path.name)
    return BenchRecord(
        instance_id=path.stem, family=meta["family"], n=n, cf=meta["cf"], rho=meta["rho"],
        seed=meta["seed"], algorithm=spec.algorithm, heuristic=spec.label(), value=str(value),
        wall_time_ms=wall, peak_add_nodes=peak, total_add_nodes_created=total, outcome=outcome,
    )


def run_one(path, spec: RunSpec, timeout: float | None = 1800.0,
            node_budget: int | None = None, matrix: Matrix01 | None = None) -> BenchRecord:
    """Run one configuration on one instance; failures become records, never exceptions."""
    path = Path(path)
    try:
        m = matrix or read_matrix(path)
    except Exception:
        return _record(path, parse_instance_name(path.name)["n"] or 0, spec, "error")
    cfg = spec.config(timeout, node_budget)
    t0 = time.monotonic()
    try:
        res = perm(m, cfg)
    except Timeout:
        return _record(path, m.n, spec, "timeout", wall=(time.monotonic() - t0) * 1000)
    except NodeBudgetExceeded:
        return _record(path, m.n, spec, "node-budget", wall=(time.monotonic() - t0) * 1000)
    except Exception:
        return _record(path, m.n, spec, "error", wall=(time.monotonic() - t0) * 1000)
    wall = (time.monotonic() - t0) * 1000
    return _record(path, m.n, spec, "ok", res.value, wall, res.peak_add_nodes,
                   res.total_add_nodes_created)


def run_bench(paths: Iterable, specs: Sequence[RunSpec], sink: TextIO | None = None,
              timeout: float | None = 1800.0, node_budget: int | None = None,
              jobs: int = 1, extrapolate_timeouts: bool = False) -> list[BenchRecord]:
    """Run every spec on every instance, streaming CSV rows to ``sink``.

    Instances are processed by increasing size.  With ``extrapolate_timeouts``
    a (family, C_f, rho, config) group whose every instance timed out at some
    size is recorded as timeout for all larger sizes without running.
    """
    items = []
    for p in paths:
        p = Path(p)
        meta = parse_instance_name(p.name)
        n = meta["n"]
        if n is None:
            try:
                n = read_matrix(p).n
            except Exception:
                n = 0
        items.append((n, p, meta))
    items.sort(key=lambda t: (t[0], t[1].name))

    lock = threading.Lock()
    writer = None
    if sink is not None:
        writer = csv.DictWriter(sink, fieldnames=list(CSV_FIELDS), lineterminator="\n")
        writer.writeheader()

    records: list[BenchRecord] = []
    dead: set = set()

    def emit(rec: BenchRecord):
        with lock:
            records.append(rec)
            if writer is not None:
                writer.writerow(rec.as_row())
                sink.flush()

    sizes = sorted({n for n, _, _ in items})
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        for size in sizes:
            batch = [(p, meta) for n, p, meta in items if n == size]
            futures = []
            for spec in specs:
                for p, meta in batch:
                    group = (meta["family"], meta["cf"], meta["rho"], spec)
                    if group in dead:
                        emit(_record(p, size, spec, "timeout"))
                    else:
                        futures.append((group, pool.submit(run_one, p, spec, timeout, node_budget)))
            outcomes: dict = {}
            for group, fut in futures:
                rec = fut.result()
                emit(rec)
                outcomes.setdefault(group, []).append(rec.outcome)
            if extrapolate_timeouts:
                for group, outs in outcomes.items():
                    if group[0] != "unknown" and all(o == "timeout" for o in outs):
                        dead.add(group)
    return records


# ---------------------------------------------------------------------------
# Analysis


def summarize(records: Iterable[BenchRecord]) -> list[dict]:
    """Median wall time over ok rows per (family, n, C_f, rho, algorithm, heuristic)."""
    groups: dict = {}
    for r in records:
        key = (r.family, r.n, r.cf, r.rho, r.algorithm, r.heuristic)
        groups.setdefault(key, []).append(r)
    out = []
    for key in sorted(groups, key=lambda k: tuple(str(x) for x in k)):
        rs = groups[key]
        ok = [r.wall_time_ms for r in rs if r.outcome == "ok"]
        out.append({
            "family": key[0], "n": key[1], "C_f": key[2], "rho": key[3],
            "algorithm": key[4], "heuristic": key[5],
            "instances": len(rs), "ok": len(ok),
            "timeouts": sum(r.outcome == "timeout" for r in rs),
            "medianWallTimeMillis": f"{statistics.median(ok):.3f}" if ok else "",
        })
    return out


def write_summary(rows: list[dict], sink: TextIO) -> None:
    if not rows:
        return
    w = csv.DictWriter(sink, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


def _ranks(xs: Sequence[float]) -> list[float]:
    order = sorted(range(len(xs)), key=lambda k: xs[k])
    ranks = [0.0] * len(xs)
    k = 0
    while k < len(order):
        e = k
        while e + 1 < len(order) and xs[order[e + 1]] == xs[order[k]]:
            e += 1
        avg = (k + e) / 2 + 1
        for t in range(k, e + 1):
            ranks[order[t]] = avg
        k = e + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman rank correlation (Pearson on average ranks)."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("need two equally long samples of length >= 2")
    return statistics.correlation(_ranks(xs), _ranks(ys))
