"""Benchmark harness: (tree x workload) matrices, reports and trend rules.

Throughput is wall-clock and hardware-bound.  ``nodes_per_op`` (search nodes
visited plus records moved by rebuilds, per operation) is deterministic for a
fixed config and seed and is the figure the trend rules are meant to use.
"""
from __future__ import annotations

import csv
import io
import operator
import os
import re
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

from .baselines import BTree, SplayTree
from .core import GSATree
from .errors import ConfigurationError, ContractViolation, ResourceError
from .policies import POLICY_NAMES, get_policy
from .workloads import (DELETE, GET, INSERT, MIXED, READ_ONLY, WorkloadSpec, generate,
                        parse_distribution)

TREE_NAMES = POLICY_NAMES + ("btree", "splay")
CSV_COLUMNS = ("tree", "workload", "mix", "keys", "ops_per_sec", "relative",
               "depth_mean", "nodes_per_op", "rebuilds")

# rough per-key footprint of the heaviest structure, used for the memory guard
_BYTES_PER_KEY = 400


class TreeAdapter:
    """Uniform get/insert/delete plus counters over every benchmarked structure."""

    def __init__(self, name: str, lazy_delete: bool = False, backend: Optional[str] = None):
        self.name = name
        if name == "btree":
            self.tree = BTree(8)
        elif name == "splay":
            self.tree = SplayTree()
        elif name in POLICY_NAMES:
            self.tree = GSATree(get_policy(name), lazy_delete=lazy_delete, backend=backend)
        else:
            raise ConfigurationError(f"unknown tree {name!r}; choose from {', '.join(TREE_NAMES)}")
        self.gsat = isinstance(self.tree, GSATree)
        self._base = (0, 0, 0)

    def populate(self, n: int) -> None:
        """Load keys ``0..n-1`` (value = key), each with access count 1."""
        if self.gsat:
            self.tree.bulk_load(range(n))
        else:
            self.tree.bulk_load(range(n), range(n))
        self.reset_counters()

    def _raw(self):
        if self.gsat:
            s = self.tree.stats()
            return s["visited"], s["rebuilds"], s["rebuild_work"]
        return self.tree.visited, 0, 0

    def reset_counters(self) -> None:
        self._base = self._raw()

    def counters(self) -> tuple[int, int, int]:
        """``(visited, rebuilds, rebuild_work)`` since the last reset."""
        return tuple(a - b for a, b in zip(self._raw(), self._base))

    def run(self, ops: Sequence[int], keys: Sequence[int]) -> None:
        t = self.tree
        get, insert, delete = t.get, t.insert, t.delete
        if not any(o != GET for o in ops):
            for k in keys:
                get(k)
            return
        for o, k in zip(ops, keys):
            if o == GET:
                get(k)
            elif o == INSERT:
                insert(k, k)
            else:
                delete(k)


@dataclass
class BenchConfig:
    trees: list[str]
    workloads: list[str]
    keys: int = 100_000
    ops: int = 1_000_000
    duration: Optional[float] = None
    reps: int = 5
    seed: int = 0
    mix: str = READ_ONLY
    lazy_delete: bool = False
    baseline: str = "splay"
    warmup: Optional[int] = None     # default 10 * keys
    out: Optional[str] = None
    format: str = "csv"
    backend: Optional[str] = None

    def __post_init__(self):
        self.mix = self.mix.replace("-", "_")
        if self.reps < 1:
            raise ContractViolation("reps must be >= 1")
        if self.keys < 1:
            raise ContractViolation("keys must be >= 1")
        if self.ops < 1:
            raise ContractViolation("ops must be >= 1")
        if self.duration is not None and self.duration <= 0:
            raise ContractViolation("duration must be positive")
        if self.format not in ("csv", "markdown"):
            raise ConfigurationError(f"unknown format {self.format!r}")
        if self.mix not in (READ_ONLY, MIXED):
            raise ConfigurationError(f"unknown mix {self.mix!r}")
        if not self.trees or not self.workloads:
            raise ConfigurationError("need at least one tree and one workload")
        for name in list(self.trees) + [self.baseline]:
            if name not in TREE_NAMES:
                raise ConfigurationError(f"unknown tree {name!r}; choose from {', '.join(TREE_NAMES)}")
        for w in self.workloads:
            self.spec(w)

    @property
    def warmup_ops(self) -> int:
        return 10 * self.keys if self.warmup is None else self.warmup

    @property
    def mix_label(self) -> str:
        base = "read-only" if self.mix == READ_ONLY else "mixed"
        return base + "-lazy" if self.lazy_delete else base

    def spec(self, workload: str, op_count: Optional[int] = None) -> WorkloadSpec:
        return WorkloadSpec(self.keys, mix=self.mix, op_count=self.ops if op_count is None else op_count,
                            delete_mode="lazy_delete" if self.lazy_delete else "standard",
                            seed=self.seed, **parse_distribution(workload))


@dataclass
class BenchResult:
    tree: str
    workload: str
    mix: str
    keys: int
    ops_per_sec: float
    relative: float = float("nan")
    depth_mean: float = 0.0
    nodes_per_op: float = 0.0
    rebuilds: int = 0
    ops: int = 0
    samples: list = field(default_factory=list)

    def row(self) -> dict:
        return {"tree": self.tree, "workload": self.workload, "mix": self.mix, "keys": self.keys,
                "ops_per_sec": f"{self.ops_per_sec:.1f}", "relative": f"{self.relative:.4f}",
                "depth_mean": f"{self.depth_mean:.4f}", "nodes_per_op": f"{self.nodes_per_op:.4f}",
                "rebuilds": self.rebuilds}


def check_memory(keys: int) -> None:
    need = keys * _BYTES_PER_KEY
    try:
        avail = os.sysconf("SC_AVPHYS_PAGES") * os.sysconf("SC_PAGE_SIZE")
    except (ValueError, OSError, AttributeError):
        return
    if need > avail:
        raise ResourceError(f"{keys} keys need about {need >> 20} MiB but only "
                            f"{avail >> 20} MiB of memory is free; lower --keys")


def run_cell(cfg: BenchConfig, tree: str, workload: str,
             clock: Callable[[], float] = time.perf_counter) -> BenchResult:
    measured = generate(cfg.spec(workload))
    warm = generate(cfg.spec(workload, cfg.warmup_ops), stream=1)
    m_ops, m_keys = measured.ops.tolist(), measured.keys.tolist()
    w_ops, w_keys = warm.ops.tolist(), warm.keys.tolist()
    samples = []
    stats = None
    for _ in range(cfg.reps):
        t = TreeAdapter(tree, cfg.lazy_delete, cfg.backend)
        t.populate(cfg.keys)
        t.run(w_ops, w_keys)
        t.reset_counters()
        done = 0
        start = clock()
        if cfg.duration is None:
            t.run(m_ops, m_keys)
            done = len(m_ops)
        else:
            # cycle the measured stream in chunks until the time budget is spent
            chunk = 4096
            pos = 0
            while clock() - start < cfg.duration:
                end = min(pos + chunk, len(m_ops))
                t.run(m_ops[pos:end], m_keys[pos:end])
                done += end - pos
                pos = end % len(m_ops)
        elapsed = max(clock() - start, 1e-9)
        samples.append(done / elapsed)
        if stats is None:
            visited, rebuilds, work = t.counters()
            stats = (visited / done, (visited + work) / done, rebuilds, done)
    depth_mean, nodes_per_op, rebuilds, done = stats
    return BenchResult(tree, cfg.spec(workload).label, cfg.mix_label, cfg.keys,
                       sum(samples) / len(samples), depth_mean=depth_mean,
                       nodes_per_op=nodes_per_op, rebuilds=rebuilds, ops=done, samples=samples)


def run_matrix(cfg: BenchConfig, progress: Optional[Callable[[BenchResult], None]] = None
               ) -> list[BenchResult]:
    """Run every (workload, tree) cell; the baseline tree is added when missing."""
    check_memory(cfg.keys)
    trees = list(dict.fromkeys(cfg.trees))
    if cfg.baseline not in trees:
        trees.append(cfg.baseline)
    results = []
    for w in cfg.workloads:
        row = []
        for name in trees:
            r = run_cell(cfg, name, w)
            row.append(r)
            if progress is not None:
                progress(r)
        base = next(r for r in row if r.tree == cfg.baseline)
        for r in row:
            r.relative = r.ops_per_sec / base.ops_per_sec
        results.extend(row)
    return results


def emit_report(results: Iterable[BenchResult], fmt: str = "csv",
                path: Optional[str] = None) -> str:
    results = list(results)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in results:
            w.writerow(r.row())
        text = buf.getvalue()
    elif fmt == "markdown":
        text = _markdown(results)
    else:
        raise ConfigurationError(f"unknown format {fmt!r}")
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def _markdown(results: list[BenchResult]) -> str:
    # summary grid: trees down, workloads across, throughput with relative factor
    cols = list(dict.fromkeys((r.workload, r.mix) for r in results))
    trees = list(dict.fromkeys(r.tree for r in results))
    cell = {(r.tree, r.workload, r.mix): r for r in results}
    head = ["tree"] + [f"{w} {m}" for w, m in cols]
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    for t in trees:
        parts = [t]
        for w, m in cols:
            r = cell.get((t, w, m))
            parts.append("" if r is None else f"{r.ops_per_sec:,.0f} (x{r.relative:.2f})")
        lines.append("| " + " | ".join(parts) + " |")
    lines += ["", "| " + " | ".join(CSV_COLUMNS) + " |", "|" + "---|" * len(CSV_COLUMNS)]
    for r in results:
        lines.append("| " + " | ".join(str(v) for v in r.row().values()) + " |")
    return "\n".join(lines) + "\n"


_OPS = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}
_TERM = r"(\w+)\(\s*([\w.+-]+)\s*,\s*([\w./:-]+)\s*(?:,\s*([\w-]+)\s*)?\)"
_RULE = re.compile(rf"^\s*{_TERM}\s*(<=|>=|<|>)\s*{_TERM}\s*$")
_METRICS = ("ops_per_sec", "relative", "depth_mean", "nodes_per_op", "rebuilds")


@dataclass
class TrendOutcome:
    rule: str
    passed: bool
    lhs: float
    rhs: float


def _lookup(results, metric, tree, workload, mix):
    if metric not in _METRICS:
        raise ConfigurationError(f"unknown metric {metric!r}")
    hits = [r for r in results if r.tree == tree and r.workload == workload
            and (mix is None or r.mix == mix)]
    if len(hits) != 1:
        raise ConfigurationError(f"rule term {metric}({tree}, {workload}, {mix}) matches "
                                 f"{len(hits)} cells")
    return float(getattr(hits[0], metric))


def verify_trends(results: Sequence[BenchResult], rules: Iterable[str]) -> list[TrendOutcome]:
    """Evaluate rules such as ``nodes_per_op(sait, 99/01, read-only) < nodes_per_op(ist-baseline, 99/01, read-only)``.

    The mix argument may be omitted when the workload label alone picks one cell.
    """
    out = []
    for rule in rules:
        mo = _RULE.match(rule)
        if not mo:
            raise ConfigurationError(f"cannot parse trend rule {rule!r}")
        m1, t1, w1, x1, op, m2, t2, w2, x2 = mo.groups()
        lhs = _lookup(results, m1, t1, w1, x1)
        rhs = _lookup(results, m2, t2, w2, x2)
        out.append(TrendOutcome(rule.strip(), _OPS[op](lhs, rhs), lhs, rhs))
    return out


def with_overrides(cfg: BenchConfig, **kw) -> BenchConfig:
    return replace(cfg, **kw)
