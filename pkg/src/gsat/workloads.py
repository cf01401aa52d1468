"""Seeded operation streams: uniform, x/y hot-set and zipf key distributions.

Keys are the integers ``0..n-1``.  A seeded permutation of that range decides
which keys are hot (x/y) or which key holds each zipf rank, so popular keys
are scattered over the key space rather than clustered.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Iterator, Optional

import numpy as np

from .errors import ConfigurationError, ContractViolation

GET, INSERT, DELETE = 0, 1, 2
OP_NAMES = ("get", "insert", "delete")

READ_ONLY = "read_only"
MIXED = "mixed"


@dataclass(frozen=True)
class WorkloadSpec:
    universe_size: int
    distribution: str = "uniform"      # uniform | xy | zipf
    x_pct: float = 0.0
    y_pct: float = 0.0
    zipf_s: float = 1.0
    mix: str = READ_ONLY
    insert_pct: float = 10.0
    delete_pct: float = 10.0
    get_pct: float = 80.0
    delete_mode: str = "standard"      # standard | lazy_delete
    op_count: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        validate(self)

    @property
    def label(self) -> str:
        """Short name used in report rows (``uniform``, ``99/01``, ``zipf-1``)."""
        if self.distribution == "xy":
            return f"{_pct(self.x_pct):0>2}/{_pct(self.y_pct):0>2}"
        if self.distribution == "zipf":
            return f"zipf-{_pct(self.zipf_s)}"
        return "uniform"

    def hot_size(self) -> int:
        return int(self.y_pct * self.universe_size // 100)


def _pct(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else str(v)


def validate(spec: WorkloadSpec) -> None:
    if spec.universe_size < 1:
        raise ContractViolation("universe_size must be >= 1")
    if spec.op_count < 0:
        raise ContractViolation("op_count must be >= 0")
    if spec.distribution not in ("uniform", "xy", "zipf"):
        raise ContractViolation(f"unknown distribution {spec.distribution!r}")
    if spec.distribution == "xy":
        if not (0 <= spec.x_pct <= 100):
            raise ContractViolation("x_pct must lie in [0, 100]")
        if not (0 < spec.y_pct <= 100):
            raise ContractViolation("y_pct must lie in (0, 100]")
        if spec.y_pct == 100 and spec.x_pct < 100:
            raise ContractViolation("y_pct = 100 leaves no cold keys for the remaining draws")
        hot = spec.hot_size()
        if spec.x_pct > 0 and hot == 0:
            raise ContractViolation("hot set is empty for this universe size")
        if spec.x_pct < 100 and hot == spec.universe_size:
            raise ContractViolation("cold set is empty for this universe size")
    if spec.distribution == "zipf" and not spec.zipf_s > 0:
        raise ContractViolation("zipf exponent must be > 0")
    if spec.mix not in (READ_ONLY, MIXED):
        raise ContractViolation(f"unknown mix {spec.mix!r}")
    if spec.mix == MIXED:
        parts = (spec.insert_pct, spec.delete_pct, spec.get_pct)
        if min(parts) < 0 or abs(sum(parts) - 100) > 1e-9:
            raise ContractViolation("mix percentages must be non-negative and sum to 100")
    if spec.delete_mode not in ("standard", "lazy_delete"):
        raise ContractViolation(f"unknown delete mode {spec.delete_mode!r}")


_XY = re.compile(r"^xy:(\d+(?:\.\d+)?)/(\d+(?:\.\d+)?)$")
_ZIPF = re.compile(r"^zipf:(\d+(?:\.\d+)?)$")


def parse_distribution(text: str) -> dict:
    """Parse ``uniform | xy:X/Y | zipf:S`` into WorkloadSpec keyword arguments."""
    t = text.strip().lower()
    if t == "uniform":
        return {"distribution": "uniform"}
    mo = _XY.match(t)
    if mo:
        return {"distribution": "xy", "x_pct": float(mo.group(1)), "y_pct": float(mo.group(2))}
    mo = _ZIPF.match(t)
    if mo:
        return {"distribution": "zipf", "zipf_s": float(mo.group(1))}
    raise ConfigurationError(f"bad workload {text!r}; expected uniform, xy:X/Y or zipf:S")


@dataclass
class OpStream:
    """Parallel arrays of operation codes and keys."""
    ops: np.ndarray
    keys: np.ndarray

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self) -> Iterator[tuple[str, int]]:
        for o, k in zip(self.ops.tolist(), self.keys.tolist()):
            yield OP_NAMES[o], k

    def tobytes(self) -> bytes:
        return self.ops.tobytes() + self.keys.tobytes()


def key_permutation(spec: WorkloadSpec) -> np.ndarray:
    """Seeded permutation of ``0..n-1``; position ``r`` holds the rank-``r`` key."""
    return np.random.default_rng(spec.seed).permutation(spec.universe_size).astype(np.int64)


def zipf_cdf(n: int, s: float) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1, dtype=np.float64) ** s
    cdf = np.cumsum(w)
    cdf /= cdf[-1]
    cdf[-1] = 1.0
    return cdf


def draw_keys(spec: WorkloadSpec, count: int, rng: np.random.Generator,
              perm: Optional[np.ndarray] = None) -> np.ndarray:
    n = spec.universe_size
    if perm is None:
        perm = key_permutation(spec)
    if spec.distribution == "uniform":
        return rng.integers(0, n, size=count, dtype=np.int64)
    if spec.distribution == "xy":
        h = spec.hot_size()
        hot = rng.random(count) * 100 < spec.x_pct
        pos = np.empty(count, dtype=np.int64)
        nh = int(hot.sum())
        if nh:
            pos[hot] = rng.integers(0, h, size=nh)
        if count - nh:
            pos[~hot] = rng.integers(h, n, size=count - nh)
        return perm[pos]
    cdf = zipf_cdf(n, spec.zipf_s)
    ranks = np.searchsorted(cdf, rng.random(count), side="right")
    np.minimum(ranks, n - 1, out=ranks)
    return perm[ranks]


def draw_ops(spec: WorkloadSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    if spec.mix == READ_ONLY:
        return np.zeros(count, dtype=np.uint8)
    u = rng.random(count) * 100
    ops = np.full(count, GET, dtype=np.uint8)
    ops[u < spec.insert_pct] = INSERT
    ops[(u >= spec.insert_pct) & (u < spec.insert_pct + spec.delete_pct)] = DELETE
    return ops


def generate(spec: WorkloadSpec, stream: int = 0) -> OpStream:
    """Deterministic op stream.

    ``stream`` picks an independent sequence over the same key ranking, which
    the benchmark uses to separate warmup from the measured run.
    """
    perm = key_permutation(spec)
    rng = np.random.default_rng([spec.seed, stream])
    ops = draw_ops(spec, spec.op_count, rng)
    keys = draw_keys(spec, spec.op_count, rng, perm)
    return OpStream(ops, keys)


def hot_set(spec: WorkloadSpec) -> np.ndarray:
    """The x/y hot keys (empty for other distributions)."""
    if spec.distribution != "xy":
        return np.empty(0, dtype=np.int64)
    return key_permutation(spec)[: spec.hot_size()]


def smoothness_note(spec: WorkloadSpec) -> bool:
    """Whether the key density is bounded above and below on its support.

    Every distribution here lives on a finite universe and puts a fixed
    positive mass on each key of its support, so this is a report annotation
    rather than a runtime check.
    """
    if spec.distribution == "xy":
        return 0 < spec.y_pct < 100
    return True


def with_ops(spec: WorkloadSpec, op_count: int) -> WorkloadSpec:
    return replace(spec, op_count=op_count)
