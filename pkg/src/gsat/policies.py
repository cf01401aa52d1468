"""Degree functions and in-node search strategies for the tree variants.

Four self-adjusting parameterizations share one core:

* ``sait``  -- degree ``ceil(sqrt(m))`` with an interpolation hint array per node,
* ``sabt``  -- constant degree ``B`` (16 by default),
* ``salt``  -- degree ``ceil(log2 m)``,
* ``sa2t``  -- ``sabt`` with ``B = 2``.

``size_weighted_adapter`` turns any of them into a classic structure whose
shape depends on key counts only (the IST and lazy B-Tree baselines).
"""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, replace

from ._backend import core
from .errors import ConfigurationError, ContractViolation

DEG_SQRT = core.DEG_SQRT
DEG_CONST = core.DEG_CONST
DEG_LOG = core.DEG_LOG


@dataclass(frozen=True)
class PolicyParams:
    B: int = 16
    alpha: float = 0.5

    def __post_init__(self):
        if self.B < 2:
            raise ContractViolation(f"B must be >= 2, got {self.B}")
        if not 0.5 <= self.alpha < 1:
            raise ContractViolation(f"alpha must lie in [0.5, 1), got {self.alpha}")


@dataclass(frozen=True)
class DegreePolicy:
    """A degree function ``D(m)`` paired with an in-node search strategy."""

    name: str
    kind: int
    B: int = 16
    alpha: float = 0.5
    node_search: str = "binary"
    weighted: bool = True

    @property
    def use_index(self) -> bool:
        return self.node_search == "interpolation"

    def degree(self, m: int) -> int:
        return core.degree_of(self.kind, self.B, m)


def degree_sait(m: int) -> int:
    return core.degree_of(DEG_SQRT, 0, m)


def degree_sabt(m: int, B: int = 16) -> int:
    return core.degree_of(DEG_CONST, B, m)


def degree_salt(m: int) -> int:
    return core.degree_of(DEG_LOG, 0, m)


def degree_sa2t(m: int) -> int:
    return core.degree_of(DEG_CONST, 2, m)


def sait(alpha: float = 0.5) -> DegreePolicy:
    PolicyParams(alpha=alpha)
    return DegreePolicy("sait", DEG_SQRT, alpha=alpha, node_search="interpolation")


def sabt(B: int = 16) -> DegreePolicy:
    PolicyParams(B=B)
    return DegreePolicy("sabt", DEG_CONST, B=B)


def salt() -> DegreePolicy:
    return DegreePolicy("salt", DEG_LOG)


def sa2t() -> DegreePolicy:
    return DegreePolicy("sa2t", DEG_CONST, B=2)


def size_weighted_adapter(policy: DegreePolicy) -> DegreePolicy:
    """Same degree/search pair, but every key weighs 1 and reads never rebuild."""
    names = {"sait": "ist-baseline", "sabt": "lazy-btree-baseline"}
    return replace(policy, name=names.get(policy.name, policy.name + "-size"), weighted=False)


def get_policy(name: str, alpha: float = 0.5, B: int | None = None) -> DegreePolicy:
    """Resolve a policy by its harness name."""
    if name == "sait":
        return sait(alpha)
    if name == "sabt":
        return sabt(16 if B is None else B)
    if name == "salt":
        return salt()
    if name == "sa2t":
        return sa2t()
    if name == "ist-baseline":
        return size_weighted_adapter(sait(alpha))
    if name == "lazy-btree-baseline":
        return size_weighted_adapter(sabt(16 if B is None else B))
    raise ConfigurationError(f"unknown policy {name!r}")


POLICY_NAMES = ("sait", "sabt", "salt", "sa2t", "ist-baseline", "lazy-btree-baseline")


@dataclass
class InterpolationIndex:
    """Per-node hint table: ``id[j]`` is the slot of probe key ``lb + j*(rb-lb)//len``."""

    id: list
    lb: int
    rb: int
    alpha: float

    def __len__(self):
        return len(self.id)


def sait_build_index(node, alpha: float = 0.5) -> InterpolationIndex:
    if node.lb >= node.rb:
        raise ContractViolation(f"empty node bounds [{node.lb}, {node.rb})")
    length = core.index_length(max(node.m, 1), alpha)
    return InterpolationIndex(core.build_index(list(node.rep), node.lb, node.rb, length),
                              node.lb, node.rb, alpha)


def sait_search(node, index: InterpolationIndex, key: int) -> int:
    """Slot of ``key`` in ``node`` found from the hint table, then exponential + binary search."""
    if not (index.lb <= key < index.rb):
        raise ContractViolation(f"key {key} outside node bounds [{index.lb}, {index.rb})")
    return core.interp_search(list(node.rep), index.id, index.lb, index.rb, key)


def binary_slot(rep, key: int) -> int:
    return bisect_left(rep, key)
