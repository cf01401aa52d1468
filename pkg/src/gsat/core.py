"""Generic self-adjusting tree: ideal construction, point operations, rebuilds.

The node layout and the descent loops live in the backend module
(compiled or pure Python, see ``_backend``); this module adds validation,
record-level helpers and the instrumentation used by the tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Optional

from . import _backend
from . import _core_py as _py
from .errors import ContractViolation
from .policies import DegreePolicy, sait

KEY_MIN = _backend.core.KEY_MIN
KEY_MAX = _backend.core.KEY_MAX

STANDARD = "standard"
LAZY_DELETE = "lazy_delete"


@dataclass
class KeyRecord:
    key: int
    value: Any = None
    ac: int = 1
    marked: bool = False


def _unzip(records: Iterable[KeyRecord], lb: int, rb: int):
    keys, values, ac, marked = [], [], [], []
    prev = None
    for r in records:
        k = r.key
        if not (lb <= k < rb):
            raise ContractViolation(f"key {k} outside [{lb}, {rb})")
        if prev is not None and k <= prev:
            raise ContractViolation(f"keys must be strictly increasing ({prev} then {k})")
        if r.ac < 1:
            raise ContractViolation(f"access count of key {k} must be >= 1, got {r.ac}")
        keys.append(k)
        values.append(r.value)
        ac.append(r.ac)
        marked.append(bool(r.marked))
        prev = k
    return keys, values, ac, marked


def build_ideal(records: Iterable[KeyRecord], lb: int, rb: int, policy: DegreePolicy,
                backend: Optional[str] = None):
    """Ideal subtree over ``records`` spanning ``[lb, rb)``; ``None`` for no records."""
    if lb >= rb:
        raise ContractViolation(f"empty bounds [{lb}, {rb})")
    keys, values, ac, marked = _unzip(records, lb, rb)
    if not policy.weighted:
        ac = [1] * len(keys)
    core = _backend.load(backend) if backend else _backend.core
    return core.build_nodes(keys, values, ac, marked, lb, rb, policy.kind, policy.B,
                            policy.alpha, policy.use_index)


def flatten(node, include_marked: bool = False) -> list[KeyRecord]:
    keys, values, ac, marked = [], [], [], []
    _py.flatten_into(node, include_marked, keys, values, ac, marked)
    return [KeyRecord(k, v, a, bool(mk)) for k, v, a, mk in zip(keys, values, ac, marked)]


def rebuild(node, policy: DegreePolicy, mode: str = STANDARD):
    """Ideal rebuild of a subtree; standard mode drops tombstoned keys and their accesses."""
    if node is None:
        return None
    if mode not in (STANDARD, LAZY_DELETE):
        raise ContractViolation(f"unknown rebuild mode {mode!r}")
    records = flatten(node, include_marked=(mode == LAZY_DELETE))
    return build_ideal(records, node.lb, node.rb, policy)


def node_search(node, key: int, policy: Optional[DegreePolicy] = None) -> int:
    """Slot ``i`` with ``rep[i] == key``, or the child slot whose interval holds ``key``."""
    if not (node.lb <= key < node.rb):
        raise ContractViolation(f"key {key} outside node bounds [{node.lb}, {node.rb})")
    if policy is not None and policy.use_index and node.index is None:
        raise ContractViolation("interpolation policy on a node without a hint index")
    return _py.search_slot(node, key)


def iter_nodes(node, depth: int = 0) -> Iterator[tuple[Any, int]]:
    """Pre-order ``(node, depth)`` pairs, root at depth 0."""
    stack = [(node, depth)]
    while stack:
        n, d = stack.pop()
        if n is None:
            continue
        yield n, d
        for ch in reversed(n.children):
            if ch is not None:
                stack.append((ch, d + 1))


def _root_of(tree_or_node):
    return tree_or_node if hasattr(tree_or_node, "rep") else tree_or_node.root


def depth_of(tree, key: int) -> Optional[int]:
    """Depth (root = 0) of the node holding ``key``, marked or not; no side effects."""
    node = _root_of(tree)
    d = 0
    while node is not None:
        i = _py.search_slot(node, key)
        rep = node.rep
        if i < len(rep) and rep[i] == key:
            return d
        node = node.children[i]
        d += 1
    return None


def height(tree) -> int:
    """Largest node depth (root = 0); -1 for the empty tree."""
    return max((d for _, d in iter_nodes(_root_of(tree))), default=-1)


def check_ideal(tree, policy: DegreePolicy) -> bool:
    """Every child subtree carries at most ``m / (D(m) + 1)`` of its parent's accesses."""
    for node, _ in iter_nodes(_root_of(tree)):
        d = policy.degree(node.m)
        for ch in node.children:
            if ch is not None and ch.m * (d + 1) > node.m:
                return False
    return True


def audit(tree) -> list[str]:
    """Structural invariant violations (empty list when consistent)."""
    problems = []

    def walk(node, lb, rb):
        if node is None:
            return 0, 0
        rep = list(node.rep)
        k = len(rep)
        if k == 0:
            problems.append("node with no representatives")
        if any(rep[i] >= rep[i + 1] for i in range(k - 1)):
            problems.append(f"unsorted rep {rep}")
        if node.lb != lb or node.rb != rb:
            problems.append(f"bounds [{node.lb},{node.rb}) expected [{lb},{rb})")
        if rep and (rep[0] < lb or rep[-1] >= rb):
            problems.append(f"rep {rep} escapes [{lb},{rb})")
        if len(node.children) != k + 1:
            problems.append("children length mismatch")
        m = sum(node.ac)
        live = sum(1 for x in node.marked if not x)
        for i, ch in enumerate(node.children):
            clb = rep[i - 1] + 1 if i > 0 else lb
            crb = rep[i] if i < k else rb
            cm, cl = walk(ch, clb, crb)
            m += cm
            live += cl
        if m != node.m:
            problems.append(f"m={node.m} but subtree sums to {m} at rep {rep[:4]}")
        if live != node.n_live:
            problems.append(f"n_live={node.n_live} but counted {live}")
        if node.c < 0:
            problems.append("negative counter")
        return node.m, node.n_live

    root = _root_of(tree)
    if root is not None:
        walk(root, root.lb, root.rb)
    return problems


class GSATree:
    """Ordered integer map that reshapes itself around access frequencies.

    >>> t = GSATree(sait())
    >>> t.insert(7, 70); t.get(7)
    70
    """

    def __init__(self, policy: Optional[DegreePolicy] = None, lazy_delete: bool = False,
                 lb: int = KEY_MIN, rb: int = KEY_MAX, backend: Optional[str] = None):
        if lb >= rb:
            raise ContractViolation(f"empty bounds [{lb}, {rb})")
        self.policy = policy if policy is not None else sait()
        self.backend = backend or _backend.BACKEND
        mod = _backend.load(self.backend)
        p = self.policy
        self._core = mod.TreeCore(p.kind, p.B, p.alpha, p.use_index, p.weighted,
                                  lazy_delete, lb, rb)
        self.get = self._core.get
        self.insert = self._core.insert
        self.delete = self._core.delete

    @property
    def lazy_delete(self) -> bool:
        return self._core.lazy_delete

    @property
    def mode(self) -> str:
        return LAZY_DELETE if self._core.lazy_delete else STANDARD

    @property
    def root(self):
        return self._core.root

    @root.setter
    def root(self, node):
        self._core.root = node

    @property
    def lb(self) -> int:
        return self._core.lb

    @property
    def rb(self) -> int:
        return self._core.rb

    @property
    def m(self) -> int:
        return self.root.m if self.root is not None else 0

    @property
    def rebuild_hook(self):
        return self._core.rebuild_hook

    @rebuild_hook.setter
    def rebuild_hook(self, fn):
        """``fn(depth, old_node, new_node)`` runs after every counter-triggered rebuild."""
        self._core.rebuild_hook = fn

    def stats(self) -> dict:
        c = self._core
        return {"visited": c.visited, "rebuilds": c.rebuilds,
                "rebuild_work": c.rebuild_work, "discarded": c.discarded}

    def reset_stats(self) -> None:
        self._core.reset_stats()

    def __len__(self) -> int:
        return self.root.n_live if self.root is not None else 0

    def __contains__(self, key: int) -> bool:
        node = self.root
        while node is not None:
            i = _py.search_slot(node, key)
            rep = node.rep
            if i < len(rep) and rep[i] == key:
                return not node.marked[i]
            node = node.children[i]
        return False

    def bulk_load(self, keys: Iterable[int], values: Optional[Iterable[Any]] = None,
                  ac: Optional[Iterable[int]] = None) -> None:
        """Replace the contents with an ideal tree over sorted ``keys``."""
        keys = list(keys)
        values = list(values) if values is not None else list(keys)
        ac = list(ac) if ac is not None else [1] * len(keys)
        records = [KeyRecord(k, v, a) for k, v, a in zip(keys, values, ac)]
        self.root = build_ideal(records, self.lb, self.rb, self.policy, self.backend)

    def rebuild_all(self) -> None:
        """Rebuild the whole tree ideally (the state a root overflow would produce)."""
        if self.root is not None:
            self.root, _ = self._core.rebuild_subtree(self.root)

    def records(self, include_marked: bool = False) -> list[KeyRecord]:
        return flatten(self.root, include_marked)

    def items(self) -> list[tuple[int, Any]]:
        return [(r.key, r.value) for r in flatten(self.root)]

    def access_count(self, key: int) -> Optional[int]:
        node = self.root
        while node is not None:
            i = _py.search_slot(node, key)
            rep = node.rep
            if i < len(rep) and rep[i] == key:
                return node.ac[i]
            node = node.children[i]
        return None

    def depth_of(self, key: int) -> Optional[int]:
        return depth_of(self, key)

    def height(self) -> int:
        return height(self)

    def check_ideal(self) -> bool:
        return check_ideal(self, self.policy)

    def node_count(self) -> int:
        return sum(1 for _ in iter_nodes(self.root))

    def index_cells(self) -> int:
        return sum(len(n.index) for n, _ in iter_nodes(self.root) if n.index is not None)


def depth_bound(m: int, ac: int = 1) -> int:
    """``ceil(log_{4/3}(m / ac)) + 2``; the worst-case depth envelope between rebuilds."""
    if m <= ac:
        return 2
    return math.ceil(math.log(m / ac) / math.log(4 / 3)) + 2
