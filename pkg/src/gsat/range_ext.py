"""Range queries over the self-adjusting tree.

Every node carries bookkeeping over its ``2k+1`` interleaved positions
``[T_0, rep_0, T_1, rep_1, ..., rep_{k-1}, T_k]`` (child ``i`` at ``2i``,
representative ``i`` at ``2i+1``).  Each position holds an access total, a
live-key count and an aggregate of live values; range updates and range
access increments are stored as lazy tags.  A tag that reaches a child
position is that child's pending work, pushed into the child the next time
the child is descended into or rebuilt.

Two interchangeable bookkeeping classes exist: ``SegmentAggregates``
(logarithmic per range call) and ``FlatAggregates`` (linear scan, used for
small constant-degree nodes).
"""
from __future__ import annotations

import math
import operator
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Any, Callable, Optional

from . import _backend
from . import _core_py as _py
from .core import KEY_MAX, KEY_MIN, iter_nodes
from .errors import ConfigurationError, ContractViolation
from .policies import DEG_CONST, DegreePolicy, sait


@dataclass(frozen=True)
class RangeAlgebra:
    """Value monoid ``(combine, identity)`` acted on by an update monoid.

    ``apply(u, v, k)`` maps the aggregate ``v`` of ``k`` live values to the
    aggregate after every value received ``u``; ``compose(u1, u2)`` is
    "``u2`` first, then ``u1``".
    """

    name: str
    combine: Callable[[Any, Any], Any]
    identity: Any
    apply: Callable[[Any, Any, int], Any]
    compose: Callable[[Any, Any], Any]
    update_identity: Any
    make_update: Callable[[Any], Any]

    def fold(self, values):
        acc = self.identity
        for v in values:
            acc = self.combine(acc, v)
        return acc


def _assign_apply(u, v, k):
    return v if u is None else u * k


def _assign_compose(u1, u2):
    return u2 if u1 is None else u1


SUM_ADD = RangeAlgebra("sum-add", operator.add, 0, lambda u, v, k: v + u * k,
                       operator.add, 0, lambda c: c)
SUM_ASSIGN = RangeAlgebra("sum-assign", operator.add, 0, _assign_apply, _assign_compose,
                          None, lambda c: c)
MIN = RangeAlgebra("min", min, math.inf, lambda u, v, k: v, lambda u1, u2: None,
                   None, lambda c: None)

ALGEBRAS = {a.name: a for a in (SUM_ADD, SUM_ASSIGN, MIN)}


def get_algebra(name: str) -> RangeAlgebra:
    try:
        return ALGEBRAS[name]
    except KeyError:
        raise ConfigurationError(f"unknown algebra {name!r}; choose from {sorted(ALGEBRAS)}") from None


class SegmentAggregates:
    """Lazy segment tree over node positions: access sums, live counts, value aggregates."""

    __slots__ = ("alg", "n", "sm", "sl", "sf", "tc", "tu")

    def __init__(self, alg: RangeAlgebra, items):
        self.alg = alg
        n = len(items)
        self.n = n
        size = 4 * n
        self.sm = [0] * size
        self.sl = [0] * size
        self.sf = [alg.identity] * size
        self.tc = [0] * size
        self.tu = [alg.update_identity] * size
        self._build(1, 0, n - 1, items)

    def _build(self, x, lo, hi, items):
        if lo == hi:
            self.sm[x], self.sl[x], self.sf[x] = items[lo]
            return
        mid = (lo + hi) >> 1
        self._build(2 * x, lo, mid, items)
        self._build(2 * x + 1, mid + 1, hi, items)
        self._pull(x)

    def _pull(self, x):
        l, r = 2 * x, 2 * x + 1
        self.sm[x] = self.sm[l] + self.sm[r]
        self.sl[x] = self.sl[l] + self.sl[r]
        self.sf[x] = self.alg.combine(self.sf[l], self.sf[r])

    def _put(self, x, cnt, upd):
        if cnt:
            self.sm[x] += cnt * self.sl[x]
            self.tc[x] += cnt
        alg = self.alg
        if upd != alg.update_identity:
            self.sf[x] = alg.apply(upd, self.sf[x], self.sl[x])
            self.tu[x] = alg.compose(upd, self.tu[x])

    def _push(self, x):
        cnt = self.tc[x]
        upd = self.tu[x]
        uid = self.alg.update_identity
        if cnt or upd != uid:
            self._put(2 * x, cnt, upd)
            self._put(2 * x + 1, cnt, upd)
            self.tc[x] = 0
            self.tu[x] = uid

    def total(self):
        return self.sm[1], self.sl[1], self.sf[1]

    def query(self, lo, hi):
        """``(access_sum, live_count, aggregate)`` over positions ``lo..hi``."""
        acc = [0, 0, self.alg.identity]
        self._query(1, 0, self.n - 1, lo, hi, acc)
        return acc[0], acc[1], acc[2]

    def _query(self, x, l, r, lo, hi, acc):
        if hi < l or r < lo:
            return
        if lo <= l and r <= hi:
            acc[0] += self.sm[x]
            acc[1] += self.sl[x]
            acc[2] = self.alg.combine(acc[2], self.sf[x])
            return
        self._push(x)
        mid = (l + r) >> 1
        self._query(2 * x, l, mid, lo, hi, acc)
        self._query(2 * x + 1, mid + 1, r, lo, hi, acc)

    def apply(self, lo, hi, cnt, upd):
        """Add ``cnt`` accesses per live key and apply ``upd`` to every live value in ``lo..hi``."""
        if lo > hi:
            return
        self._apply(1, 0, self.n - 1, lo, hi, cnt, upd)

    def _apply(self, x, l, r, lo, hi, cnt, upd):
        if hi < l or r < lo:
            return
        if lo <= l and r <= hi:
            self._put(x, cnt, upd)
            return
        self._push(x)
        mid = (l + r) >> 1
        self._apply(2 * x, l, mid, lo, hi, cnt, upd)
        self._apply(2 * x + 1, mid + 1, r, lo, hi, cnt, upd)
        self._pull(x)

    def _leaf(self, pos):
        x, l, r = 1, 0, self.n - 1
        path = []
        while l != r:
            self._push(x)
            path.append(x)
            mid = (l + r) >> 1
            if pos <= mid:
                x, r = 2 * x, mid
            else:
                x, l = 2 * x + 1, mid + 1
        return x, path

    def get(self, pos):
        x, _ = self._leaf(pos)
        return self.sm[x], self.sl[x], self.sf[x]

    def take_pending(self, pos):
        """Pending ``(count, update)`` parked at ``pos``; clears it."""
        x, _ = self._leaf(pos)
        cnt, upd = self.tc[x], self.tu[x]
        self.tc[x] = 0
        self.tu[x] = self.alg.update_identity
        return cnt, upd

    def set(self, pos, m, live, f):
        x, path = self._leaf(pos)
        self.sm[x], self.sl[x], self.sf[x] = m, live, f
        for y in reversed(path):
            self._pull(y)

    def cells(self):
        return 5 * len(self.sm)


class FlatAggregates:
    """Constant-degree bookkeeping: plain arrays, per-position pending tags, linear scans."""

    __slots__ = ("alg", "n", "sm", "sl", "sf", "tc", "tu")

    def __init__(self, alg: RangeAlgebra, items):
        self.alg = alg
        self.n = len(items)
        self.sm = [it[0] for it in items]
        self.sl = [it[1] for it in items]
        self.sf = [it[2] for it in items]
        self.tc = [0] * self.n
        self.tu = [alg.update_identity] * self.n

    def total(self):
        return self.query(0, self.n - 1)

    def query(self, lo, hi):
        alg = self.alg
        f = alg.identity
        for p in range(lo, hi + 1):
            f = alg.combine(f, self.sf[p])
        return sum(self.sm[lo:hi + 1]), sum(self.sl[lo:hi + 1]), f

    def apply(self, lo, hi, cnt, upd):
        alg = self.alg
        touch = upd != alg.update_identity
        for p in range(lo, hi + 1):
            if cnt:
                self.sm[p] += cnt * self.sl[p]
                self.tc[p] += cnt
            if touch:
                self.sf[p] = alg.apply(upd, self.sf[p], self.sl[p])
                self.tu[p] = alg.compose(upd, self.tu[p])

    def get(self, pos):
        return self.sm[pos], self.sl[pos], self.sf[pos]

    def take_pending(self, pos):
        cnt, upd = self.tc[pos], self.tu[pos]
        self.tc[pos] = 0
        self.tu[pos] = self.alg.update_identity
        return cnt, upd

    def set(self, pos, m, live, f):
        self.sm[pos], self.sl[pos], self.sf[pos] = m, live, f

    def cells(self):
        return 5 * self.n


class RangeGSATree:
    """Self-adjusting tree with ``range_get``/``range_calculate``/``range_update``.

    Every key a range operation touches gains one access, so keys that are
    queried together drift toward the root together.
    """

    def __init__(self, policy: Optional[DegreePolicy] = None,
                 algebra: RangeAlgebra | str = SUM_ADD, lazy_delete: bool = False,
                 fast_path: Optional[bool] = None, lb: int = KEY_MIN, rb: int = KEY_MAX,
                 backend: Optional[str] = None):
        self.policy = policy if policy is not None else sait()
        if not self.policy.weighted:
            raise ContractViolation("range queries need an access-weighted policy")
        if lb >= rb:
            raise ContractViolation(f"empty bounds [{lb}, {rb})")
        self.alg = get_algebra(algebra) if isinstance(algebra, str) else algebra
        self.lazy_delete = lazy_delete
        if fast_path is None:
            fast_path = self.policy.kind == DEG_CONST and self.policy.B <= 32
        self.fast_path = fast_path
        self._agg_cls = FlatAggregates if fast_path else SegmentAggregates
        self.lb = lb
        self.rb = rb
        self.backend = backend or _backend.BACKEND
        self._core = _backend.load(self.backend)
        self.root = None
        self.visited = 0
        self.rebuilds = 0
        self.discarded = 0
        self.last_touched = 0
        self.rebuild_hook = None

    # -- bookkeeping ---------------------------------------------------

    def _child_item(self, child):
        if child is None:
            return 0, 0, self.alg.identity
        return child.agg.total()

    def _attach(self, node):
        """Fresh bookkeeping for a subtree whose lists hold materialized state."""
        if node is None:
            return
        alg = self.alg
        items = []
        for i, ch in enumerate(node.children):
            self._attach(ch)
            items.append(self._child_item(ch))
            if i < len(node.rep):
                live = not node.marked[i]
                items.append((node.ac[i], 1 if live else 0,
                              node.values[i] if live else alg.identity))
        node.agg = self._agg_cls(alg, items)

    def _flush(self, node, i):
        """Push the pending tag parked at child slot ``i`` into that child."""
        cnt, upd = node.agg.take_pending(2 * i)
        child = node.children[i]
        if child is None:
            return None
        if cnt or upd != self.alg.update_identity:
            agg = child.agg
            agg.apply(0, agg.n - 1, cnt, upd)
            child.m += cnt * child.n_live
        return child

    def _refresh(self, node):
        m, live, _ = node.agg.total()
        node.m = m
        node.n_live = live

    def _set_child(self, parent, i, child):
        parent.agg.set(2 * i, *self._child_item(child))

    def _materialize(self, node):
        """Flush every pending tag below ``node`` into the plain per-node lists."""
        if node is None:
            return
        agg = node.agg
        for i in range(len(node.children)):
            self._materialize(self._flush(node, i))
            if i < len(node.rep):
                m, live, f = agg.get(2 * i + 1)
                node.ac[i] = m
                if live:
                    node.values[i] = f

    def _rep_state(self, node, i):
        m, live, f = node.agg.get(2 * i + 1)
        return m, live, (f if live else node.values[i])

    # -- construction and rebuild ----------------------------------------

    def _build(self, keys, values, ac, marked, lb, rb):
        p = self.policy
        node = self._core.build_nodes(keys, values, ac, marked, lb, rb, p.kind, p.B,
                                      p.alpha, p.use_index)
        self._attach(node)
        return node

    def bulk_load(self, keys, values=None, ac=None):
        keys = list(keys)
        if any(keys[i] >= keys[i + 1] for i in range(len(keys) - 1)):
            raise ContractViolation("keys must be strictly increasing")
        if keys and not (self.lb <= keys[0] and keys[-1] < self.rb):
            raise ContractViolation("keys outside tree bounds")
        values = list(values) if values is not None else list(keys)
        ac = list(ac) if ac is not None else [1] * len(keys)
        self.root = self._build(keys, values, ac, [False] * len(keys), self.lb, self.rb)

    def rebuild_with_ranges(self, node):
        """Materialize pending work under ``node`` and rebuild it ideally with fresh bookkeeping."""
        self._materialize(node)
        keys, values, ac, marked = [], [], [], []
        _py.flatten_into(node, self.lazy_delete, keys, values, ac, marked)
        return self._build(keys, values, ac, marked, node.lb, node.rb)

    def _rebuild_chain(self, chain, slots, depth):
        """Rebuild ``chain[depth]``; ``chain`` is the root-first ancestor list, ``slots`` its child slots."""
        target = chain[depth]
        new = self.rebuild_with_ranges(target)
        self.rebuilds += 1
        if depth == 0:
            self.root = new
        else:
            parent = chain[depth - 1]
            parent.children[slots[depth - 1]] = new
            self._set_child(parent, slots[depth - 1], new)
            for d in range(depth - 1, -1, -1):
                self._refresh(chain[d])
                if d:
                    self._set_child(chain[d - 1], slots[d - 1], chain[d])
        self.discarded += target.m - (new.m if new is not None else 0)
        if self.rebuild_hook is not None:
            self.rebuild_hook(depth, target, new)

    # -- point operations ------------------------------------------------

    def _check(self, key):
        if not (self.lb <= key < self.rb):
            raise ContractViolation(f"key {key} outside tree bounds [{self.lb}, {self.rb})")

    def _point(self, key, kind, value=None):
        self._check(key)
        search = self._core.search_slot
        node = self.root
        path, slots = [], []
        over = -1
        result = None
        hit = -1
        while node is not None:
            node.c += 1
            if over < 0 and node.c * 4 > node.im:
                over = len(path)
            path.append(node)
            i = search(node, key)
            rep = node.rep
            if i < len(rep) and rep[i] == key:
                hit = i
                break
            slots.append(i)
            node = self._flush(node, i)
        self.visited += len(path)
        if hit >= 0:
            node = path[-1]
            m, live, val = self._rep_state(node, hit)
            if kind == "get":
                result = val if live else None
            elif kind == "insert" and not live:
                node.marked[hit] = False
                node.values[hit] = value
                live, val = 1, value
            elif kind == "delete" and live:
                node.marked[hit] = True
                node.values[hit] = val
                live = 0
            node.agg.set(2 * hit + 1, m + 1, live, val if live else self.alg.identity)
        elif kind == "insert":
            if path:
                parent = path[-1]
                j = slots[-1]
                prep = parent.rep
                lb = prep[j - 1] + 1 if j > 0 else parent.lb
                rb = prep[j] if j < len(prep) else parent.rb
                leaf = self._build([key], [value], [1], [False], lb, rb)
                parent.children[j] = leaf
                self._set_child(parent, j, leaf)
            else:
                self.root = self._build([key], [value], [1], [False], self.lb, self.rb)
        for d in range(len(path) - 1, -1, -1):
            self._refresh(path[d])
            if d:
                self._set_child(path[d - 1], slots[d - 1], path[d])
        if over >= 0:
            self._rebuild_chain(path, slots, over)
        return result

    def get(self, key):
        return self._point(key, "get")

    def insert(self, key, value):
        self._point(key, "insert", value)

    def delete(self, key):
        self._point(key, "delete")

    # -- range operations ----------------------------------------------

    def _range(self, node, a, b, op, upd, out, trav, parent_idx, slot, depth):
        """Process ``[a, b]`` inside ``node``; returns the aggregate of live values in range.

        Positions wholly inside the range are handled through the node's
        bookkeeping; only a child that the range cuts is descended into, so
        at most the two boundary search paths are traversed.
        """
        alg = self.alg
        search = self._core.search_slot
        node.c += 1
        me = len(trav)
        trav.append((node, parent_idx, slot, depth))
        rep = node.rep
        k = len(rep)
        i = search(node, a)
        p = search(node, b)
        j = p + 1 if p < k and rep[p] == b else p
        lo, hi = 2 * i + 1, 2 * j - 1
        left = right = -1
        if i == j:
            clb = rep[i - 1] + 1 if i > 0 else node.lb
            crb = rep[i] if i < k else node.rb
            if a <= clb and b >= crb - 1:
                lo = hi = 2 * i
            else:
                left = i
        else:
            if rep[i] > a:
                if a <= (rep[i - 1] + 1 if i > 0 else node.lb):
                    lo = 2 * i
                else:
                    left = i
            if rep[j - 1] < b:
                if b >= (rep[j] if j < k else node.rb) - 1:
                    hi = 2 * j
                else:
                    right = j
        res = alg.identity
        if left >= 0:
            child = self._flush(node, left)
            if child is not None:
                res = self._range(child, a, b, op, upd, out, trav, me, left, depth + 1)
                self._set_child(node, left, child)
        if lo <= hi:
            agg = node.agg
            if op == "get":
                for pos in range(lo, hi + 1):
                    if pos & 1:
                        if agg.get(pos)[1]:
                            out.append(rep[pos >> 1])
                    else:
                        self._collect(self._flush(node, pos >> 1), out)
            _, live, f = agg.query(lo, hi)
            self.last_touched += live
            res = alg.combine(res, f)
            agg.apply(lo, hi, 1, upd)
        if right >= 0:
            child = self._flush(node, right)
            if child is not None:
                res = alg.combine(res, self._range(child, a, b, op, upd, out, trav, me, right,
                                                   depth + 1))
                self._set_child(node, right, child)
        self._refresh(node)
        return res

    def _collect(self, node, out):
        if node is None:
            return
        for i in range(len(node.children)):
            self._collect(self._flush(node, i), out)
            if i < len(node.rep) and node.agg.get(2 * i + 1)[1]:
                out.append(node.rep[i])

    def collect_nonmarked(self, node):
        """In-order live keys under ``node`` (pending work below it is flushed on the way)."""
        out = []
        self._collect(node, out)
        return out

    def _run_range(self, a, b, op, upd):
        if a > b:
            raise ContractViolation(f"empty range: a={a} > b={b}")
        self.last_touched = 0
        out = []
        a = max(a, self.lb)
        b = min(b, self.rb - 1)
        if self.root is None or a > b:
            return out, self.alg.identity
        trav = []
        res = self._range(self.root, a, b, op, upd, out, trav, -1, -1, 0)
        self.visited += len(trav)
        if op == "get":
            self.last_touched = len(out)
        over = None
        for idx, (node, _, _, depth) in enumerate(trav):
            if node.c * 4 > node.im and (over is None or depth < trav[over][3]):
                over = idx
        if over is not None:
            chain, slots = [], []
            idx = over
            while idx >= 0:
                node, parent_idx, slot, _ = trav[idx]
                chain.append(node)
                slots.append(slot)
                idx = parent_idx
            chain.reverse()
            slots = slots[::-1][1:]
            self._rebuild_chain(chain, slots, len(chain) - 1)
        return out, res

    def range_get(self, a: int, b: int) -> list:
        """Live keys in ``[a, b]`` in order; each gains one access."""
        out, _ = self._run_range(a, b, "get", self.alg.update_identity)
        return out

    def range_calculate(self, a: int, b: int):
        """Combine the values of live keys in ``[a, b]`` (identity when none)."""
        _, res = self._run_range(a, b, "calc", self.alg.update_identity)
        return res

    def range_update(self, a: int, b: int, c) -> None:
        """Apply the update ``c`` to every live value in ``[a, b]``."""
        self._run_range(a, b, "update", self.alg.make_update(c))

    # -- inspection ----------------------------------------------------

    def stats(self) -> dict:
        return {"visited": self.visited, "rebuilds": self.rebuilds,
                "discarded": self.discarded, "last_touched": self.last_touched}

    @property
    def m(self) -> int:
        return self.root.m if self.root is not None else 0

    def __len__(self) -> int:
        return self.root.n_live if self.root is not None else 0

    def flush_all(self) -> None:
        self._materialize(self.root)

    def records(self, include_marked: bool = False):
        """Materialized ``(key, value, ac, marked)`` tuples in key order."""
        self._materialize(self.root)
        keys, values, ac, marked = [], [], [], []
        _py.flatten_into(self.root, include_marked, keys, values, ac, marked)
        return list(zip(keys, values, ac, marked))

    def depth_of(self, key: int) -> Optional[int]:
        node, d = self.root, 0
        while node is not None:
            i = _py.search_slot(node, key)
            if i < len(node.rep) and node.rep[i] == key:
                return d
            node = node.children[i]
            d += 1
        return None

    def search_path_len(self, key: int) -> int:
        node, d = self.root, 0
        while node is not None:
            d += 1
            i = _py.search_slot(node, key)
            if i < len(node.rep) and node.rep[i] == key:
                break
            node = node.children[i]
        return d

    def aggregate_cells(self) -> list[tuple[int, int]]:
        """``(positions, cells)`` for every node's bookkeeping."""
        return [(n.agg.n, n.agg.cells()) for n, _ in iter_nodes(self.root)]
