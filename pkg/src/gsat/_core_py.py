"""Pure-Python tree core: node layout, ideal construction, descent loops.

This module is the fallback twin of ``_core.pyx``.  Both expose the same
names and must stay behaviourally identical (same slots, same rebuild
points, same statistics); ``tests/test_backends.py`` checks that.
"""
import gc
from bisect import bisect_left
from math import isqrt

DEG_SQRT = 0
DEG_CONST = 1
DEG_LOG = 2

KEY_MIN = -(1 << 63)
KEY_MAX = (1 << 63) - 1

BACKEND = "python"


def degree_of(kind, param, m):
    """Integer degree ``ceil(D(m))`` for ``m >= 1``, clamped to at least 1."""
    if kind == DEG_SQRT:
        d = isqrt(m - 1) + 1 if m > 0 else 1
    elif kind == DEG_CONST:
        d = param
    else:
        d = (m - 1).bit_length() if m > 1 else 1
    return d if d > 1 else 1


def index_length(m, alpha):
    """``ceil(m ** alpha)``, exact for the default alpha of one half."""
    if m <= 1:
        return 1
    if alpha == 0.5:
        return isqrt(m - 1) + 1
    n = int(m ** alpha)
    if n < m ** alpha:
        n += 1
    return n


def build_index(rep, lb, rb, length):
    """Slot hints for ``length`` equally spaced probes over ``[lb, rb)``."""
    span = rb - lb
    k = len(rep)
    out = [0] * length
    p = 0
    # probes increase with i, so one forward pointer replaces a bisect per probe
    for i in range(length):
        probe = lb + (i * span) // length
        while p < k and rep[p] < probe:
            p += 1
        out[i] = p
    return out


def interp_search(rep, index, lb, rb, key):
    """``bisect_left(rep, key)`` located from an index hint by exponential search."""
    k = len(rep)
    length = len(index)
    if key <= lb:
        j = 0
    elif key >= rb:
        j = length - 1
    else:
        j = ((key - lb) * length) // (rb - lb)
    h = index[j]
    if h < k and rep[h] < key:
        lo = h + 1
        step = 1
        hi = h + 1
        while hi < k and rep[hi] < key:
            lo = hi + 1
            step <<= 1
            hi = h + step
        if hi > k:
            hi = k
    else:
        hi = h
        step = 1
        lo = h - 1
        while lo >= 0 and rep[lo] >= key:
            hi = lo
            step <<= 1
            lo = h - step
        lo = lo + 1 if lo >= 0 else 0
    return bisect_left(rep, key, lo, hi)


class GsatNode:
    """One multiway node.

    ``children[i]`` owns the keys strictly between ``rep[i-1]`` and
    ``rep[i]``; the node itself owns ``[lb, rb)``.
    """

    __slots__ = ("rep", "values", "ac", "marked", "children", "m", "im", "c",
                 "n_live", "lb", "rb", "index", "agg")

    def __init__(self, rep, values, ac, marked, children, m, n_live, lb, rb):
        self.rep = rep
        self.values = values
        self.ac = ac
        self.marked = marked
        self.children = children
        self.m = m
        self.im = m
        self.c = 0
        self.n_live = n_live
        self.lb = lb
        self.rb = rb
        self.index = None
        self.agg = None

    def __repr__(self):
        return (f"GsatNode(rep={self.rep!r}, ac={self.ac!r}, m={self.m}, "
                f"c={self.c}, im={self.im})")


def search_slot(node, key):
    index = node.index
    if index is None:
        return bisect_left(node.rep, key)
    return interp_search(node.rep, index, node.lb, node.rb, key)


def new_leaf(key, value, lb, rb, alpha, use_index):
    node = GsatNode([key], [value], [1], [False], [None, None], 1, 1, lb, rb)
    if use_index:
        node.index = build_index(node.rep, lb, rb, 1)
    return node


def build_nodes(keys, values, ac, marked, lb, rb, kind, param, alpha, use_index):
    """Ideal tree over parallel record arrays (keys strictly increasing, ac >= 1)."""
    n = len(keys)
    if n == 0:
        return None
    pac = [0] * (n + 1)
    plive = [0] * (n + 1)
    s = 0
    live = 0
    for i in range(n):
        s += ac[i]
        pac[i + 1] = s
        if not marked[i]:
            live += 1
        plive[i + 1] = live
    ctx = (keys, values, ac, marked, pac, plive, kind, param, alpha, use_index)
    # a build allocates only fresh acyclic nodes; letting the collector run
    # mid-build rescans the whole live tree over and over
    paused = gc.isenabled()
    gc.disable()
    try:
        return _build(ctx, lb, rb, 0, n)
    finally:
        if paused:
            gc.enable()


def _build(ctx, lb, rb, lt, rt):
    if rt <= lt:
        return None
    keys, values, ac, marked, pac, plive, kind, param, alpha, use_index = ctx
    m = pac[rt] - pac[lt]
    d = degree_of(kind, param, m)
    theta = -(-m // (d + 1))
    rep = []
    vals = []
    acs = []
    marks = []
    children = []
    a = lb
    lo = lt
    for _ in range(d):
        # smallest prefix end reaching theta accesses; that element becomes a representative
        to = bisect_left(pac, pac[lo] + theta, lo + 1, rt)
        e = to - 1
        key = keys[e]
        children.append(_build(ctx, a, key, lo, e) if e > lo else None)
        rep.append(key)
        vals.append(values[e])
        acs.append(ac[e])
        marks.append(marked[e])
        a = key + 1
        lo = to
        if lo == rt:
            break
    children.append(_build(ctx, a, rb, lo, rt) if rt > lo else None)
    node = GsatNode(rep, vals, acs, marks, children, m, plive[rt] - plive[lt], lb, rb)
    if use_index:
        node.index = build_index(rep, lb, rb, index_length(m, alpha))
    return node


def flatten_into(node, include_marked, keys, values, ac, marked):
    """Append the subtree's records in key order to the four output lists."""
    if node is None:
        return
    children = node.children
    rep = node.rep
    k = len(rep)
    for i in range(k):
        flatten_into(children[i], include_marked, keys, values, ac, marked)
        if include_marked or not node.marked[i]:
            keys.append(rep[i])
            values.append(node.values[i])
            ac.append(node.ac[i])
            marked.append(node.marked[i])
    flatten_into(children[k], include_marked, keys, values, ac, marked)


class TreeCore:
    """Mutable root slot plus the get/insert/delete descent loops.

    ``weighted`` false gives the size-weighted baselines: every key keeps
    weight 1 and only inserts/deletes advance the rebuild counters.
    """

    def __init__(self, kind, param, alpha, use_index, weighted=True,
                 lazy_delete=False, lb=KEY_MIN, rb=KEY_MAX):
        self.root = None
        self.kind = kind
        self.param = param
        self.alpha = alpha
        self.use_index = use_index
        self.weighted = weighted
        self.lazy_delete = lazy_delete
        self.lb = lb
        self.rb = rb
        self.visited = 0
        self.rebuilds = 0
        self.rebuild_work = 0
        self.discarded = 0
        self.rebuild_hook = None

    def reset_stats(self):
        self.visited = 0
        self.rebuilds = 0
        self.rebuild_work = 0
        self.discarded = 0

    def build_from(self, keys, values, ac, marked):
        return build_nodes(keys, values, ac, marked, self.lb, self.rb, self.kind,
                           self.param, self.alpha, self.use_index)

    def rebuild_subtree(self, node):
        """Ideal rebuild of ``node``; returns ``(new_node, records_flattened)``."""
        keys = []
        values = []
        ac = []
        marked = []
        flatten_into(node, self.lazy_delete, keys, values, ac, marked)
        new = build_nodes(keys, values, ac, marked, node.lb, node.rb, self.kind,
                          self.param, self.alpha, self.use_index)
        return new, len(keys)

    def _rebuild_on_path(self, path, slots, depth):
        target = path[depth]
        new, work = self.rebuild_subtree(target)
        self.rebuilds += 1
        self.rebuild_work += work
        delta = target.m - (new.m if new is not None else 0)
        if delta:
            self.discarded += delta
            for i in range(depth):
                path[i].m -= delta
        if depth == 0:
            self.root = new
        else:
            path[depth - 1].children[slots[depth - 1]] = new
        if self.rebuild_hook is not None:
            self.rebuild_hook(depth, target, new)

    def _check(self, key):
        if not (self.lb <= key < self.rb):
            from .errors import ContractViolation
            raise ContractViolation(f"key {key} outside tree bounds [{self.lb}, {self.rb})")

    def get(self, key):
        """Value of an unmarked key, else ``None``; counts the access."""
        self._check(key)
        node = self.root
        path = []
        slots = []
        over = -1
        result = None
        weighted = self.weighted
        while node is not None:
            if weighted:
                node.c += 1
                if over < 0 and node.c * 4 > node.im:
                    over = len(path)
            path.append(node)
            i = search_slot(node, key)
            rep = node.rep
            if i < len(rep) and rep[i] == key:
                if not node.marked[i]:
                    result = node.values[i]
                if weighted:
                    node.ac[i] += 1
                    for p in path:
                        p.m += 1
                break
            slots.append(i)
            node = node.children[i]
        self.visited += len(path)
        if over >= 0:
            self._rebuild_on_path(path, slots, over)
        return result

    def insert(self, key, value):
        """Add ``key`` if absent (or revive a marked key); existing live values are kept."""
        self._check(key)
        node = self.root
        path = []
        slots = []
        over = -1
        weighted = self.weighted
        while node is not None:
            node.c += 1
            if over < 0 and node.c * 4 > node.im:
                over = len(path)
            path.append(node)
            i = search_slot(node, key)
            rep = node.rep
            if i < len(rep) and rep[i] == key:
                if node.marked[i]:
                    node.marked[i] = False
                    node.values[i] = value
                    for p in path:
                        p.n_live += 1
                if weighted:
                    node.ac[i] += 1
                    for p in path:
                        p.m += 1
                break
            slots.append(i)
            node = node.children[i]
        else:
            if path:
                parent = path[-1]
                j = slots[-1]
                prep = parent.rep
                lb = prep[j - 1] + 1 if j > 0 else parent.lb
                rb = prep[j] if j < len(prep) else parent.rb
                parent.children[j] = new_leaf(key, value, lb, rb, self.alpha, self.use_index)
                for p in path:
                    p.m += 1
                    p.n_live += 1
            else:
                self.root = new_leaf(key, value, self.lb, self.rb, self.alpha, self.use_index)
        self.visited += len(path)
        if over >= 0:
            self._rebuild_on_path(path, slots, over)

    def delete(self, key):
        """Tombstone ``key``; the record stays until its subtree is rebuilt."""
        self._check(key)
        node = self.root
        path = []
        slots = []
        over = -1
        weighted = self.weighted
        while node is not None:
            node.c += 1
            if over < 0 and node.c * 4 > node.im:
                over = len(path)
            path.append(node)
            i = search_slot(node, key)
            rep = node.rep
            if i < len(rep) and rep[i] == key:
                if not node.marked[i]:
                    node.marked[i] = True
                    for p in path:
                        p.n_live -= 1
                if weighted:
                    node.ac[i] += 1
                    for p in path:
                        p.m += 1
                break
            slots.append(i)
            node = node.children[i]
        self.visited += len(path)
        if over >= 0:
            self._rebuild_on_path(path, slots, over)
