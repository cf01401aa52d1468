# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tree core; mirrors ``_core_py`` name for name."""
import gc

from libc.stdlib cimport malloc, free
from cpython.list cimport PyList_GET_ITEM, PyList_GET_SIZE

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"

DEG_SQRT = 0
DEG_CONST = 1
DEG_LOG = 2

KEY_MIN = -(1 << 63)
KEY_MAX = (1 << 63) - 1

BACKEND = "compiled"


cdef inline long long _isqrt_ceil(long long m):
    # ceil(sqrt(m)) for m >= 1
    cdef long long r
    if m <= 1:
        return 1
    r = <long long>((<double>(m - 1)) ** 0.5)
    while r * r > m - 1:
        r -= 1
    while (r + 1) * (r + 1) <= m - 1:
        r += 1
    return r + 1


cdef inline long long _bitlen(unsigned long long x):
    cdef long long n = 0
    while x:
        x >>= 1
        n += 1
    return n


cdef inline long long _degree(int kind, long long param, long long m):
    cdef long long d
    if kind == 0:
        d = _isqrt_ceil(m) if m > 0 else 1
    elif kind == 1:
        d = param
    else:
        d = _bitlen(<unsigned long long>(m - 1)) if m > 1 else 1
    return d if d > 1 else 1


def degree_of(int kind, long long param, long long m):
    return _degree(kind, param, m)


def index_length(m, alpha):
    if m <= 1:
        return 1
    if alpha == 0.5:
        return _isqrt_ceil(m)
    n = int(m ** alpha)
    if n < m ** alpha:
        n += 1
    return n


cdef inline Py_ssize_t _bisect(list rep, long long key, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if <long long>(<object>PyList_GET_ITEM(rep, mid)) < key:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline Py_ssize_t _hint_slot(long long key, long long lb, long long rb, Py_ssize_t length):
    if key <= lb:
        return 0
    if key >= rb:
        return length - 1
    cdef u128 num = (<u128>(<unsigned long long>(key - lb))) * (<u128>length)
    cdef u128 span = <u128>(<unsigned long long>(rb - lb))
    cdef Py_ssize_t j = <Py_ssize_t>(num // span)
    if j >= length:
        j = length - 1
    return j


cdef list _index(list r, long long lb, long long rb, Py_ssize_t length):
    # probes increase with i, so one forward pointer replaces a bisect per probe
    cdef list out = [0] * length
    cdef Py_ssize_t i, p = 0, k = PyList_GET_SIZE(r)
    cdef unsigned long long span = <unsigned long long>(rb - lb)
    cdef long long probe
    for i in range(length):
        probe = lb + <long long>(((<u128>i) * span) // (<u128>length))
        while p < k and <long long>(<object>PyList_GET_ITEM(r, p)) < probe:
            p += 1
        out[i] = p
    return out


def build_index(rep, long long lb, long long rb, Py_ssize_t length):
    return _index(list(rep), lb, rb, length)


cdef inline Py_ssize_t _interp(list rep, list index, long long lb, long long rb, long long key):
    cdef Py_ssize_t k = PyList_GET_SIZE(rep)
    cdef Py_ssize_t length = PyList_GET_SIZE(index)
    cdef Py_ssize_t j = _hint_slot(key, lb, rb, length)
    cdef Py_ssize_t h = <Py_ssize_t>(<object>PyList_GET_ITEM(index, j))
    cdef Py_ssize_t lo, hi, step = 1
    if h < k and <long long>(<object>PyList_GET_ITEM(rep, h)) < key:
        lo = h + 1
        hi = h + 1
        while hi < k and <long long>(<object>PyList_GET_ITEM(rep, hi)) < key:
            lo = hi + 1
            step <<= 1
            hi = h + step
        if hi > k:
            hi = k
    else:
        hi = h
        lo = h - 1
        while lo >= 0 and <long long>(<object>PyList_GET_ITEM(rep, lo)) >= key:
            hi = lo
            step <<= 1
            lo = h - step
        lo = lo + 1 if lo >= 0 else 0
    return _bisect(rep, key, lo, hi)


def interp_search(rep, index, long long lb, long long rb, long long key):
    return _interp(list(rep), list(index), lb, rb, key)


cdef class GsatNode:
    """One multiway node (compiled layout; attribute names match the Python twin)."""
    cdef public list rep, values, ac, marked, children
    cdef public long long m, im, c, n_live, lb, rb
    cdef public object index
    cdef public object agg

    def __init__(self, list rep, list values, list ac, list marked, list children,
                 long long m, long long n_live, long long lb, long long rb):
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


cdef inline Py_ssize_t _search(GsatNode node, long long key):
    if node.index is None:
        return _bisect(node.rep, key, 0, PyList_GET_SIZE(node.rep))
    return _interp(node.rep, <list>node.index, node.lb, node.rb, key)


def search_slot(GsatNode node, long long key):
    return _search(node, key)


def new_leaf(key, value, long long lb, long long rb, alpha, bint use_index):
    cdef GsatNode node = GsatNode([key], [value], [1], [False], [None, None], 1, 1, lb, rb)
    if use_index:
        node.index = build_index(node.rep, lb, rb, 1)
    return node


cdef struct BuildCtx:
    long long *pac
    long long *plive
    int kind
    long long param
    bint use_index


cdef Py_ssize_t _lower(long long *pac, long long target, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if pac[mid] < target:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef object _build(BuildCtx *ctx, list keys, list values, list ac, list marked, object alpha,
                   long long lb, long long rb, Py_ssize_t lt, Py_ssize_t rt):
    if rt <= lt:
        return None
    cdef long long *pac = ctx.pac
    cdef long long m = pac[rt] - pac[lt]
    cdef long long d = _degree(ctx.kind, ctx.param, m)
    cdef long long theta = (m + d) // (d + 1)
    cdef list rep = [], vals = [], acs = [], marks = [], children = []
    cdef long long a = lb, key
    cdef Py_ssize_t lo = lt, to, e, it
    for it in range(d):
        to = _lower(pac, pac[lo] + theta, lo + 1, rt)
        e = to - 1
        k_obj = <object>PyList_GET_ITEM(keys, e)
        key = k_obj
        children.append(_build(ctx, keys, values, ac, marked, alpha, a, key, lo, e))
        rep.append(k_obj)
        vals.append(<object>PyList_GET_ITEM(values, e))
        acs.append(<object>PyList_GET_ITEM(ac, e))
        marks.append(<object>PyList_GET_ITEM(marked, e))
        a = key + 1
        lo = to
        if lo == rt:
            break
    children.append(_build(ctx, keys, values, ac, marked, alpha, a, rb, lo, rt))
    cdef GsatNode node = GsatNode(rep, vals, acs, marks, children, m,
                                  ctx.plive[rt] - ctx.plive[lt], lb, rb)
    if ctx.use_index:
        node.index = _index(rep, lb, rb, index_length(m, alpha))
    return node


def build_nodes(keys, values, ac, marked, long long lb, long long rb, int kind,
                long long param, alpha, bint use_index):
    cdef list k_ = list(keys), v_ = list(values), a_ = list(ac), mk_ = list(marked)
    cdef Py_ssize_t n = PyList_GET_SIZE(k_), i
    if n == 0:
        return None
    cdef BuildCtx ctx
    ctx.pac = <long long *>malloc((n + 1) * sizeof(long long))
    ctx.plive = <long long *>malloc((n + 1) * sizeof(long long))
    if ctx.pac == NULL or ctx.plive == NULL:
        free(ctx.pac)
        free(ctx.plive)
        raise MemoryError()
    ctx.kind = kind
    ctx.param = param
    ctx.use_index = use_index
    # see _core_py.build_nodes: keep the collector out of the build
    cdef bint paused = gc.isenabled()
    gc.disable()
    try:
        ctx.pac[0] = 0
        ctx.plive[0] = 0
        for i in range(n):
            ctx.pac[i + 1] = ctx.pac[i] + <long long>(<object>PyList_GET_ITEM(a_, i))
            ctx.plive[i + 1] = ctx.plive[i] + (0 if <object>PyList_GET_ITEM(mk_, i) else 1)
        return _build(&ctx, k_, v_, a_, mk_, alpha, lb, rb, 0, n)
    finally:
        if paused:
            gc.enable()
        free(ctx.pac)
        free(ctx.plive)


cdef void _flatten(GsatNode node, bint include_marked, list keys, list values,
                   list ac, list marked) except *:
    cdef list children = node.children, rep = node.rep, mk = node.marked
    cdef Py_ssize_t i, k = PyList_GET_SIZE(rep)
    cdef object ch
    for i in range(k):
        ch = <object>PyList_GET_ITEM(children, i)
        if ch is not None:
            _flatten(<GsatNode>ch, include_marked, keys, values, ac, marked)
        if include_marked or not <object>PyList_GET_ITEM(mk, i):
            keys.append(<object>PyList_GET_ITEM(rep, i))
            values.append(<object>PyList_GET_ITEM(node.values, i))
            ac.append(<object>PyList_GET_ITEM(node.ac, i))
            marked.append(<object>PyList_GET_ITEM(mk, i))
    ch = <object>PyList_GET_ITEM(children, k)
    if ch is not None:
        _flatten(<GsatNode>ch, include_marked, keys, values, ac, marked)


def flatten_into(node, bint include_marked, list keys, list values, list ac, list marked):
    if node is None:
        return
    _flatten(<GsatNode>node, include_marked, keys, values, ac, marked)


cdef class TreeCore:
    """Mutable root slot plus the get/insert/delete descent loops."""
    cdef public object root
    cdef public int kind
    cdef public long long param
    cdef public object alpha
    cdef public bint use_index, weighted, lazy_delete
    cdef public long long lb, rb
    cdef public long long visited, rebuilds, rebuild_work, discarded
    cdef public object rebuild_hook

    def __init__(self, int kind, long long param, alpha, bint use_index, bint weighted=True,
                 bint lazy_delete=False, long long lb=KEY_MIN, long long rb=KEY_MAX):
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

    def rebuild_subtree(self, GsatNode node):
        cdef list keys = [], values = [], ac = [], marked = []
        _flatten(node, self.lazy_delete, keys, values, ac, marked)
        new = build_nodes(keys, values, ac, marked, node.lb, node.rb, self.kind,
                          self.param, self.alpha, self.use_index)
        return new, len(keys)

    cdef _rebuild_on_path(self, list path, list slots, Py_ssize_t depth):
        cdef GsatNode target = <GsatNode>path[depth]
        cdef GsatNode p
        cdef Py_ssize_t i
        new, work = self.rebuild_subtree(target)
        self.rebuilds += 1
        self.rebuild_work += work
        cdef long long delta = target.m - ((<GsatNode>new).m if new is not None else 0)
        if delta:
            self.discarded += delta
            for i in range(depth):
                p = <GsatNode>path[i]
                p.m -= delta
        if depth == 0:
            self.root = new
        else:
            p = <GsatNode>path[depth - 1]
            p.children[slots[depth - 1]] = new
        if self.rebuild_hook is not None:
            self.rebuild_hook(depth, target, new)

    cdef inline long long _key(self, key) except? -1:
        if not (self.lb <= key < self.rb):
            from .errors import ContractViolation
            raise ContractViolation(f"key {key} outside tree bounds [{self.lb}, {self.rb})")
        return key

    def get(self, key):
        cdef long long k = self._key(key)
        cdef object cur = self.root
        cdef GsatNode node, p
        cdef list path = [], slots = []
        cdef Py_ssize_t over = -1, i, j, n
        cdef object result = None
        cdef bint weighted = self.weighted
        while cur is not None:
            node = <GsatNode>cur
            if weighted:
                node.c += 1
                if over < 0 and node.c * 4 > node.im:
                    over = PyList_GET_SIZE(path)
            path.append(node)
            i = _search(node, k)
            if i < PyList_GET_SIZE(node.rep) and <long long>(<object>PyList_GET_ITEM(node.rep, i)) == k:
                if not <object>PyList_GET_ITEM(node.marked, i):
                    result = <object>PyList_GET_ITEM(node.values, i)
                if weighted:
                    node.ac[i] = <object>PyList_GET_ITEM(node.ac, i) + 1
                    n = PyList_GET_SIZE(path)
                    for j in range(n):
                        p = <GsatNode>PyList_GET_ITEM(path, j)
                        p.m += 1
                break
            slots.append(i)
            cur = <object>PyList_GET_ITEM(node.children, i)
        self.visited += PyList_GET_SIZE(path)
        if over >= 0:
            self._rebuild_on_path(path, slots, over)
        return result

    def insert(self, key, value):
        cdef long long k = self._key(key)
        cdef object cur = self.root
        cdef GsatNode node, p, parent
        cdef list path = [], slots = [], prep
        cdef Py_ssize_t over = -1, i, j, n
        cdef bint weighted = self.weighted, found = False
        cdef long long clb, crb
        while cur is not None:
            node = <GsatNode>cur
            node.c += 1
            if over < 0 and node.c * 4 > node.im:
                over = PyList_GET_SIZE(path)
            path.append(node)
            i = _search(node, k)
            if i < PyList_GET_SIZE(node.rep) and <long long>(<object>PyList_GET_ITEM(node.rep, i)) == k:
                found = True
                n = PyList_GET_SIZE(path)
                if <object>PyList_GET_ITEM(node.marked, i):
                    node.marked[i] = False
                    node.values[i] = value
                    for j in range(n):
                        p = <GsatNode>PyList_GET_ITEM(path, j)
                        p.n_live += 1
                if weighted:
                    node.ac[i] = <object>PyList_GET_ITEM(node.ac, i) + 1
                    for j in range(n):
                        p = <GsatNode>PyList_GET_ITEM(path, j)
                        p.m += 1
                break
            slots.append(i)
            cur = <object>PyList_GET_ITEM(node.children, i)
        if not found:
            n = PyList_GET_SIZE(path)
            if n:
                parent = <GsatNode>PyList_GET_ITEM(path, n - 1)
                j = <Py_ssize_t>slots[n - 1]
                prep = parent.rep
                clb = <long long>prep[j - 1] + 1 if j > 0 else parent.lb
                crb = <long long>prep[j] if j < PyList_GET_SIZE(prep) else parent.rb
                parent.children[j] = new_leaf(key, value, clb, crb, self.alpha, self.use_index)
                for j in range(n):
                    p = <GsatNode>PyList_GET_ITEM(path, j)
                    p.m += 1
                    p.n_live += 1
            else:
                self.root = new_leaf(key, value, self.lb, self.rb, self.alpha, self.use_index)
        self.visited += PyList_GET_SIZE(path)
        if over >= 0:
            self._rebuild_on_path(path, slots, over)

    def delete(self, key):
        cdef long long k = self._key(key)
        cdef object cur = self.root
        cdef GsatNode node, p
        cdef list path = [], slots = []
        cdef Py_ssize_t over = -1, i, j, n
        cdef bint weighted = self.weighted
        while cur is not None:
            node = <GsatNode>cur
            node.c += 1
            if over < 0 and node.c * 4 > node.im:
                over = PyList_GET_SIZE(path)
            path.append(node)
            i = _search(node, k)
            if i < PyList_GET_SIZE(node.rep) and <long long>(<object>PyList_GET_ITEM(node.rep, i)) == k:
                n = PyList_GET_SIZE(path)
                if not <object>PyList_GET_ITEM(node.marked, i):
                    node.marked[i] = True
                    for j in range(n):
                        p = <GsatNode>PyList_GET_ITEM(path, j)
                        p.n_live -= 1
                if weighted:
                    node.ac[i] = <object>PyList_GET_ITEM(node.ac, i) + 1
                    for j in range(n):
                        p = <GsatNode>PyList_GET_ITEM(path, j)
                        p.m += 1
                break
            slots.append(i)
            cur = <object>PyList_GET_ITEM(node.children, i)
        self.visited += PyList_GET_SIZE(path)
        if over >= 0:
            self._rebuild_on_path(path, slots, over)
