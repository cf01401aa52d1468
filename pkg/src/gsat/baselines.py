"""Non-self-adjusting comparison structures: a node-splitting B-Tree and a splay tree.

Both count the nodes they touch in ``visited`` so the benchmark can report
a timing-free cost next to wall-clock throughput.
"""
from __future__ import annotations

from bisect import bisect_left
from typing import Any, Optional


class BTreeNode:
    __slots__ = ("keys", "values", "children")

    def __init__(self, keys=None, values=None, children=None):
        self.keys = keys if keys is not None else []
        self.values = values if values is not None else []
        self.children = children if children is not None else []

    @property
    def leaf(self) -> bool:
        return not self.children


class BTree:
    """Classic B-Tree; every non-root node holds between ``B`` and ``2B`` keys."""

    def __init__(self, B: int = 8):
        if B < 2:
            raise ValueError("B must be >= 2")
        self.B = B
        self.root = BTreeNode()
        self.size = 0
        self.visited = 0

    def __len__(self):
        return self.size

    def get(self, key) -> Optional[Any]:
        node = self.root
        while True:
            self.visited += 1
            keys = node.keys
            i = bisect_left(keys, key)
            if i < len(keys) and keys[i] == key:
                return node.values[i]
            if not node.children:
                return None
            node = node.children[i]

    def insert(self, key, value) -> None:
        """Add ``key`` unless present (existing values are kept)."""
        split = self._insert(self.root, key, value)
        if split is not None:
            k, v, right = split
            self.root = BTreeNode([k], [v], [self.root, right])

    def _insert(self, node, key, value):
        self.visited += 1
        keys = node.keys
        i = bisect_left(keys, key)
        if i < len(keys) and keys[i] == key:
            return None
        if node.children:
            split = self._insert(node.children[i], key, value)
            if split is None:
                return None
            k, v, right = split
            keys.insert(i, k)
            node.values.insert(i, v)
            node.children.insert(i + 1, right)
        else:
            keys.insert(i, key)
            node.values.insert(i, value)
            self.size += 1
        if len(keys) <= 2 * self.B:
            return None
        B = self.B
        right = BTreeNode(keys[B + 1:], node.values[B + 1:], node.children[B + 1:])
        k, v = keys[B], node.values[B]
        del keys[B:], node.values[B:]
        if node.children:
            del node.children[B + 1:]
        return k, v, right

    def delete(self, key) -> None:
        if self._delete(self.root, key):
            self.size -= 1
        root = self.root
        if not root.keys and root.children:
            self.root = root.children[0]

    def _delete(self, node, key) -> bool:
        self.visited += 1
        keys = node.keys
        i = bisect_left(keys, key)
        if i < len(keys) and keys[i] == key:
            if not node.children:
                del keys[i], node.values[i]
                return True
            keys[i], node.values[i] = self._pop_max(node.children[i])
            self._fix(node, i)
            return True
        if not node.children:
            return False
        found = self._delete(node.children[i], key)
        self._fix(node, i)
        return found

    def _pop_max(self, node):
        self.visited += 1
        if not node.children:
            return node.keys.pop(), node.values.pop()
        last = len(node.children) - 1
        kv = self._pop_max(node.children[last])
        self._fix(node, last)
        return kv

    def _fix(self, node, i):
        """Restore the lower occupancy bound of ``node.children[i]``."""
        B = self.B
        child = node.children[i]
        if len(child.keys) >= B:
            return
        if i > 0 and len(node.children[i - 1].keys) > B:
            left = node.children[i - 1]
            child.keys.insert(0, node.keys[i - 1])
            child.values.insert(0, node.values[i - 1])
            node.keys[i - 1] = left.keys.pop()
            node.values[i - 1] = left.values.pop()
            if left.children:
                child.children.insert(0, left.children.pop())
            return
        if i + 1 < len(node.children) and len(node.children[i + 1].keys) > B:
            right = node.children[i + 1]
            child.keys.append(node.keys[i])
            child.values.append(node.values[i])
            node.keys[i] = right.keys.pop(0)
            node.values[i] = right.values.pop(0)
            if right.children:
                child.children.append(right.children.pop(0))
            return
        if i > 0:
            i -= 1
        left, right = node.children[i], node.children[i + 1]
        left.keys.append(node.keys.pop(i))
        left.values.append(node.values.pop(i))
        left.keys.extend(right.keys)
        left.values.extend(right.values)
        left.children.extend(right.children)
        del node.children[i + 1]

    def bulk_load(self, keys, values) -> None:
        """Insert pairs one by one; the visit counter is restored afterwards."""
        before = self.visited
        for k, v in zip(keys, values):
            self.insert(k, v)
        self.visited = before

    def height(self) -> int:
        """Levels below the root (0 for a single node)."""
        h, node = 0, self.root
        while node.children:
            node = node.children[0]
            h += 1
        return h

    def items(self):
        out = []

        def walk(node):
            for i, k in enumerate(node.keys):
                if node.children:
                    walk(node.children[i])
                out.append((k, node.values[i]))
            if node.children:
                walk(node.children[-1])

        walk(self.root)
        return out

    def audit(self) -> list[str]:
        problems = []
        leaf_depths = set()

        def walk(node, depth, lo, hi, is_root):
            n = len(node.keys)
            if not is_root and not (self.B <= n <= 2 * self.B):
                problems.append(f"occupancy {n} outside [{self.B}, {2 * self.B}]")
            if n > 2 * self.B:
                problems.append(f"root occupancy {n}")
            if any(node.keys[i] >= node.keys[i + 1] for i in range(n - 1)):
                problems.append("unsorted keys")
            if node.keys and ((lo is not None and node.keys[0] <= lo)
                              or (hi is not None and node.keys[-1] >= hi)):
                problems.append("key order across levels")
            if node.children:
                if len(node.children) != n + 1:
                    problems.append("children count")
                for i, ch in enumerate(node.children):
                    walk(ch, depth + 1, node.keys[i - 1] if i else lo,
                         node.keys[i] if i < n else hi, False)
            else:
                leaf_depths.add(depth)

        walk(self.root, 0, None, None, True)
        if len(leaf_depths) > 1:
            problems.append(f"unbalanced leaves at depths {sorted(leaf_depths)}")
        return problems


class SplayNode:
    __slots__ = ("key", "value", "left", "right", "parent")

    def __init__(self, key, value, parent=None):
        self.key = key
        self.value = value
        self.left = None
        self.right = None
        self.parent = parent


class SplayTree:
    """Bottom-up splay tree; every access rotates the touched node to the root."""

    def __init__(self):
        self.root = None
        self.size = 0
        self.visited = 0

    def __len__(self):
        return self.size

    def _rotate(self, x):
        p = x.parent
        g = p.parent
        if p.left is x:
            p.left = x.right
            if x.right is not None:
                x.right.parent = p
            x.right = p
        else:
            p.right = x.left
            if x.left is not None:
                x.left.parent = p
            x.left = p
        p.parent = x
        x.parent = g
        if g is None:
            self.root = x
        elif g.left is p:
            g.left = x
        else:
            g.right = x

    def _splay(self, x):
        while x.parent is not None:
            p = x.parent
            g = p.parent
            if g is not None:
                if (g.left is p) == (p.left is x):
                    self._rotate(p)
                else:
                    self._rotate(x)
            self._rotate(x)

    def _find(self, key):
        """Node holding ``key`` or the last node on the search path."""
        node = self.root
        last = None
        while node is not None:
            self.visited += 1
            last = node
            if key < node.key:
                node = node.left
            elif key > node.key:
                node = node.right
            else:
                return node
        return last

    def get(self, key) -> Optional[Any]:
        node = self._find(key)
        if node is None:
            return None
        self._splay(node)
        return node.value if node.key == key else None

    def insert(self, key, value) -> None:
        node = self._find(key)
        if node is None:
            self.root = SplayNode(key, value)
            self.size = 1
            return
        if node.key != key:
            child = SplayNode(key, value, node)
            if key < node.key:
                node.left = child
            else:
                node.right = child
            node = child
            self.size += 1
        self._splay(node)

    def delete(self, key) -> None:
        node = self._find(key)
        if node is None:
            return
        self._splay(node)
        if node.key != key:
            return
        left, right = node.left, node.right
        self.size -= 1
        if left is None:
            self.root = right
            if right is not None:
                right.parent = None
            return
        left.parent = None
        self.root = left
        m = left
        while m.right is not None:
            m = m.right
        self._splay(m)
        m.right = right
        if right is not None:
            right.parent = m

    def bulk_load(self, keys, values) -> None:
        """Replace the contents with a balanced tree over sorted ``keys``."""
        pairs = list(zip(keys, values))

        def build(lo, hi, parent):
            if lo >= hi:
                return None
            mid = (lo + hi) // 2
            node = SplayNode(pairs[mid][0], pairs[mid][1], parent)
            node.left = build(lo, mid, node)
            node.right = build(mid + 1, hi, node)
            return node

        self.root = build(0, len(pairs), None)
        self.size = len(pairs)

    def items(self):
        out = []
        stack = []
        node = self.root
        while stack or node is not None:
            while node is not None:
                stack.append(node)
                node = node.left
            node = stack.pop()
            out.append((node.key, node.value))
            node = node.right
        return out

    def depth_of(self, key) -> Optional[int]:
        node, d = self.root, 0
        while node is not None:
            if key == node.key:
                return d
            node = node.left if key < node.key else node.right
            d += 1
        return None
