"""Redundant 2-3 trees built from descending sequences.

Data lives in bottom nodes (nodes whose children are all ``None``); every
internal node repeats the minimum of its middle and right subtrees as
separators.  Four insertion engines are provided:

* ``tt_insert_root``: persistent, searches from the root and copies the path.
* ``tt_insert_min_zipper``: persistent, zipper focused on the leftmost
  bottom node; splits walk up the zipper's path.
* ``MutTTTree.insert_root`` / ``MutTTTree.insert_finger``: parent-linked
  mutable tree, searching from the root or starting at the last inserted
  bottom node.
"""

from __future__ import annotations

from typing import List, Optional, Union

from . import _counting


class TTError(ValueError):
    pass


class DuplicateValue(TTError):
    pass


class PreconditionError(TTError):
    pass


# Active counters while counting() is on; bottom splits are tallied here.
_stats: Optional[_counting.Counters] = None


class Node2:
    __slots__ = ("left", "key", "right")

    def __init__(self, left, key, right):
        self.left = left
        self.key = key
        self.right = right

    def __eq__(self, other):
        if not isinstance(other, Node2):
            return NotImplemented
        return self.key == other.key and self.left == other.left and self.right == other.right

    __hash__ = None

    def __repr__(self):
        if self.left is None:
            return f"Node2{{{self.key}}}"
        return f"Node2({self.left!r}, {self.key}, {self.right!r})"


class Node3:
    __slots__ = ("left", "k1", "middle", "k2", "right")

    def __init__(self, left, k1, middle, k2, right):
        self.left = left
        self.k1 = k1
        self.middle = middle
        self.k2 = k2
        self.right = right

    def __eq__(self, other):
        if not isinstance(other, Node3):
            return NotImplemented
        return (self.k1 == other.k1 and self.k2 == other.k2 and self.left == other.left
                and self.middle == other.middle and self.right == other.right)

    __hash__ = None

    def __repr__(self):
        if self.left is None:
            return f"Node3{{{self.k1},{self.k2}}}"
        return f"Node3({self.left!r}, {self.k1}, {self.middle!r}, {self.k2}, {self.right!r})"


TTTree = Union[None, Node2, Node3]


def bottom2(k) -> Node2:
    return Node2(None, k, None)


def bottom3(k1, k2) -> Node3:
    return Node3(None, k1, None, k2, None)


# -- zipper types --------------------------------------------------------------

class Nonempty2:
    __slots__ = ("left", "key", "right")

    def __init__(self, left, key, right):
        self.left = left
        self.key = key
        self.right = right

    def __eq__(self, other):
        return (type(other) is Nonempty2 and self.key == other.key
                and self.left == other.left and self.right == other.right)

    __hash__ = None


class Nonempty3:
    __slots__ = ("left", "k1", "middle", "k2", "right")

    def __init__(self, left, k1, middle, k2, right):
        self.left = left
        self.k1 = k1
        self.middle = middle
        self.k2 = k2
        self.right = right

    def __eq__(self, other):
        return (type(other) is Nonempty3 and self.k1 == other.k1 and self.k2 == other.k2
                and self.left == other.left and self.middle == other.middle
                and self.right == other.right)

    __hash__ = None


class _PathChoice:
    __slots__ = ()
    _fields: tuple = ()

    def __eq__(self, other):
        return type(self) is type(other) and all(
            getattr(self, f) == getattr(other, f) for f in self._fields + ("up",))

    __hash__ = None

    def __repr__(self):
        args = ", ".join(repr(getattr(self, f)) for f in self._fields)
        return f"{type(self).__name__}({args})"


# Each path entry links to the next one towards the root through ``up``.

class Path2L(_PathChoice):
    __slots__ = ("key", "right", "up")
    _fields = ("key", "right")

    def __init__(self, key, right, up):
        self.key, self.right, self.up = key, right, up


class Path2R(_PathChoice):
    __slots__ = ("left", "key", "up")
    _fields = ("left", "key")

    def __init__(self, left, key, up):
        self.left, self.key, self.up = left, key, up


class Path3L(_PathChoice):
    __slots__ = ("k1", "middle", "k2", "right", "up")
    _fields = ("k1", "middle", "k2", "right")

    def __init__(self, k1, middle, k2, right, up):
        self.k1, self.middle, self.k2, self.right, self.up = k1, middle, k2, right, up


class Path3M(_PathChoice):
    __slots__ = ("left", "k1", "k2", "right", "up")
    _fields = ("left", "k1", "k2", "right")

    def __init__(self, left, k1, k2, right, up):
        self.left, self.k1, self.k2, self.right, self.up = left, k1, k2, right, up


class Path3R(_PathChoice):
    __slots__ = ("left", "k1", "middle", "k2", "up")
    _fields = ("left", "k1", "middle", "k2")

    def __init__(self, left, k1, middle, k2, up):
        self.left, self.k1, self.middle, self.k2, self.up = left, k1, middle, k2, up


class TTZipper:
    __slots__ = ("focus", "path")

    def __init__(self, focus, path=None):
        self.focus = focus
        self.path = path

    def __eq__(self, other):
        if not isinstance(other, TTZipper):
            return NotImplemented
        return self.focus == other.focus and self.path == other.path

    __hash__ = None

    def path_entries(self) -> list:
        out, p = [], self.path
        while p is not None:
            out.append(p)
            p = p.up
        return out


# Constructor aliases used by the engines; counting() swaps them.
_mk2, _mk3 = Node2, Node3
_mkF2, _mkF3 = Nonempty2, Nonempty3
_mkP2L, _mkP3L = Path2L, Path3L


def counting():
    """Count node constructions (tree, focus, path and mutable nodes) and
    bottom-node splits while active."""
    counters = _counting.Counters()
    return _Counting(counters)


class _Counting:
    def __init__(self, counters):
        self.counters = counters
        self._swap = _counting.swap_counted(globals(), {
            "_mk2": Node2, "_mk3": Node3, "_mkF2": Nonempty2, "_mkF3": Nonempty3,
            "_mkP2L": Path2L, "_mkP3L": Path3L, "_mkMut": MutTTNode,
        }, counters)

    def __enter__(self):
        global _stats
        self._swap.__enter__()
        _stats = self.counters
        return self.counters

    def __exit__(self, *exc):
        global _stats
        _stats = None
        return self._swap.__exit__(*exc)


# -- root-based persistent insertion -----------------------------------------

def tt_insert_root(t: TTTree, v) -> TTTree:
    """Insert ``v`` by descending from the root; returns the new version."""
    if t is None:
        return _mk2(None, v, None)
    res = _ins(t, v)
    if type(res) is tuple:
        return _mk2(*res)
    return res


def _ins(node, v):
    # Returns the new subtree, or (left, key, right) when it split.
    if isinstance(node, Node3):
        k1, k2 = node.k1, node.k2
        if node.left is None:
            if v == k1 or v == k2:
                raise DuplicateValue(f"value {v} already present")
            if _stats is not None:
                _stats.bottom_splits += 1
            if v < k1:
                return (_mk2(None, v, None), k1, _mk3(None, k1, None, k2, None))
            if v < k2:
                return (_mk2(None, k1, None), v, _mk3(None, v, None, k2, None))
            return (_mk2(None, k1, None), k2, _mk3(None, k2, None, v, None))
        if v < k1:
            res = _ins(node.left, v)
            if type(res) is tuple:
                return (_mk2(*res), k1, _mk2(node.middle, k2, node.right))
            return _mk3(res, k1, node.middle, k2, node.right)
        if v < k2:
            res = _ins(node.middle, v)
            if type(res) is tuple:
                l, k, r = res
                return (_mk2(node.left, k1, l), k, _mk2(r, k2, node.right))
            return _mk3(node.left, k1, res, k2, node.right)
        res = _ins(node.right, v)
        if type(res) is tuple:
            return (_mk2(node.left, k1, node.middle), k2, _mk2(*res))
        return _mk3(node.left, k1, node.middle, k2, res)
    k = node.key
    if node.left is None:
        if v == k:
            raise DuplicateValue(f"value {v} already present")
        if v < k:
            return _mk3(None, v, None, k, None)
        return _mk3(None, k, None, v, None)
    if v < k:
        res = _ins(node.left, v)
        if type(res) is tuple:
            l, k0, r = res
            return _mk3(l, k0, r, k, node.right)
        return _mk2(res, k, node.right)
    res = _ins(node.right, v)
    if type(res) is tuple:
        l, k0, r = res
        return _mk3(node.left, k, l, k0, r)
    return _mk2(node.left, k, res)


# -- zipper -----------------------------------------------------------------------

def tt_singleton_zipper(v) -> TTZipper:
    return TTZipper(_mkF2(None, v, None), None)


def tt_from_tree_leftmost(t: TTTree) -> TTZipper:
    """Zipper focused on the leftmost bottom node."""
    if t is None:
        raise TTError("empty tree")
    path = []
    node = t
    while node.left is not None:
        path.append(node)
        node = node.left
    up = None
    for n in path:
        if isinstance(n, Node3):
            up = _mkP3L(n.k1, n.middle, n.k2, n.right, up)
        else:
            up = _mkP2L(n.key, n.right, up)
    if isinstance(node, Node3):
        focus = _mkF3(node.left, node.k1, node.middle, node.k2, node.right)
    else:
        focus = _mkF2(node.left, node.key, node.right)
    return TTZipper(focus, up)


def tt_to_tree(z: TTZipper) -> TTTree:
    f = z.focus
    if isinstance(f, Nonempty3):
        t = _mk3(f.left, f.k1, f.middle, f.k2, f.right)
    else:
        t = _mk2(f.left, f.key, f.right)
    p = z.path
    while p is not None:
        cls = type(p)
        if cls is Path2L or isinstance(p, Path2L):
            t = _mk2(t, p.key, p.right)
        elif isinstance(p, Path3L):
            t = _mk3(t, p.k1, p.middle, p.k2, p.right)
        elif isinstance(p, Path2R):
            t = _mk2(p.left, p.key, t)
        elif isinstance(p, Path3M):
            t = _mk3(p.left, p.k1, t, p.k2, p.right)
        else:
            t = _mk3(p.left, p.k1, p.middle, p.k2, t)
        p = p.up
    return t


def tt_insert_min_zipper(z: TTZipper, v) -> TTZipper:
    """Insert a new minimum at the focus; the focus stays leftmost.

    A full focus splits into a two-node holding ``v`` (which stays focused)
    and a three-node that is pushed, together with its minimum, into the
    path.  The split always lies to the right of the hole, so the path
    entries it passes through stay left-hand entries.
    """
    f = z.focus
    if isinstance(f, Nonempty3):
        k1 = f.k1
        if not v < k1 or f.left is not None:
            raise PreconditionError(f"{v} is not below the focused minimum {k1}")
        if _stats is not None:
            _stats.bottom_splits += 1
        return TTZipper(_mkF2(None, v, None),
                        _absorb(z.path, k1, _mk3(None, k1, None, f.k2, None)))
    k = f.key
    if not v < k or f.left is not None:
        raise PreconditionError(f"{v} is not below the focused minimum {k}")
    return TTZipper(_mkF3(None, v, None, k, None), z.path)


def _absorb(p, key, right):
    # Hand (key, right) to the parent to the right of the hole.
    if p is None:
        return _mkP2L(key, right, None)
    if isinstance(p, Path2L):
        return _mkP3L(key, right, p.key, p.right, p.up)
    if isinstance(p, Path3L):
        return _mkP2L(key, right, _absorb(p.up, p.k1, _mk2(p.middle, p.k2, p.right)))
    raise PreconditionError("zipper focus is not the leftmost bottom node")


# -- mutable tree ---------------------------------------------------------------

class MutTTNode:
    """Mutable node: one or two keys, two or three children, a parent link."""

    __slots__ = ("k1", "k2", "c0", "c1", "c2", "parent", "two")

    def __init__(self, k1, k2, c0, c1, c2, parent, two):
        self.k1 = k1
        self.k2 = k2
        self.c0 = c0
        self.c1 = c1
        self.c2 = c2
        self.parent = parent
        self.two = two


_mkMut = MutTTNode


class MutTTTree:
    """Parent-linked 2-3 tree with a finger on the last inserted bottom node."""

    def __init__(self):
        self.root: Optional[MutTTNode] = None
        self.last_inserted: Optional[MutTTNode] = None

    def insert_root(self, v) -> None:
        node = self.root
        if node is None:
            self.root = self.last_inserted = _mkMut(v, None, None, None, None, None, True)
            return
        while node.c0 is not None:
            if v < node.k1:
                node = node.c0
            elif node.two or v < node.k2:
                node = node.c1
            else:
                node = node.c2
        if v == node.k1 or (not node.two and v == node.k2):
            raise DuplicateValue(f"value {v} already present")
        self.last_inserted = self._insert_bottom(node, v)

    def insert_finger(self, v) -> None:
        node = self.last_inserted
        if node is None:
            self.root = self.last_inserted = _mkMut(v, None, None, None, None, None, True)
            return
        if not v < node.k1:
            raise PreconditionError(f"{v} is not below the current minimum {node.k1}")
        self.last_inserted = self._insert_bottom(node, v)

    def _insert_bottom(self, n, v):
        # Returns the bottom node that now holds v.
        if n.two:
            if v < n.k1:
                n.k2 = n.k1
                n.k1 = v
            else:
                n.k2 = v
            n.two = False
            return n
        if _stats is not None:
            _stats.bottom_splits += 1
        a, b = n.k1, n.k2
        if v < a:
            x, y, z = v, a, b
        elif v < b:
            x, y, z = a, v, b
        else:
            x, y, z = a, b, v
        new = _mkMut(y, z, None, None, None, n.parent, False)
        n.k1 = x
        n.k2 = None
        n.two = True
        self._insert_parent(n, y, new)
        return n if v == x else new

    def _insert_parent(self, child, key, new):
        # Put (key, new) immediately right of child, splitting upwards.
        p = child.parent
        while p is not None:
            new.parent = p
            if p.two:
                if p.c0 is child:
                    p.c2, p.k2, p.c1, p.k1 = p.c1, p.k1, new, key
                else:
                    p.c2, p.k2 = new, key
                p.two = False
                return
            if child is p.c0:
                kids = (p.c0, new, p.c1, p.c2)
                keys = (key, p.k1, p.k2)
            elif child is p.c1:
                kids = (p.c0, p.c1, new, p.c2)
                keys = (p.k1, key, p.k2)
            else:
                kids = (p.c0, p.c1, p.c2, new)
                keys = (p.k1, p.k2, key)
            sib = _mkMut(keys[2], None, kids[2], kids[3], None, p.parent, True)
            kids[2].parent = kids[3].parent = sib
            kids[1].parent = p
            p.c0, p.c1, p.c2 = kids[0], kids[1], None
            p.k1, p.k2, p.two = keys[0], None, True
            child, key, new = p, keys[1], sib
            p = p.parent
        root = _mkMut(key, None, child, new, None, None, True)
        child.parent = new.parent = root
        self.root = root

    def snapshot(self) -> TTTree:
        def copy(n):
            if n is None:
                return None
            if n.two:
                return Node2(copy(n.c0), n.k1, copy(n.c1))
            return Node3(copy(n.c0), n.k1, copy(n.c1), n.k2, copy(n.c2))

        return copy(self.root)

    def check_links(self) -> List[str]:
        problems = []
        if self.root is not None and self.root.parent is not None:
            problems.append("root has a parent")
        stack = [(self.root, "root")]
        while stack:
            n, where = stack.pop()
            if n is None:
                continue
            kids = (n.c0, n.c1) if n.two else (n.c0, n.c1, n.c2)
            if n.two and n.c2 is not None:
                problems.append(f"{where}: two-node with a third child")
            for i, c in enumerate(kids):
                if c is not None:
                    if c.parent is not n:
                        problems.append(f"{where}.{i}: parent link mismatch")
                    stack.append((c, f"{where}.{i}"))
        return problems

    def destroy(self) -> None:
        """Unlink every node so they are freed by reference counting."""
        stack = [self.root]
        while stack:
            n = stack.pop()
            if n is not None:
                stack.append(n.c0)
                stack.append(n.c1)
                stack.append(n.c2)
                n.parent = n.c0 = n.c1 = n.c2 = None
        self.root = self.last_inserted = None


def mut_tt_insert_finger(mt: MutTTTree, v) -> None:
    mt.insert_finger(v)


def mut_tt_insert_root(mt: MutTTTree, v) -> None:
    mt.insert_root(v)


# -- inspection --------------------------------------------------------------------

def bottom_values(t: TTTree) -> list:
    """Values of the bottom nodes, left to right."""
    out = []
    stack = [t]
    while stack:
        n = stack.pop()
        if n is None:
            continue
        if isinstance(n, Node3):
            if n.left is None:
                out.append(n.k1)
                out.append(n.k2)
            else:
                stack.extend((n.right, n.middle, n.left))
        elif n.left is None:
            out.append(n.key)
        else:
            stack.extend((n.right, n.left))
    return out


def tt_height(t: TTTree) -> int:
    h = 0
    while t is not None:
        h += 1
        t = t.left
    return h


def _children(n):
    if isinstance(n, Node3):
        return [n.left, n.middle, n.right]
    return [n.left, n.right]


def check_invariants(t: TTTree) -> List[str]:
    """List of invariant violations, each naming the node's path (child indices)."""
    problems: List[str] = []
    if t is None:
        return problems
    leaf_depths = set()

    def walk(n, where, depth):
        # Returns the subtree minimum (None if no values).
        if not isinstance(n, (Node2, Node3)):
            problems.append(f"{where}: not a 2-3 node: {n!r}")
            return None
        kids = _children(n)
        if all(c is None for c in kids):
            leaf_depths.add(depth + 1)
            if isinstance(n, Node3) and not n.k1 < n.k2:
                problems.append(f"order: {where}: bottom keys {n.k1}, {n.k2} not increasing")
            return n.k1 if isinstance(n, Node3) else n.key
        if any(c is None for c in kids):
            problems.append(f"depth: {where}: node mixes empty and nonempty children")
        mins = [walk(c, f"{where}.{i}", depth + 1) if c is not None else None
                for i, c in enumerate(kids)]
        keys = [n.k1, n.k2] if isinstance(n, Node3) else [n.key]
        for i, k in enumerate(keys):
            if mins[i + 1] is not None and k != mins[i + 1]:
                problems.append(f"redundancy: {where}: separator {k} != min of child {i + 1} = {mins[i + 1]}")
        return mins[0]

    walk(t, "root", 0)
    if len(leaf_depths) > 1:
        problems.append(f"depth: bottom nodes at differing depths {sorted(leaf_depths)}")
    vals = bottom_values(t)
    for i in range(1, len(vals)):
        if not vals[i - 1] < vals[i]:
            problems.append(f"order: values {vals[i - 1]}, {vals[i]} out of order at position {i}")
            break
    return problems


def tree_checksum(t) -> int:
    """64-bit hash over bottom values and separators, in preorder.

    Accepts a persistent tree or the root of a mutable one; equal shapes
    hash equally.
    """
    mask = (1 << 64) - 1
    h = 0xCBF29CE484222325
    stack = [t]
    while stack:
        n = stack.pop()
        if n is None:
            continue
        if isinstance(n, MutTTNode):
            h = ((h ^ (n.k1 & mask)) * 0x100000001B3) & mask
            if n.two:
                stack.extend((n.c1, n.c0))
            else:
                h = ((h ^ (n.k2 & mask)) * 0x100000001B3) & mask
                stack.extend((n.c2, n.c1, n.c0))
        elif isinstance(n, Node3):
            h = ((h ^ (n.k1 & mask)) * 0x100000001B3) & mask
            h = ((h ^ (n.k2 & mask)) * 0x100000001B3) & mask
            stack.extend((n.right, n.middle, n.left))
        else:
            h = ((h ^ (n.key & mask)) * 0x100000001B3) & mask
            stack.extend((n.right, n.left))
    return h
