"""Binary trees: persistent tree and zipper, mutable parent-linked tree, and
the cursor/root traversal engines.

A persistent tree is either ``None`` (the leaf) or a ``Node``.  Nodes are
never mutated after construction, so versions share untouched subtrees.
Command streams are ``CmdStream`` objects: a list of opcodes plus the list
of values consumed by the ``SET`` opcodes, in order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, NamedTuple, Optional, Sequence, Union

from . import _counting
from .rng import MASK64, SplitMix64

INT64_MIN = -(1 << 63)
INT64_MAX = (1 << 63) - 1
MAX_DEPTH = 24

CURSOR = "cursor"
ROOT = "root"


class TreeError(ValueError):
    pass


class InvalidMove(TreeError):
    """A move leaves the tree; ``index`` is the offending command."""

    def __init__(self, index: int, message: str):
        super().__init__(f"command {index}: {message}")
        self.index = index


class Node:
    __slots__ = ("left", "value", "right")

    def __init__(self, left, value, right):
        self.left = left
        self.value = value
        self.right = right

    def __eq__(self, other):
        if not isinstance(other, Node):
            return NotImplemented
        return (self.value == other.value and self.left == other.left
                and self.right == other.right)

    __hash__ = None

    def __repr__(self):
        return f"Node({self.left!r}, {self.value!r}, {self.right!r})"


BinTree = Optional[Node]

# Engines construct through this alias so counting() can instrument them.
_new_node = Node


def counting():
    """Context manager counting every node the engines and zipper build."""
    return _counting.swap_counted(globals(), {"_new_node": Node}, _counting.Counters())


def size(t: BinTree) -> int:
    n = 0
    stack = [t]
    while stack:
        node = stack.pop()
        if node is not None:
            n += 1
            stack.append(node.left)
            stack.append(node.right)
    return n


def height(t: BinTree) -> int:
    if t is None:
        return 0
    return 1 + max(height(t.left), height(t.right))


def checksum(t) -> int:
    """Order-sensitive 64-bit hash of the preorder values.

    Works on persistent and mutable nodes alike.
    """
    h = 0xCBF29CE484222325
    stack = [t]
    while stack:
        node = stack.pop()
        if node is None:
            h = (h * 0x100000001B3) & MASK64
        else:
            h = ((h ^ (node.value & MASK64)) * 0x100000001B3) & MASK64
            stack.append(node.right)
            stack.append(node.left)
    return h


def _values(fill) -> Iterator[int]:
    if fill is None:
        return SplitMix64(0)
    if isinstance(fill, int):
        return iter(lambda: fill, None)
    return iter(fill)


def _check_depth(depth):
    if not isinstance(depth, int) or not 1 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth must be an integer in [1, {MAX_DEPTH}], got {depth!r}")


def perfect(depth: int, fill: Union[None, int, Iterable[int]] = None) -> Node:
    """Perfect tree with ``2**depth - 1`` nodes, values taken in preorder.

    ``fill`` is an iterable of values, a constant, or ``None`` for a
    SplitMix64 stream seeded with 0.
    """
    _check_depth(depth)
    nxt = _values(fill).__next__

    def build(d):
        if d == 0:
            return None
        v = nxt()
        left = build(d - 1)
        return Node(left, v, build(d - 1))

    return build(depth)


# -- commands ----------------------------------------------------------------

class Dir(enum.IntEnum):
    L = 0
    R = 1
    U = 2


L, R, U, SET = 0, 1, 2, 3


class Mov(NamedTuple):
    dir: Dir


class Set(NamedTuple):
    value: int


Cmd = Union[Mov, Set]


def _check_value(v):
    if not isinstance(v, int) or not INT64_MIN <= v <= INT64_MAX:
        raise ValueError(f"value {v!r} is not a signed 64-bit integer")


@dataclass
class CmdStream:
    """An encoded command stream.

    ``ops`` holds opcodes ``L, R, U, SET``; ``values`` holds one value per
    ``SET``, in order.  Root-encoded streams never contain ``U``.
    """

    encoding: str
    ops: List[int] = field(default_factory=list)
    values: List[int] = field(default_factory=list)

    def __post_init__(self):
        if self.encoding not in (CURSOR, ROOT):
            raise ValueError(f"unknown encoding {self.encoding!r}")
        allowed = {L, R, U, SET} if self.encoding == CURSOR else {L, R, SET}
        for i, op in enumerate(self.ops):
            if op not in allowed:
                what = "Mov U" if op == U else f"opcode {op!r}"
                raise InvalidMove(i, f"{what} not allowed in a {self.encoding} stream")
        if self.ops.count(SET) != len(self.values):
            raise ValueError("number of SET opcodes does not match number of values")
        for v in self.values:
            _check_value(v)

    @classmethod
    def from_cmds(cls, cmds: Iterable[Cmd], encoding: str) -> "CmdStream":
        ops, values = [], []
        for c in cmds:
            if isinstance(c, Set):
                ops.append(SET)
                values.append(c.value)
            elif isinstance(c, Mov):
                ops.append(int(c.dir))
            else:
                raise TypeError(f"not a command: {c!r}")
        return cls(encoding, ops, values)

    def cmds(self) -> List[Cmd]:
        vals = iter(self.values)
        return [Set(next(vals)) if op == SET else Mov(Dir(op)) for op in self.ops]

    def __len__(self):
        return len(self.ops)


def _as_stream(cmds, encoding) -> CmdStream:
    if isinstance(cmds, CmdStream):
        if cmds.encoding != encoding:
            raise ValueError(f"expected a {encoding} stream, got {cmds.encoding}")
        return cmds
    return CmdStream.from_cmds(cmds, encoding)


def first_invalid_move(t, stream: CmdStream, start: Sequence = ()) -> Optional[int]:
    """Index of the first move that leaves the tree, or ``None``.

    Works on persistent and mutable nodes.  ``start`` lists the nodes from
    the root down to the initial focus (default: the root ``t``).  For root
    streams every ``SET`` resets the position to the root.
    """
    if t is None:
        return 0 if stream.ops else None
    path = list(start) or [t]
    for i, op in enumerate(stream.ops):
        if op == SET:
            if stream.encoding == ROOT:
                del path[1:]
        elif op == U:
            if len(path) == 1:
                return i
            path.pop()
        else:
            child = path[-1].left if op == L else path[-1].right
            if child is None:
                return i
            path.append(child)
    return None


def _invalid(t, stream, exc, start=()):
    i = first_invalid_move(t, stream, start)
    if i is None:
        raise exc
    op = stream.ops[i]
    what = "Mov U at the root" if op == U else f"Mov {Dir(op).name} into a leaf"
    return InvalidMove(i, what)


# -- reference folds (independent oracle) ------------------------------------

def replace_oracle(v, path: Sequence, t: BinTree) -> BinTree:
    """Replace the element at ``path`` (L/R directions); off-tree paths are a no-op."""
    if t is None:
        return t
    if not path:
        return Node(t.left, v, t.right)
    d, rest = path[0], path[1:]
    if d == L:
        return Node(replace_oracle(v, rest, t.left), t.value, t.right)
    if d == R:
        return Node(t.left, t.value, replace_oracle(v, rest, t.right))
    return t


def cursor_oracle(t: BinTree, cmds: Iterable[Cmd]) -> BinTree:
    """Direct fold: keep the direction list, replace from the root on every Set."""
    ds: list = []
    for c in cmds:
        if isinstance(c, Set):
            t = replace_oracle(c.value, ds[::-1], t)
        elif c.dir == U:
            ds = ds[1:]
        else:
            ds = [c.dir] + ds
    return t


def root_oracle(t: BinTree, cmds: Iterable[Cmd]) -> BinTree:
    ds: list = []
    for c in cmds:
        if isinstance(c, Set):
            t = replace_oracle(c.value, ds[::-1], t)
            ds = []
        else:
            ds = [c.dir] + ds
    return t


# -- zipper --------------------------------------------------------------------

class PathLeft:
    """Focus came from the parent's left subtree."""

    __slots__ = ("value", "right", "up")

    def __init__(self, value, right, up):
        self.value = value
        self.right = right
        self.up = up

    def __eq__(self, other):
        return (type(other) is PathLeft and self.value == other.value
                and self.right == other.right and self.up == other.up)

    __hash__ = None


class PathRight:
    """Focus came from the parent's right subtree."""

    __slots__ = ("left", "value", "up")

    def __init__(self, left, value, up):
        self.left = left
        self.value = value
        self.up = up

    def __eq__(self, other):
        return (type(other) is PathRight and self.value == other.value
                and self.left == other.left and self.up == other.up)

    __hash__ = None


class BinZipper:
    """Focused value, its two subtrees, and the path back to the root.

    ``path`` is a linked list of ``PathLeft``/``PathRight`` cells, the
    focus's parent first.
    """

    __slots__ = ("value", "left", "right", "path")

    def __init__(self, value, left, right, path=None):
        self.value = value
        self.left = left
        self.right = right
        self.path = path

    def __eq__(self, other):
        if not isinstance(other, BinZipper):
            return NotImplemented
        return (self.value == other.value and self.left == other.left
                and self.right == other.right and self.path == other.path)

    __hash__ = None

    def path_entries(self) -> list:
        out, p = [], self.path
        while p is not None:
            out.append(p)
            p = p.up
        return out

    @property
    def depth(self) -> int:
        return len(self.path_entries())

    def __repr__(self):
        return f"BinZipper(value={self.value!r}, depth={self.depth})"


def from_tree(t: BinTree) -> BinZipper:
    if t is None:
        raise TreeError("empty tree has no focus")
    return BinZipper(t.value, t.left, t.right, None)


def up(z: BinZipper) -> Optional[BinZipper]:
    p = z.path
    if p is None:
        return None
    if type(p) is PathLeft:
        return BinZipper(p.value, _new_node(z.left, z.value, z.right), p.right, p.up)
    return BinZipper(p.value, p.left, _new_node(z.left, z.value, z.right), p.up)


def down_left(z: BinZipper) -> Optional[BinZipper]:
    c = z.left
    if c is None:
        return None
    return BinZipper(c.value, c.left, c.right, PathLeft(z.value, z.right, z.path))


def down_right(z: BinZipper) -> Optional[BinZipper]:
    c = z.right
    if c is None:
        return None
    return BinZipper(c.value, c.left, c.right, PathRight(z.left, z.value, z.path))


def set_focus(z: BinZipper, v: int) -> BinZipper:
    return BinZipper(v, z.left, z.right, z.path)


def to_tree(z: BinZipper) -> Node:
    while z.path is not None:
        z = up(z)
    return _new_node(z.left, z.value, z.right)


# -- persistent engines ------------------------------------------------------

def run_cursor(t: Node, cmds) -> Node:
    """Replay a cursor stream with a zipper and return the rebuilt tree."""
    stream = _as_stream(cmds, CURSOR)
    if t is None:
        raise TreeError("empty tree has no focus")
    PL, PR = PathLeft, PathRight
    mk = _new_node
    # Zipper fields kept in locals: focus value, focus subtrees, path.
    val, left, right, path = t.value, t.left, t.right, None
    nxt = iter(stream.values).__next__
    try:
        for op in stream.ops:
            if op == 0:
                path = PL(val, right, path)
                val, left, right = left.value, left.left, left.right
            elif op == 1:
                path = PR(left, val, path)
                val, left, right = right.value, right.left, right.right
            elif op == 2:
                if type(path) is PL:
                    val, left, right, path = path.value, mk(left, val, right), path.right, path.up
                else:
                    val, left, right, path = path.value, path.left, mk(left, val, right), path.up
            else:
                val = nxt()
    except AttributeError as exc:
        raise _invalid(t, stream, exc) from None
    while path is not None:
        if type(path) is PL:
            val, left, right, path = path.value, mk(left, val, right), path.right, path.up
        else:
            val, left, right, path = path.value, path.left, mk(left, val, right), path.up
    return mk(left, val, right)


def run_root(t: Node, cmds) -> Node:
    """Replay a root stream: every Set copies the path from the root."""
    stream = _as_stream(cmds, ROOT)
    ops = stream.ops
    mk = _new_node
    start = 0
    try:
        for v in stream.values:
            end = ops.index(3, start)
            dirs = ops[start:end]
            start = end + 1
            nodes = []
            push = nodes.append
            node = t
            for d in dirs:
                push(node)
                node = node.left if d == 0 else node.right
            new = mk(node.left, v, node.right)
            for d, parent in zip(reversed(dirs), reversed(nodes)):
                if d == 0:
                    new = mk(new, parent.value, parent.right)
                else:
                    new = mk(parent.left, parent.value, new)
            t = new
    except AttributeError as exc:
        raise _invalid(t, stream, exc) from None
    return t


# -- mutable tree ----------------------------------------------------------------

class MutNode:
    __slots__ = ("value", "left", "right", "parent")

    def __init__(self, value, left=None, right=None, parent=None):
        self.value = value
        self.left = left
        self.right = right
        self.parent = parent


class MutTree:
    """Parent-linked mutable tree with a finger on the current node."""

    def __init__(self, root: Optional[MutNode]):
        self.root = root
        self.finger = root

    @classmethod
    def perfect(cls, depth: int, fill=None) -> "MutTree":
        _check_depth(depth)
        nxt = _values(fill).__next__

        def build(d, parent):
            if d == 0:
                return None
            node = MutNode(nxt(), None, None, parent)
            node.left = build(d - 1, node)
            node.right = build(d - 1, node)
            return node

        return cls(build(depth, None))

    @classmethod
    def from_tree(cls, t: BinTree) -> "MutTree":
        def build(n, parent):
            if n is None:
                return None
            node = MutNode(n.value, None, None, parent)
            node.left = build(n.left, node)
            node.right = build(n.right, node)
            return node

        return cls(build(t, None))

    def snapshot(self) -> BinTree:
        """Persistent copy of the current contents."""
        def copy(n):
            if n is None:
                return None
            return Node(copy(n.left), n.value, copy(n.right))

        return copy(self.root)

    def finger_path(self) -> list:
        """Directions from the root to the finger."""
        out = []
        n = self.finger
        while n is not None and n.parent is not None:
            out.append(L if n.parent.left is n else R)
            n = n.parent
        return out[::-1]

    def check_links(self) -> bool:
        stack = [self.root]
        if self.root is not None and self.root.parent is not None:
            return False
        while stack:
            n = stack.pop()
            for c in (n.left, n.right):
                if c is not None:
                    if c.parent is not n:
                        return False
                    stack.append(c)
        return True

    def destroy(self) -> None:
        """Break parent links so the nodes are freed without the cycle collector."""
        stack = [self.root]
        while stack:
            n = stack.pop()
            if n is not None:
                n.parent = None
                stack.append(n.left)
                stack.append(n.right)
                n.left = n.right = None
        self.root = self.finger = None


def _ancestors(node) -> list:
    out = []
    while node is not None:
        out.append(node)
        node = node.parent
    return out[::-1]


def mut_run_cursor(mt: MutTree, cmds) -> None:
    """Replay a cursor stream by moving the finger and writing in place."""
    stream = _as_stream(cmds, CURSOR)
    node = mt.finger
    nxt = iter(stream.values).__next__
    try:
        for op in stream.ops:
            if op == 0:
                node = node.left
            elif op == 1:
                node = node.right
            elif op == 2:
                node = node.parent
            else:
                node.value = nxt()
        if node is None:
            raise AttributeError
    except AttributeError as exc:
        raise _invalid(mt.root, stream, exc, _ancestors(mt.finger)) from None
    mt.finger = node


def mut_run_root(mt: MutTree, cmds) -> None:
    """Replay a root stream; every Set walks down from the root."""
    stream = _as_stream(cmds, ROOT)
    ops = stream.ops
    root = mt.root
    start = 0
    try:
        for v in stream.values:
            end = ops.index(3, start)
            node = root
            for d in ops[start:end]:
                node = node.left if d == 0 else node.right
            node.value = v
            start = end + 1
    except AttributeError as exc:
        raise _invalid(root, stream, exc) from None
