"""Symbolic regular algebraic types: differentiation, substitution, normal forms.

Types are built from ``Zero``, ``One``, ``Var``, ``Sum``, ``Prod``, ``Mu``
(least fixed point) and ``ListOf``.  ``differentiate`` produces the type of
one-hole contexts; ``normalize`` brings an expression into a canonical
sum-of-products shape so derivatives can be compared structurally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Tuple, Union


class TypeCalculusError(Exception):
    pass


class MalformedExpression(TypeCalculusError):
    pass


class UnsupportedNesting(TypeCalculusError):
    pass


class CountOverflow(TypeCalculusError, OverflowError):
    pass


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class One:
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Sum:
    left: "TypeExpr"
    right: "TypeExpr"


@dataclass(frozen=True)
class Prod:
    left: "TypeExpr"
    right: "TypeExpr"


@dataclass(frozen=True)
class Mu:
    binder: str
    body: "TypeExpr"


@dataclass(frozen=True)
class ListOf:
    elem: "TypeExpr"


TypeExpr = Union[Zero, One, Var, Sum, Prod, Mu, ListOf]
# Output of normalize(); same constructors, canonical shape.
NormalForm = TypeExpr

ZERO = Zero()
ONE = One()

_TAGS = {Zero: 0, One: 1, Var: 2, Sum: 3, Prod: 4, Mu: 5, ListOf: 6}


def sum_of(*terms: TypeExpr) -> TypeExpr:
    """Right-nested sum; the empty sum is ``Zero``."""
    if not terms:
        return ZERO
    out = terms[-1]
    for t in reversed(terms[:-1]):
        out = Sum(t, out)
    return out


def prod_of(*factors: TypeExpr) -> TypeExpr:
    """Right-nested product; the empty product is ``One``."""
    if not factors:
        return ONE
    out = factors[-1]
    for f in reversed(factors[:-1]):
        out = Prod(f, out)
    return out


def _check(expr) -> None:
    if type(expr) not in _TAGS:
        raise MalformedExpression(f"not a type expression: {expr!r}")


def free_vars(expr: TypeExpr) -> frozenset:
    _check(expr)
    if isinstance(expr, Var):
        return frozenset((expr.name,))
    if isinstance(expr, (Sum, Prod)):
        return free_vars(expr.left) | free_vars(expr.right)
    if isinstance(expr, Mu):
        return free_vars(expr.body) - {expr.binder}
    if isinstance(expr, ListOf):
        return free_vars(expr.elem)
    return frozenset()


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    """Append primes to ``base`` until it is not in ``avoid``."""
    avoid = set(avoid)
    name = base + "'"
    while name in avoid:
        name += "'"
    return name


def substitute(expr: TypeExpr, var: str, replacement: TypeExpr) -> TypeExpr:
    """Capture-avoiding ``[replacement/var] expr``."""
    _check(replacement)
    return _subst(expr, var, replacement, free_vars(replacement))


def _subst(expr, var, rep, rep_free):
    _check(expr)
    if isinstance(expr, Var):
        return rep if expr.name == var else expr
    if isinstance(expr, Sum):
        return Sum(_subst(expr.left, var, rep, rep_free),
                   _subst(expr.right, var, rep, rep_free))
    if isinstance(expr, Prod):
        return Prod(_subst(expr.left, var, rep, rep_free),
                    _subst(expr.right, var, rep, rep_free))
    if isinstance(expr, ListOf):
        return ListOf(_subst(expr.elem, var, rep, rep_free))
    if isinstance(expr, Mu):
        body_free = free_vars(expr.body)
        if expr.binder == var or var not in body_free:
            return expr
        binder, body = expr.binder, expr.body
        if binder in rep_free:
            new = fresh_name(binder, rep_free | body_free | {var})
            body = _subst(body, binder, Var(new), frozenset((new,)))
            binder = new
        return Mu(binder, _subst(body, var, rep, rep_free))
    return expr


def expand_lists(expr: TypeExpr) -> TypeExpr:
    """Rewrite every ``ListOf(e)`` as ``Mu(y, 1 + e * y)`` with a fresh ``y``."""
    _check(expr)
    if isinstance(expr, (Sum, Prod)):
        return type(expr)(expand_lists(expr.left), expand_lists(expr.right))
    if isinstance(expr, Mu):
        return Mu(expr.binder, expand_lists(expr.body))
    if isinstance(expr, ListOf):
        elem = expand_lists(expr.elem)
        y = fresh_name("l", free_vars(elem))
        return Mu(y, Sum(ONE, Prod(elem, Var(y))))
    return expr


# -- differentiation ---------------------------------------------------------

def differentiate(expr: TypeExpr, var: str, params: Optional[Iterable[str]] = None) -> TypeExpr:
    """One-hole contexts of ``expr`` with respect to ``var``.

    The rules are applied structurally and the result is not simplified.
    ``params`` declares the type parameters; when given, any other free
    variable is reported as malformed.  ``ListOf(e)`` is differentiated as
    its fixed-point expansion, which after simplification is
    ``List e * d(e) * List e``.

    A fixed point nested inside the body of another fixed point can only be
    differentiated when the variable does not occur in it (the derivative is
    then ``Zero``); otherwise ``UnsupportedNesting`` is raised.
    """
    _check(expr)
    if params is not None:
        undeclared = free_vars(expr) - set(params) - {var}
        if undeclared:
            raise MalformedExpression(f"undeclared type variables: {sorted(undeclared)}")
    return _diff(expr, var, False)


def _diff(expr, x, nested):
    if isinstance(expr, (Zero, One)):
        return ZERO
    if isinstance(expr, Var):
        return ONE if expr.name == x else ZERO
    if isinstance(expr, Sum):
        return Sum(_diff(expr.left, x, nested), _diff(expr.right, x, nested))
    if isinstance(expr, Prod):
        return Sum(Prod(_diff(expr.left, x, nested), expr.right),
                   Prod(expr.left, _diff(expr.right, x, nested)))
    if isinstance(expr, ListOf):
        elem = expr.elem
        y = fresh_name("l", free_vars(elem) | {x})
        lst = ListOf(elem)
        # Fixed-point rule on Mu(y, 1 + elem*y), with the expansion folded back.
        d_body = Sum(ZERO, Sum(Prod(_diff(elem, x, nested), Var(y)), Prod(elem, ZERO)))
        d_rec = Sum(ZERO, Sum(Prod(ZERO, Var(y)), Prod(elem, ONE)))
        return Prod(substitute(d_body, y, lst), ListOf(substitute(d_rec, y, lst)))
    if isinstance(expr, Mu):
        if x not in free_vars(expr):
            if nested:
                return ZERO
        elif nested:
            raise UnsupportedNesting(
                f"unsupported nesting: differentiating under a second fixed point (mu {expr.binder})")
        y, body = expr.binder, expr.body
        if y == x:
            y = fresh_name(y, free_vars(body) | {x})
            body = substitute(body, expr.binder, Var(y))
            expr = Mu(y, body)
        d_x = _diff(body, x, True)
        d_y = _diff(body, y, True)
        return Prod(substitute(d_x, y, expr), ListOf(substitute(d_y, y, expr)))
    raise MalformedExpression(f"not a type expression: {expr!r}")


# -- normalization -----------------------------------------------------------

def order_key(expr: TypeExpr) -> tuple:
    """Total order: constructor tag first, then fields recursively."""
    tag = _TAGS[type(expr)]
    if isinstance(expr, Var):
        return (tag, expr.name)
    if isinstance(expr, (Sum, Prod)):
        return (tag, order_key(expr.left), order_key(expr.right))
    if isinstance(expr, Mu):
        return (tag, expr.binder, order_key(expr.body))
    if isinstance(expr, ListOf):
        return (tag, order_key(expr.elem))
    return (tag,)


Monomial = Tuple[TypeExpr, ...]


def _poly(expr) -> List[Monomial]:
    # Polynomial view: a list of monomials, each a sorted tuple of atoms.
    _check(expr)
    if isinstance(expr, Zero):
        return []
    if isinstance(expr, One):
        return [()]
    if isinstance(expr, Var):
        return [(expr,)]
    if isinstance(expr, Sum):
        return _poly(expr.left) + _poly(expr.right)
    if isinstance(expr, Prod):
        right = _poly(expr.right)
        return [tuple(sorted(a + b, key=order_key)) for a in _poly(expr.left) for b in right]
    if isinstance(expr, ListOf):
        return [(ListOf(_from_poly(_poly(expr.elem))),)]
    if isinstance(expr, Mu):
        body = _poly(expr.body)
        as_list = _list_shape(expr.binder, body)
        if as_list is not None:
            return [(ListOf(as_list),)]
        return [(Mu(expr.binder, _from_poly(body)),)]
    raise MalformedExpression(f"not a type expression: {expr!r}")


def _list_shape(y: str, body: List[Monomial]) -> Optional[TypeExpr]:
    """Recognise ``1 + e1*y + ... + en*y`` (y not free in any ei) and return
    ``e1 + ... + en``."""
    if body.count(()) != 1 or len(body) < 2:
        return None
    elems = []
    for mono in body:
        if mono == ():
            continue
        hits = [i for i, atom in enumerate(mono) if atom == Var(y)]
        if len(hits) != 1:
            return None
        rest = mono[:hits[0]] + mono[hits[0] + 1:]
        if any(y in free_vars(atom) for atom in rest):
            return None
        elems.append(rest)
    return _from_poly(elems)


def _from_poly(poly: List[Monomial]) -> TypeExpr:
    monos = sorted(poly, key=lambda m: tuple(order_key(a) for a in m))
    return sum_of(*(prod_of(*m) for m in monos))


def normalize(expr: TypeExpr) -> NormalForm:
    """Canonical sum-of-products form.

    Sums and products are flattened, products are distributed over sums,
    factors and terms are sorted by ``order_key``, and the unit and
    absorption laws are applied.  Repeated terms are kept, so ``2*T`` is
    ``T + T``.  A fixed point that is linear in its binder with a single
    constant term, ``Mu(y, 1 + e*y)``, becomes ``ListOf(e)``.
    """
    return _from_poly(_poly(expr))


def times(n: int, term: TypeExpr) -> TypeExpr:
    """``n * term`` spelled as an n-fold sum."""
    return sum_of(*([term] * n))


def power(term: TypeExpr, n: int) -> TypeExpr:
    return prod_of(*([term] * n))


# -- finite-model counting ---------------------------------------------------

COUNT_LIMIT = (1 << 63) - 1


class Count(NamedTuple):
    value: int
    stable: bool


def count_inhabitants(expr: TypeExpr, env: Dict[str, int], size_cap: int) -> int:
    """Number of inhabitants of ``expr`` of size at most ``size_cap``.

    See ``inhabitant_count``; this returns only the number.
    """
    return inhabitant_count(expr, env, size_cap).value


def inhabitant_count(expr: TypeExpr, env: Dict[str, int], size_cap: int) -> Count:
    """Count inhabitants over finite parameter sets, graded by size.

    Every free type variable ``v`` is interpreted as a set with ``env[v]``
    elements, and each occurrence of such an element in a value adds one to
    its size.  Fixed points and lists are unrolled by Kleene iteration on
    size-truncated counts, at most ``size_cap + 2`` times.  ``stable`` is
    true when every unrolling reached its fixed point, in which case the
    count is exact.  Counts above ``2**63 - 1`` raise ``CountOverflow``.
    """
    if size_cap < 0:
        raise ValueError("size_cap must be nonnegative")
    for name, card in env.items():
        if card < 0:
            raise ValueError(f"cardinality of {name} must be nonnegative")
    _check(expr)
    missing = free_vars(expr) - set(env)
    if missing:
        raise MalformedExpression(f"no cardinality for free variables {sorted(missing)}")
    flags = [True]
    series = _series(expr, {k: _atom(v, size_cap) for k, v in env.items()}, size_cap, flags)
    return Count(sum(series), flags[0])


def _atom(card, cap):
    s = [0] * (cap + 1)
    if cap >= 1:
        s[1] = card
    return s


def _guard(s):
    for c in s:
        if c > COUNT_LIMIT:
            raise CountOverflow("inhabitant count exceeds the 64-bit limit")
    return s


def _series(expr, env, cap, flags):
    n = cap + 1
    if isinstance(expr, Zero):
        return [0] * n
    if isinstance(expr, One):
        return [1] + [0] * cap
    if isinstance(expr, Var):
        return env[expr.name]
    if isinstance(expr, Sum):
        return _add(_series(expr.left, env, cap, flags), _series(expr.right, env, cap, flags))
    if isinstance(expr, Prod):
        return _mul(_series(expr.left, env, cap, flags), _series(expr.right, env, cap, flags))
    if isinstance(expr, Mu):
        return _fixpoint(lambda cur: _series(expr.body, {**env, expr.binder: cur}, cap, flags),
                         cap, flags)
    if isinstance(expr, ListOf):
        elem = _series(expr.elem, env, cap, flags)
        unit = [1] + [0] * cap
        return _fixpoint(lambda cur: _add(unit, _mul(elem, cur)), cap, flags)
    raise MalformedExpression(f"not a type expression: {expr!r}")


def _add(a, b):
    return _guard([x + y for x, y in zip(a, b)])


def _mul(a, b):
    n = len(a)
    out = [0] * n
    for i, x in enumerate(a):
        if x:
            for j in range(n - i):
                out[i + j] += x * b[j]
    return _guard(out)


def _fixpoint(step, cap, flags):
    cur = [0] * (cap + 1)
    for _ in range(cap + 2):
        nxt = step(cur)
        if nxt == cur:
            return cur
        cur = nxt
    flags[0] = False
    return cur


# -- explicit enumeration (independent oracle for counting) ------------------

def enumerate_inhabitants(expr: TypeExpr, env: Dict[str, int], size: int) -> Iterator[object]:
    """Yield every value of ``expr`` of exactly ``size``.

    Values are nested tuples: ``("unit",)``, ``("var", name, i)``,
    ``("inl", v)``, ``("inr", v)``, ``("pair", v, w)``, ``("roll", v)`` and
    ``("list", (v, ...))``.  Only guarded recursion terminates.
    """
    yield from _enum(expr, env, {}, size)


def _enum(expr, env, bound, size):
    if isinstance(expr, Zero):
        return
    if isinstance(expr, One):
        if size == 0:
            yield ("unit",)
    elif isinstance(expr, Var):
        if expr.name in bound:
            mu, outer = bound[expr.name]
            yield from _enum(mu, env, outer, size)
        elif size == 1:
            for i in range(env[expr.name]):
                yield ("var", expr.name, i)
    elif isinstance(expr, Sum):
        for v in _enum(expr.left, env, bound, size):
            yield ("inl", v)
        for v in _enum(expr.right, env, bound, size):
            yield ("inr", v)
    elif isinstance(expr, Prod):
        lo = _min_size(expr.left, env, bound, {})
        hi = size - _min_size(expr.right, env, bound, {})
        if lo > hi:
            return
        for k in range(int(lo), int(hi) + 1):
            rights = list(_enum(expr.right, env, bound, size - k))
            if not rights:
                continue
            for v in _enum(expr.left, env, bound, k):
                for w in rights:
                    yield ("pair", v, w)
    elif isinstance(expr, Mu):
        inner = dict(bound)
        inner[expr.binder] = (expr, bound)
        for v in _enum(expr.body, env, inner, size):
            yield ("roll", v)
    elif isinstance(expr, ListOf):
        yield from _enum_list(expr.elem, env, bound, size)
    else:
        raise MalformedExpression(f"not a type expression: {expr!r}")


INF = float("inf")


def _min_size(expr, env, bound, assume):
    # Size of the smallest inhabitant; INF when the type is empty.
    if isinstance(expr, Zero):
        return INF
    if isinstance(expr, One) or isinstance(expr, ListOf):
        return 0
    if isinstance(expr, Var):
        if expr.name in assume:
            return assume[expr.name]
        if expr.name in bound:
            mu, outer = bound[expr.name]
            return _min_size(mu, env, outer, {})
        return 1 if env[expr.name] > 0 else INF
    if isinstance(expr, Sum):
        return min(_min_size(expr.left, env, bound, assume), _min_size(expr.right, env, bound, assume))
    if isinstance(expr, Prod):
        return _min_size(expr.left, env, bound, assume) + _min_size(expr.right, env, bound, assume)
    if isinstance(expr, Mu):
        cur = INF
        while True:
            nxt = _min_size(expr.body, env, bound, {**assume, expr.binder: cur})
            if nxt == cur:
                return cur
            cur = nxt
    raise MalformedExpression(f"not a type expression: {expr!r}")


def _enum_list(elem, env, bound, size):
    if size == 0:
        yield ("list", ())
    for k in range(1, size + 1):
        heads = list(_enum(elem, env, bound, k))
        if not heads:
            continue
        for rest in _enum_list(elem, env, bound, size - k):
            for h in heads:
                yield ("list", (h,) + rest[1])


def count_positions(value, var: str) -> int:
    """Number of ``var`` elements occurring in an enumerated value."""
    if value[0] == "var":
        return 1 if value[1] == var else 0
    if value[0] == "list":
        return sum(count_positions(v, var) for v in value[1])
    return sum(count_positions(v, var) for v in value[1:] if isinstance(v, tuple))


# -- s-expressions -----------------------------------------------------------

def parse(text: str) -> TypeExpr:
    """Parse ``0 | 1 | ident | (+ e e) | (* e e) | (mu ident e) | (list e)``."""
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    if not tokens:
        raise MalformedExpression("empty expression")
    pos, expr = _parse(tokens, 0)
    if pos != len(tokens):
        raise MalformedExpression(f"trailing input after position {pos}: {' '.join(tokens[pos:])}")
    return expr


def _is_ident(tok: str) -> bool:
    return (tok[0].isalpha() or tok[0] == "_") and all(c.isalnum() or c in "_'" for c in tok)


def _parse(tokens, i):
    if i >= len(tokens):
        raise MalformedExpression("unexpected end of expression")
    tok = tokens[i]
    if tok == "0":
        return i + 1, ZERO
    if tok == "1":
        return i + 1, ONE
    if tok == ")":
        raise MalformedExpression("unexpected ')'")
    if tok != "(":
        if not _is_ident(tok) or tok in ("mu", "list"):
            raise MalformedExpression(f"bad identifier {tok!r}")
        return i + 1, Var(tok)
    if i + 1 >= len(tokens):
        raise MalformedExpression("unexpected end of expression")
    head = tokens[i + 1]
    if head in ("+", "*"):
        j, a = _parse(tokens, i + 2)
        j, b = _parse(tokens, j)
        expr = Sum(a, b) if head == "+" else Prod(a, b)
    elif head == "mu":
        if i + 2 >= len(tokens) or not _is_ident(tokens[i + 2]):
            raise MalformedExpression("mu expects a binder identifier")
        j, body = _parse(tokens, i + 3)
        expr = Mu(tokens[i + 2], body)
    elif head == "list":
        j, elem = _parse(tokens, i + 2)
        expr = ListOf(elem)
    else:
        raise MalformedExpression(f"unknown form {head!r}")
    if j >= len(tokens) or tokens[j] != ")":
        raise MalformedExpression(f"expected ')' at token {j}")
    return j + 1, expr


def unparse(expr: TypeExpr) -> str:
    _check(expr)
    if isinstance(expr, Zero):
        return "0"
    if isinstance(expr, One):
        return "1"
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Sum):
        return f"(+ {unparse(expr.left)} {unparse(expr.right)})"
    if isinstance(expr, Prod):
        return f"(* {unparse(expr.left)} {unparse(expr.right)})"
    if isinstance(expr, Mu):
        return f"(mu {expr.binder} {unparse(expr.body)})"
    return f"(list {unparse(expr.elem)})"
