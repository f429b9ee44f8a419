import pytest
from hypothesis import given, settings, strategies as st

from zipbench import typecalc as tc
from zipbench.typecalc import (ONE, ZERO, ListOf, Mu, Prod, Sum, Var, differentiate,
                               normalize, parse, prod_of, substitute, sum_of, unparse)
from zipbench.verify import (NODE23, POSITION_FIXTURES, TREE, golden_derivatives,
                             positions_match, tree_context_expected)

a, x, y = Var("a"), Var("x"), Var("y")


# -- differentiation ------------------------------------------------------------

def test_derivative_of_one_is_zero():
    assert differentiate(ONE, "x") == ZERO


def test_tree_context_derivative():
    got = normalize(differentiate(TREE, "a"))
    assert got == tree_context_expected()
    # Spelled out by hand: Tree * Tree * List(a*Tree + a*Tree), factors in canonical order.
    t = unparse(normalize(TREE))
    assert unparse(got) == f"(* {t} (* {t} (list (+ (* a {t}) (* a {t})))))"


def test_node23_derivatives_print_as_polynomials():
    # Monomials sort by their factor lists, so terms starting with a come first.
    ax3 = "(* a (* x (* x x)))"
    assert unparse(normalize(differentiate(NODE23, "a"))) == f"(+ {ax3} (+ {ax3} (* x x)))"
    a2x2 = "(* a (* a (* x x)))"
    assert unparse(normalize(differentiate(NODE23, "x"))) == \
        f"(+ {a2x2} (+ {a2x2} (+ {a2x2} (+ (* a x) (* a x)))))"


@pytest.mark.parametrize("label,got,want", golden_derivatives(), ids=lambda v: v if isinstance(v, str) else "")
def test_golden_derivatives(label, got, want):
    assert got == want


def test_list_derivative_is_pair_of_lists():
    assert normalize(differentiate(parse("(mu x (+ 1 (* a x)))"), "a")) == \
        Prod(ListOf(a), ListOf(a))
    assert normalize(differentiate(ListOf(a), "a")) == Prod(ListOf(a), ListOf(a))


def test_list_contexts_by_brute_force():
    # A one-hole context of a list is the prefix and the suffix around the hole.
    lst = parse("(mu x (+ 1 (* a x)))")
    d = Prod(a, differentiate(lst, "a"))
    for card in (1, 2, 3):
        for cap in range(6):
            brute = sum(n * card ** n for n in range(cap + 1))
            assert tc.count_inhabitants(d, {"a": card}, cap) == brute


def test_derivative_when_variable_absent_is_zero():
    assert normalize(differentiate(parse("(* b (mu t (+ 1 (* b t))))"), "a")) == ZERO


def test_nested_fixed_point_containing_variable_is_rejected():
    expr = parse("(mu x (+ 1 (* x (mu y (+ a (* x y))))))")
    with pytest.raises(tc.UnsupportedNesting):
        differentiate(expr, "a")


def test_nested_fixed_point_without_variable_is_constant():
    expr = parse("(mu x (+ a (* x (mu y (+ 1 (* b y))))))")
    # d/da of the body is 1 and d/dx of it is the inner list, whose own
    # derivative by a vanishes.
    assert normalize(differentiate(expr, "a")) == ListOf(ListOf(Var("b")))


def test_undeclared_parameter_is_malformed():
    with pytest.raises(tc.MalformedExpression):
        differentiate(parse("(* a b)"), "a", params=["a"])
    differentiate(parse("(* a b)"), "a", params=["a", "b"])


def test_binder_equal_to_variable_is_renamed():
    # Differentiating by the bound name only sees free occurrences.
    assert normalize(differentiate(parse("(mu a (+ 1 (* b a)))"), "a")) == ZERO


# -- substitution ---------------------------------------------------------------

def test_substitute_variable():
    assert substitute(x, "x", ONE) == ONE


def test_substitute_avoids_capture():
    got = substitute(Mu("x", Sum(x, y)), "y", x)
    assert got == Mu("x'", Sum(Var("x'"), x))


def test_substitute_into_derivative_of_tree_functor():
    inner = parse("(+ 1 (* x (* a x)))")
    got = normalize(substitute(differentiate(inner, "x"), "x", TREE))
    assert got == normalize(sum_of(prod_of(a, TREE), prod_of(TREE, a)))


def test_substitute_stops_at_shadowing_binder():
    e = Mu("x", Sum(x, a))
    assert substitute(e, "x", ONE) == e


# -- normalization --------------------------------------------------------------

def test_unit_laws():
    f = parse("(+ a (* x a))")
    assert normalize(Prod(f, ONE)) == normalize(f)
    assert normalize(Sum(ZERO, f)) == normalize(f)
    assert normalize(Prod(f, ZERO)) == ZERO


def test_repeated_terms_are_kept():
    xx = Prod(x, x)
    assert normalize(Sum(xx, xx)) == normalize(tc.times(2, tc.power(x, 2)))
    assert normalize(Sum(xx, xx)) != normalize(xx)


def test_list_shaped_fixed_point_folds_to_list():
    assert normalize(parse("(mu y (+ (* y a) 1))")) == ListOf(a)
    # Two recursive occurrences: stays a fixed point.
    assert isinstance(normalize(TREE), Mu)


def test_expand_lists_round_trips_through_normalize():
    e = parse("(* (list a) (list (+ a 1)))")
    assert normalize(tc.expand_lists(e)) == normalize(e)


# -- s-expressions --------------------------------------------------------------

def test_parse_unparse_round_trip():
    for text in POSITION_FIXTURES + ["0", "1", "(mu x' (+ x' x))"]:
        assert unparse(parse(text)) == text


@pytest.mark.parametrize("bad", ["", "(", "(+ a)", "(mu (+ a b))", "(foo a)", "a b", ")", "(list)"])
def test_parse_errors(bad):
    with pytest.raises(tc.MalformedExpression):
        parse(bad)


# -- counting -------------------------------------------------------------------

def test_count_simple():
    assert tc.count_inhabitants(Sum(ONE, ONE), {}, 0) == 2
    assert tc.count_inhabitants(Prod(a, a), {"a": 3}, 2) == 9
    assert tc.count_inhabitants(Prod(a, a), {"a": 3}, 1) == 0


def catalan(n):
    c = 1
    for k in range(n):
        c = c * 2 * (2 * k + 1) // (k + 2)
    return c


def test_tree_count_is_catalan_prefix_sum():
    # Size counts parameter occurrences, i.e. internal nodes of the tree.
    for cap in range(7):
        c = tc.inhabitant_count(TREE, {"a": 1}, cap)
        assert c.stable
        assert c.value == sum(catalan(n) for n in range(cap + 1))
    assert tc.count_inhabitants(TREE, {"a": 1}, 4) == 23


def test_tree_count_matches_enumeration():
    for card in (1, 2):
        for cap in range(5):
            enumerated = sum(1 for s in range(cap + 1)
                             for _ in tc.enumerate_inhabitants(TREE, {"a": card}, s))
            assert tc.count_inhabitants(TREE, {"a": card}, cap) == enumerated


def test_tree_contexts_equal_node_positions():
    ctx, pos, stable = positions_match(TREE, 1, 4)
    assert stable and ctx == pos == 76


@pytest.mark.parametrize("text", POSITION_FIXTURES)
def test_positions_equal_contexts_on_fixtures(text):
    expr = parse(text)
    for card in (0, 1, 2):
        for cap in range(5):
            ctx, pos, stable = positions_match(expr, card, cap)
            if stable:
                assert ctx == pos, (card, cap)


def test_unstable_count_is_flagged():
    # Zero-size inhabitants repeat forever: 1 + x with x unconstrained.
    c = tc.inhabitant_count(parse("(mu x (+ 1 x))"), {}, 2)
    assert not c.stable


def test_count_overflow():
    with pytest.raises(tc.CountOverflow):
        tc.count_inhabitants(tc.power(a, 4), {"a": 2 ** 20}, 4)
    assert issubclass(tc.CountOverflow, OverflowError)


def test_count_requires_cardinalities():
    with pytest.raises(tc.MalformedExpression):
        tc.count_inhabitants(a, {}, 2)


# -- properties -----------------------------------------------------------------

def _exprs(names, depth):
    leaves = st.sampled_from([ZERO, ONE] + [Var(n) for n in names])
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            st.builds(Sum, sub, sub),
            st.builds(Prod, sub, sub),
            st.builds(ListOf, sub),
        ),
        max_leaves=depth,
    )


flat = _exprs(["a", "x"], 8)


@st.composite
def with_mu(draw):
    # A single fixed point over the parameters, placed inside a flat context.
    body = draw(_exprs(["a", "x", "y"], 6))
    outer = draw(_exprs(["a", "x"], 4))
    return draw(st.sampled_from([Prod, Sum]))(outer, Mu("y", body))


exprs = st.one_of(flat, with_mu())


@settings(max_examples=150, deadline=None)
@given(exprs, exprs, st.sampled_from(["a", "x"]))
def test_sum_rule(f, g, v):
    assert normalize(differentiate(Sum(f, g), v)) == \
        normalize(Sum(differentiate(f, v), differentiate(g, v)))


@settings(max_examples=150, deadline=None)
@given(exprs, exprs, st.sampled_from(["a", "x"]))
def test_product_rule(f, g, v):
    assert normalize(differentiate(Prod(f, g), v)) == \
        normalize(Sum(Prod(differentiate(f, v), g), Prod(f, differentiate(g, v))))


@settings(max_examples=150, deadline=None)
@given(exprs)
def test_normalize_is_idempotent(e):
    n = normalize(e)
    assert normalize(n) == n


@settings(max_examples=100, deadline=None)
@given(flat, flat)
def test_normalize_respects_commutativity(f, g):
    assert normalize(Sum(f, g)) == normalize(Sum(g, f))
    assert normalize(Prod(f, g)) == normalize(Prod(g, f))


@settings(max_examples=100, deadline=None)
@given(exprs, exprs)
def test_substitute_absent_variable_is_identity(e, rep):
    assert substitute(e, "zz", rep) == e


@settings(max_examples=100, deadline=None)
@given(exprs)
def test_unparse_parse_round_trip(e):
    assert parse(unparse(e)) == e


one_param = st.one_of(
    _exprs(["a"], 6),
    st.builds(lambda b: Mu("y", b), _exprs(["a", "y"], 6)),
)


@settings(max_examples=80, deadline=None)
@given(one_param, st.integers(0, 2), st.integers(0, 3))
def test_positions_equal_contexts(e, card, cap):
    ctx, pos, stable = positions_match(e, card, cap)
    if stable:
        assert ctx == pos
