"""User-runnable oracle and invariant suites.

Each suite checks the engines against an independent oracle on generated
inputs and reports how many cases passed.  The same checks back the test
suite; ``zipbench verify`` exposes them from the command line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List

from . import bintree, twothree, typecalc as tc
from .rng import SplitMix64
from .workload import GenConfig, Scenario, emit_pair, validate_moves


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    total: int = 0
    failures: List[str] = field(default_factory=list)

    def check(self, ok: bool, what: str) -> bool:
        self.total += 1
        if ok:
            self.passed += 1
        elif len(self.failures) < 20:
            self.failures.append(what)
        return ok

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def summary(self) -> str:
        return f"{self.name}: {self.passed}/{self.total} passed"


# -- type calculus -------------------------------------------------------------

A, X = tc.Var("a"), tc.Var("x")
TREE = tc.parse("(mu x (+ 1 (* x (* a x))))")
NODE23 = tc.parse("(+ 1 (+ (* a (* x x)) (* (* a a) (* x (* x x)))))")

# Expressions over the single parameter ``a`` used by the positions oracle.
POSITION_FIXTURES = [
    "a",
    "(+ 1 a)",
    "(* a a)",
    "(* a (+ a 1))",
    "(+ (* a a) (* a (* a a)))",
    "(list a)",
    "(list (+ a a))",
    "(mu x (+ 1 (* a x)))",
    "(mu x (+ 1 (* x (* a x))))",
    "(mu x (+ a (* x x)))",
    "(mu t (+ 1 (+ (* t (* a t)) (* t (* a (* t (* a t)))))))",
    "(* (list a) (mu x (+ 1 (* a x))))",
]


def tree_context_expected() -> tc.TypeExpr:
    """Tree(a) x Tree(a) x List(a x Tree(a) + Tree(a) x a)."""
    step = tc.sum_of(tc.prod_of(A, TREE), tc.prod_of(TREE, A))
    return tc.normalize(tc.prod_of(TREE, TREE, tc.ListOf(step)))


def golden_derivatives() -> List[tuple]:
    """(label, computed normal form, expected normal form)."""
    return [
        ("d/da Tree(a)", tc.normalize(tc.differentiate(TREE, "a")), tree_context_expected()),
        ("d/da node23", tc.normalize(tc.differentiate(NODE23, "a")),
         tc.normalize(tc.sum_of(tc.power(X, 2), tc.times(2, tc.prod_of(A, tc.power(X, 3)))))),
        ("d/dx node23", tc.normalize(tc.differentiate(NODE23, "x")),
         tc.normalize(tc.sum_of(tc.times(2, tc.prod_of(A, X)),
                                tc.times(3, tc.prod_of(tc.power(A, 2), tc.power(X, 2)))))),
        ("d/da List(a)", tc.normalize(tc.differentiate(tc.parse("(mu x (+ 1 (* a x)))"), "a")),
         tc.normalize(tc.prod_of(tc.ListOf(A), tc.ListOf(A)))),
    ]


def positions_match(expr: tc.TypeExpr, card: int, cap: int):
    """(contexts, positions, stable) for one fixture; positions is ``None``
    when the counts do not stabilize.

    Contexts count pairs of an element and a one-hole context; positions are
    found by enumerating every inhabitant of size at most ``cap``.
    """
    env = {"a": card}
    try:
        c = tc.inhabitant_count(tc.Prod(A, tc.differentiate(expr, "a")), env, cap)
        stable = c.stable and tc.inhabitant_count(expr, env, cap).stable
    except tc.CountOverflow:
        return None, None, False
    if not stable:
        # Infinitely many small inhabitants: enumeration would not terminate.
        return c.value, None, False
    positions = sum(tc.count_positions(v, "a")
                    for size in range(cap + 1)
                    for v in tc.enumerate_inhabitants(expr, env, size))
    return c.value, positions, c.stable


def suite_typecalc(trials: int = 0, seed: int = 0) -> SuiteResult:
    res = SuiteResult("typecalc")
    for label, got, want in golden_derivatives():
        res.check(got == want, f"{label}: got {tc.unparse(got)}, want {tc.unparse(want)}")
    for text in POSITION_FIXTURES:
        expr = tc.parse(text)
        for card in (0, 1, 2):
            for cap in range(5):
                ctx, pos, stable = positions_match(expr, card, cap)
                if stable:
                    res.check(ctx == pos, f"{text} |a|={card} cap={cap}: {ctx} contexts, {pos} positions")
    return res


# -- binary tree traversal -------------------------------------------------------

def random_config(rng: SplitMix64, max_depth: int = 8, max_count: int = 40) -> GenConfig:
    scenarios = list(Scenario)
    return GenConfig(depth=1 + rng.next_below(max_depth),
                     count=1 + rng.next_below(max_count),
                     scenario=scenarios[rng.next_below(len(scenarios))],
                     seed=rng.next_u64())


def traversal_case(config: GenConfig) -> List[str]:
    """Mismatches between the four engines and the reference folds."""
    cursor, root = emit_pair(config)
    validate_moves(cursor.stream, config.depth)
    t = bintree.perfect(config.depth, SplitMix64(config.seed ^ 0x5A5A))
    want = bintree.cursor_oracle(t, cursor.stream.cmds())
    results = {
        "root fold": bintree.root_oracle(t, root.stream.cmds()),
        "run_cursor": bintree.run_cursor(t, cursor.stream),
        "run_root": bintree.run_root(t, root.stream),
    }
    mc = bintree.MutTree.from_tree(t)
    bintree.mut_run_cursor(mc, cursor.stream)
    results["mut_run_cursor"] = mc.snapshot()
    mr = bintree.MutTree.from_tree(t)
    bintree.mut_run_root(mr, root.stream)
    results["mut_run_root"] = mr.snapshot()
    bad = [name for name, got in results.items() if got != want]
    if not (mc.check_links() and mr.check_links()):
        bad.append("parent links")
    return bad


def suite_traversal(trials: int = 1000, seed: int = 1) -> SuiteResult:
    res = SuiteResult("traversal")
    rng = SplitMix64(seed)
    for _ in range(trials):
        cfg = random_config(rng)
        bad = traversal_case(cfg)
        res.check(not bad, f"{cfg}: {', '.join(bad)} disagree with the reference fold")
    return res


# -- 2-3 insertion -------------------------------------------------------------------

def insert_all(values) -> Dict[str, twothree.TTTree]:
    """Insert ``values`` (strictly descending) with all four engines."""
    t = None
    z = None
    mr, mf = twothree.MutTTTree(), twothree.MutTTTree()
    for v in values:
        t = twothree.tt_insert_root(t, v)
        z = twothree.tt_singleton_zipper(v) if z is None else twothree.tt_insert_min_zipper(z, v)
        mr.insert_root(v)
        mf.insert_finger(v)
    out = {
        "root": t,
        "zipper": twothree.tt_to_tree(z) if z is not None else None,
        "mutable-root": mr.snapshot(),
        "mutable-finger": mf.snapshot(),
    }
    mr.destroy()
    mf.destroy()
    return out


def twothree_case(values) -> List[str]:
    trees = insert_all(values)
    bad = []
    ref = trees["root"]
    for name, t in trees.items():
        if t != ref:
            bad.append(f"{name} differs from root engine")
        if twothree.bottom_values(t) != sorted(values):
            bad.append(f"{name}: bottom values not the reversed input")
        problems = twothree.check_invariants(t)
        if problems:
            bad.append(f"{name}: {problems[0]}")
    return bad


def random_descending(rng: SplitMix64, max_len: int) -> List[int]:
    n = 1 + rng.next_below(max_len)
    vals = set()
    while len(vals) < n:
        vals.add(rng.next_i64())
    return sorted(vals, reverse=True)


def split_count(n: int) -> int:
    with twothree.counting() as c:
        t = None
        for v in range(n, 0, -1):
            t = twothree.tt_insert_root(t, v)
    return c.bottom_splits


def suite_twothree(trials: int = 1000, seed: int = 2, max_len: int = 1000) -> SuiteResult:
    res = SuiteResult("twothree")
    rng = SplitMix64(seed)
    for _ in range(trials):
        vals = random_descending(rng, max_len)
        bad = twothree_case(vals)
        res.check(not bad, f"length {len(vals)}: {'; '.join(bad[:3])}")
    for n in (1, 2, 3, 4, 5, 10, 100, 1001):
        got = split_count(n)
        res.check(got == (n - 1) // 2, f"n={n}: {got} bottom splits, want {(n - 1) // 2}")
    return res


# -- workload ---------------------------------------------------------------------

def suite_workload(trials: int = 50, seed: int = 3) -> SuiteResult:
    res = SuiteResult("workload")
    rng = SplitMix64(seed)
    for _ in range(trials):
        cfg = random_config(rng, max_depth=12, max_count=200)
        a = [f.dumps() for f in emit_pair(cfg)]
        b = [f.dumps() for f in emit_pair(cfg)]
        res.check(a == b, f"{cfg}: output not deterministic")
        try:
            c, r = emit_pair(cfg)
            validate_moves(c.stream, cfg.depth)
            validate_moves(r.stream, cfg.depth)
            res.check(True, "")
        except ValueError as exc:
            res.check(False, f"{cfg}: {exc}")
    return res


# -- construction counts ----------------------------------------------------------

def insertion_constructions(n: int) -> Dict[str, int]:
    """Total node constructions for ``n`` descending insertions per engine."""
    out = {}
    with twothree.counting() as c:
        t = None
        for v in range(n, 0, -1):
            t = twothree.tt_insert_root(t, v)
    out["persistent-root"] = c.nodes
    with twothree.counting() as c:
        z = twothree.tt_singleton_zipper(n)
        for v in range(n - 1, 0, -1):
            z = twothree.tt_insert_min_zipper(z, v)
    out["persistent-cursor"] = c.nodes
    for name, finger in (("mutable-cursor", True), ("mutable-root", False)):
        with twothree.counting() as c:
            mt = twothree.MutTTTree()
            ins = mt.insert_finger if finger else mt.insert_root
            for v in range(n, 0, -1):
                ins(v)
        out[name] = c.nodes
        mt.destroy()
    return out


def suite_counts(trials: int = 0, seed: int = 4) -> SuiteResult:
    res = SuiteResult("counts")
    small, large = 1 << 10, 1 << 14
    base = insertion_constructions(small)
    c_zip = math.ceil(base["persistent-cursor"] / small)
    c_root = base["persistent-root"] / (small * math.log2(small))
    big = insertion_constructions(large)
    res.check(big["persistent-cursor"] <= c_zip * large,
              f"zipper: {big['persistent-cursor']} constructions > {c_zip}*n")
    res.check(big["persistent-root"] >= 0.5 * large * math.log2(large),
              f"root: {big['persistent-root']} constructions < 0.5 n log2 n")
    res.check(c_root >= 0.5, f"root calibration constant {c_root:.3f} below 0.5")
    res.check(big["mutable-cursor"] <= 3 * large and big["mutable-root"] <= 3 * large,
              "mutable engines exceed 3n constructions")
    # Root-based traversal rebuilds exactly the path to each Set.
    rng = SplitMix64(seed)
    for _ in range(20):
        cfg = random_config(rng)
        cursor, root = emit_pair(cfg)
        t = bintree.perfect(cfg.depth)
        sets, ops, d = 0, root.stream.ops, 0
        for op in ops:
            if op == bintree.SET:
                sets += d + 1
                d = 0
            else:
                d += 1
        with bintree.counting() as c:
            bintree.run_root(t, root.stream)
        res.check(c.nodes == sets, f"{cfg}: run_root built {c.nodes} nodes, want {sets}")
        moves = len(cursor.stream.ops) - len(cursor.stream.values)
        with bintree.counting() as c:
            bintree.run_cursor(t, cursor.stream)
        res.check(c.nodes <= sets + moves,
                  f"{cfg}: run_cursor built {c.nodes} nodes, bound {sets + moves}")
        mt = bintree.MutTree.from_tree(t)
        with bintree.counting() as c:
            bintree.mut_run_cursor(mt, cursor.stream)
            bintree.mut_run_root(mt, root.stream)
        res.check(c.nodes == 0, f"{cfg}: mutable engines built {c.nodes} nodes")
    return res


SUITES: Dict[str, Callable[..., SuiteResult]] = {
    "typecalc": suite_typecalc,
    "traversal": suite_traversal,
    "twothree": suite_twothree,
    "workload": suite_workload,
    "counts": suite_counts,
}


def run_suites(names, trials=None, seed=None) -> List[SuiteResult]:
    if names == ["all"] or names == "all":
        names = list(SUITES)
    out = []
    for name in names:
        kwargs = {}
        if trials is not None:
            kwargs["trials"] = trials
        if seed is not None:
            kwargs["seed"] = seed
        out.append(SUITES[name](**kwargs))
    return out
