"""Benchmark harness: repeat a body until a time limit, report mean and stddev.

Each iteration is timed on its own with a monotonic clock, so the standard
deviation is a sample statistic over iterations.  One untimed warm-up
iteration precedes measurement.  Every iteration's result tree is folded
into a running checksum (outside the timed region) so the work cannot be
skipped.
"""

from __future__ import annotations

import csv
import gc
import io
import math
import os
import statistics
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Tuple

from . import bintree, twothree
from .bintree import CURSOR, ROOT
from .workload import FormatError, Scenario, read_stream_file, stream_path

TRAVERSAL = "traversal"
INSERTION = "insertion"
TASKS = (TRAVERSAL, INSERTION)
VARIANTS = ("persistent-cursor", "persistent-root", "mutable-cursor", "mutable-root")

DEFAULT_TIME_LIMIT = 10.0
DEFAULT_MIN_ITERS = 3
MIN_TICKS = 1000

CSV_HEADER = ("task", "variant", "scenario", "size", "iterations", "mean_ns", "stddev_ns")


class BenchError(ValueError):
    pass


@dataclass(frozen=True)
class BenchConfig:
    task: str
    variant: str
    size: Optional[int] = None  # traversal: depth (defaults to the file's); insertion: element count
    scenario: Optional[Scenario] = None
    input: Optional[str] = None
    time_limit: float = DEFAULT_TIME_LIMIT
    min_iters: int = DEFAULT_MIN_ITERS

    def __post_init__(self):
        if self.task not in TASKS:
            raise BenchError(f"--task must be one of {', '.join(TASKS)}, got {self.task!r}")
        if self.variant not in VARIANTS:
            raise BenchError(f"--variant must be one of {', '.join(VARIANTS)}, got {self.variant!r}")
        if not self.time_limit > 0:
            raise BenchError(f"--time-limit must be positive, got {self.time_limit!r}")
        if not isinstance(self.min_iters, int) or self.min_iters < 1:
            raise BenchError(f"--min-iters must be a positive integer, got {self.min_iters!r}")
        if self.scenario is not None:
            object.__setattr__(self, "scenario", Scenario(self.scenario))
        if self.task == INSERTION:
            if not isinstance(self.size, int) or self.size < 1:
                raise BenchError("--count must be a positive integer for the insertion task")
        elif self.input is None:
            raise BenchError("--input is required for the traversal task")

    @property
    def encoding(self) -> str:
        return CURSOR if self.variant.endswith("cursor") else ROOT


@dataclass
class BenchRecord:
    task: str
    variant: str
    scenario: str
    size: int
    iterations: int
    mean_ns: float
    stddev_ns: float
    samples: List[int] = field(default_factory=list, compare=False, repr=False)
    checksum: int = field(default=0, compare=False)
    wall_ns: int = field(default=0, compare=False)

    def row(self) -> Tuple:
        return (self.task, self.variant, self.scenario, self.size, self.iterations,
                repr(float(self.mean_ns)), repr(float(self.stddev_ns)))


def timer_resolution_ns() -> float:
    """Effective tick of the benchmark clock.

    The larger of the declared resolution and the smallest observed step
    between two consecutive reads, which includes the cost of a read.
    """
    clock = time.perf_counter_ns
    step = math.inf
    for _ in range(200):
        a = clock()
        b = clock()
        while b == a:
            b = clock()
        step = min(step, b - a)
    return max(time.get_clock_info("perf_counter").resolution * 1e9, step)


def measure(body: Callable[..., int], time_limit: float, min_iters: int,
            setup: Optional[Callable[[], None]] = None, min_ticks: int = MIN_TICKS):
    """Run ``body`` until ``time_limit`` seconds of wall time have passed and
    at least ``min_iters`` timed iterations were taken.

    ``body(pause)`` returns a checksum of its result; time spent inside
    ``with pause():`` blocks is excluded from the sample.  ``setup`` runs
    untimed before every iteration.  Returns ``(samples, checksum, wall_ns)``.
    """
    clock = time.perf_counter_ns
    checksum = 0
    start = clock()
    body_pause = _Pausable(body, clock)
    gc_was_enabled = gc.isenabled()

    def once():
        if setup is not None:
            setup()
        gc.collect()
        # Results are acyclic or unlinked by their teardown, so reference
        # counting frees them; the cycle collector would only add noise.
        gc.disable()
        try:
            t0 = clock()
            paused = body_pause.run()
            return clock() - t0 - paused
        finally:
            if gc_was_enabled:
                gc.enable()

    first = once()  # warm-up, discarded
    checksum ^= body_pause.result
    if min_ticks and first < min_ticks * timer_resolution_ns():
        raise BenchError(
            f"iteration body took {first} ns, under {min_ticks} timer ticks; "
            "use a larger workload")
    samples: List[int] = []
    while len(samples) < min_iters or clock() - start < time_limit * 1e9:
        samples.append(once())
        checksum = (checksum * 31 + body_pause.result) & bintree.MASK64
    return samples, checksum, clock() - start


class _Pausable:
    """Runs ``body(pause)`` and totals the time spent paused."""

    def __init__(self, body, clock):
        self.body = body
        self.clock = clock
        self.paused = 0
        self.result = 0

    def pause(self):
        return _Pause(self)

    def run(self) -> int:
        self.paused = 0
        self.result = self.body(self.pause)
        return self.paused


class _Pause:
    __slots__ = ("owner", "t0")

    def __init__(self, owner):
        self.owner = owner

    def __enter__(self):
        self.t0 = self.owner.clock()

    def __exit__(self, *exc):
        self.owner.paused += self.owner.clock() - self.t0


def _stats(samples: List[int]) -> Tuple[float, float]:
    mean = statistics.fmean(samples)
    sd = statistics.stdev(samples) if len(samples) > 1 else 0.0
    return mean, sd


# -- bodies -----------------------------------------------------------------------

def resolve_input(path: str, encoding: str) -> str:
    """``path`` itself if it exists, else ``<path>.<encoding>.cmds``."""
    if os.path.exists(path):
        return path
    alt = stream_path(path, encoding)
    if os.path.exists(alt):
        return alt
    raise BenchError(f"--input: no such file {path!r} (also tried {alt!r})")


def _traversal(config: BenchConfig):
    path = resolve_input(config.input, config.encoding)
    f = read_stream_file(path)
    if f.encoding != config.encoding:
        raise BenchError(f"--input: {path} is {f.encoding}-encoded, variant {config.variant} "
                         f"needs {config.encoding}")
    if config.size is not None and config.size != f.depth:
        raise BenchError(f"--depth {config.size} does not match the file's depth {f.depth}")
    if config.scenario is not None and config.scenario != f.scenario:
        raise BenchError(f"--scenario {config.scenario.value} does not match the file's "
                         f"{f.scenario.value}")
    stream, depth = f.stream, f.depth
    meta = (f.scenario.value, depth)

    if config.variant.startswith("persistent"):
        run = bintree.run_cursor if config.encoding == CURSOR else bintree.run_root
        # Persistent trees are immutable: the same perfect tree is a fresh start.
        tree = bintree.perfect(depth)

        def body(pause):
            out = run(tree, stream)
            with pause():
                return bintree.checksum(out)

        return body, None, meta

    run = bintree.mut_run_cursor if config.encoding == CURSOR else bintree.mut_run_root
    state = {}

    def setup():
        old = state.pop("mt", None)
        if old is not None:
            old.destroy()
        state["mt"] = bintree.MutTree.perfect(depth)

    def body(pause):
        mt = state["mt"]
        run(mt, stream)
        with pause():
            return bintree.checksum(mt.root)

    return body, setup, meta


def _insertion(config: BenchConfig):
    n = config.size
    variant = config.variant
    csum = twothree.tree_checksum

    if variant == "persistent-root":
        ins = twothree.tt_insert_root

        def body(pause):
            t = None
            for v in range(n, 0, -1):
                t = ins(t, v)
            with pause():
                h = csum(t)
            del t
            return h
    elif variant == "persistent-cursor":
        ins = twothree.tt_insert_min_zipper

        def body(pause):
            z = twothree.tt_singleton_zipper(n)
            for v in range(n - 1, 0, -1):
                z = ins(z, v)
            with pause():
                h = csum(twothree.tt_to_tree(z))
            del z
            return h
    else:
        finger = variant == "mutable-cursor"

        def body(pause):
            mt = twothree.MutTTTree()
            ins = mt.insert_finger if finger else mt.insert_root
            for v in range(n, 0, -1):
                ins(v)
            with pause():
                h = csum(mt.root)
            mt.destroy()
            return h

    return body, None, ("", n)


def run_bench(config: BenchConfig, min_ticks: int = MIN_TICKS) -> BenchRecord:
    if config.task == TRAVERSAL:
        body, setup, (scenario, size) = _traversal(config)
    else:
        body, setup, (scenario, size) = _insertion(config)
    samples, checksum, wall = measure(body, config.time_limit, config.min_iters,
                                      setup=setup, min_ticks=min_ticks)
    mean, sd = _stats(samples)
    return BenchRecord(config.task, config.variant, scenario, size, len(samples),
                       mean, sd, samples, checksum, wall)


# -- CSV ---------------------------------------------------------------------------

def dumps_csv(records: Iterable[BenchRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def emit_csv(records: Iterable[BenchRecord], path) -> None:
    text = dumps_csv(records)
    try:
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def loads_csv(text: str) -> List[BenchRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise BenchError("missing or wrong CSV header")
    out = []
    for n, row in enumerate(rows[1:], start=2):
        if len(row) != len(CSV_HEADER):
            raise BenchError(f"line {n}: expected {len(CSV_HEADER)} fields")
        try:
            out.append(BenchRecord(row[0], row[1], row[2], int(row[3]), int(row[4]),
                                   float(row[5]), float(row[6])))
        except ValueError as exc:
            raise BenchError(f"line {n}: {exc}") from None
        if not (math.isfinite(out[-1].mean_ns) and math.isfinite(out[-1].stddev_ns)):
            raise BenchError(f"line {n}: non-finite timing")
    return out


def parse_csv(path) -> List[BenchRecord]:
    with open(path, encoding="ascii", newline="") as fh:
        return loads_csv(fh.read())


__all__ = [
    "BenchConfig", "BenchRecord", "BenchError", "FormatError", "measure", "run_bench",
    "emit_csv", "parse_csv", "dumps_csv", "loads_csv", "resolve_input",
]
