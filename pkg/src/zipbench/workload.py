"""Deterministic traversal workloads and the on-disk command stream format.

A workload is ``count`` positions in a perfect tree of ``depth`` levels,
each with a replacement value.  The same positions are written twice: as a
cursor stream (moves relative to the previous position, ``U`` allowed) and
as a root stream (absolute moves from the root).

File format, ASCII, newline-delimited::

    ZCMD 1 encoding=cursor depth=3 count=2 scenario=uniform seed=7
    M L
    S 10
    M U
    M R
    S 20
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass
from typing import List, Sequence, Tuple

from .bintree import CURSOR, L, R, ROOT, SET, U, CmdStream
from .rng import SplitMix64

MAGIC = "ZCMD"
VERSION = 1

P_STOP_BOTTOM = 0.002
P_RIGHT_BIASED = 0.993


class FormatError(ValueError):
    pass


class Scenario(str, enum.Enum):
    UNIFORM = "uniform"
    BOTTOM = "bottom"
    RIGHT = "right"
    BOTTOM_RIGHT = "bottom-right"


@dataclass(frozen=True)
class GenConfig:
    depth: int
    count: int
    scenario: Scenario = Scenario.UNIFORM
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.depth, int) or self.depth < 1:
            raise ValueError(f"depth must be a positive integer, got {self.depth!r}")
        if not isinstance(self.count, int) or self.count < 1:
            raise ValueError(f"count must be a positive integer, got {self.count!r}")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "scenario", Scenario(self.scenario))


def walk_params(scenario: Scenario, depth: int) -> Tuple[List[float], float]:
    """Per-level stop probabilities and the probability of turning right.

    ``RIGHT`` stops with the probabilities that give the same depth
    distribution as a uniformly chosen node.
    """
    scenario = Scenario(scenario)
    if scenario in (Scenario.BOTTOM, Scenario.BOTTOM_RIGHT):
        stops = [P_STOP_BOTTOM] * (depth - 1) + [1.0]
    else:
        stops = [1.0 / ((1 << (depth - k)) - 1) for k in range(depth)]
    p_right = P_RIGHT_BIASED if scenario in (Scenario.RIGHT, Scenario.BOTTOM_RIGHT) else 0.5
    return stops, p_right


def sample_position(config: GenConfig, rng: SplitMix64) -> List[int]:
    """Draw one node of the perfect tree as a list of L/R directions."""
    depth = config.depth
    if config.scenario is Scenario.UNIFORM:
        # Heap numbering: node n in [1, 2**depth); the bits below the top one spell the path.
        n = rng.next_below((1 << depth) - 1) + 1
        return [(n >> i) & 1 for i in range(n.bit_length() - 2, -1, -1)]
    stops, p_right = walk_params(config.scenario, depth)
    path = []
    for k in range(depth):
        if k == depth - 1 or rng.next_float() < stops[k]:
            break
        path.append(R if rng.next_float() < p_right else L)
    return path


def draw(config: GenConfig) -> Tuple[List[List[int]], List[int]]:
    """All positions and replacement values of a workload, in order."""
    rng = SplitMix64(config.seed)
    positions, values = [], []
    for _ in range(config.count):
        positions.append(sample_position(config, rng))
        values.append(rng.next_i64())
    return positions, values


def encode_cursor(positions: Sequence[Sequence[int]], values: Sequence[int]) -> CmdStream:
    ops: List[int] = []
    prev: Sequence[int] = ()
    for p in positions:
        common = 0
        limit = min(len(prev), len(p))
        while common < limit and prev[common] == p[common]:
            common += 1
        ops.extend([U] * (len(prev) - common))
        ops.extend(p[common:])
        ops.append(SET)
        prev = p
    return CmdStream(CURSOR, ops, list(values))


def encode_root(positions: Sequence[Sequence[int]], values: Sequence[int]) -> CmdStream:
    ops: List[int] = []
    for p in positions:
        ops.extend(p)
        ops.append(SET)
    return CmdStream(ROOT, ops, list(values))


def validate_moves(stream: CmdStream, depth: int) -> None:
    """Check that replaying ``stream`` never leaves a perfect tree of ``depth`` levels."""
    level = 0
    root = stream.encoding == ROOT
    for i, op in enumerate(stream.ops):
        if op == SET:
            if root:
                level = 0
        elif op == U:
            if level == 0:
                raise FormatError(f"command {i}: Mov U at the root")
            level -= 1
        else:
            level += 1
            if level >= depth:
                raise FormatError(f"command {i}: move below the bottom level")


@dataclass
class CmdStreamFile:
    encoding: str
    depth: int
    count: int
    scenario: Scenario
    seed: int
    stream: CmdStream

    def header(self) -> str:
        return (f"{MAGIC} {VERSION} encoding={self.encoding} depth={self.depth} "
                f"count={self.count} scenario={Scenario(self.scenario).value} seed={self.seed}")

    def dumps(self) -> str:
        lines = [self.header()]
        vals = iter(self.stream.values)
        names = {L: "M L", R: "M R", U: "M U"}
        for op in self.stream.ops:
            lines.append(f"S {next(vals)}" if op == SET else names[op])
        lines.append("")
        return "\n".join(lines)

    @classmethod
    def loads(cls, text: str) -> "CmdStreamFile":
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines:
            raise FormatError("empty file")
        fields = lines[0].split()
        if len(fields) < 2 or fields[0] != MAGIC:
            raise FormatError("missing ZCMD header")
        if fields[1] != str(VERSION):
            raise FormatError(f"unsupported version {fields[1]}")
        try:
            meta = dict(f.split("=", 1) for f in fields[2:])
            encoding = meta["encoding"]
            depth, count, seed = int(meta["depth"]), int(meta["count"]), int(meta["seed"])
            scenario = Scenario(meta["scenario"])
        except (KeyError, ValueError) as exc:
            raise FormatError(f"bad header: {exc}") from None
        if encoding not in (CURSOR, ROOT):
            raise FormatError(f"unknown encoding {encoding!r}")
        moves = {"M L": L, "M R": R, "M U": U}
        ops: List[int] = []
        values: List[int] = []
        op_append, val_append = ops.append, values.append
        for n, line in enumerate(lines[1:], start=2):
            mv = moves.get(line)
            if mv is not None:
                op_append(mv)
            elif line.startswith("S "):
                try:
                    val_append(int(line[2:]))
                except ValueError:
                    raise FormatError(f"line {n}: bad value {line[2:]!r}") from None
                op_append(SET)
            else:
                raise FormatError(f"line {n}: bad record {line!r}")
        try:
            stream = CmdStream(encoding, ops, values)
        except ValueError as exc:
            raise FormatError(str(exc)) from None
        if len(values) != count:
            raise FormatError(f"header declares {count} sets, file has {len(values)}")
        validate_moves(stream, depth)
        return cls(encoding, depth, count, scenario, seed, stream)


def emit_pair(config: GenConfig) -> Tuple[CmdStreamFile, CmdStreamFile]:
    """Cursor and root encodings of the same positions and values."""
    positions, values = draw(config)
    meta = (config.depth, config.count, config.scenario, config.seed)
    cursor = CmdStreamFile(CURSOR, *meta, encode_cursor(positions, values))
    root = CmdStreamFile(ROOT, *meta, encode_root(positions, values))
    validate_moves(cursor.stream, config.depth)
    validate_moves(root.stream, config.depth)
    return cursor, root


def stream_path(prefix: str, encoding: str) -> str:
    return f"{prefix}.{encoding}.cmds"


def write_pair(config: GenConfig, prefix: str) -> Tuple[str, str]:
    """Write ``<prefix>.cursor.cmds`` and ``<prefix>.root.cmds``."""
    out = []
    for f in emit_pair(config):
        path = stream_path(prefix, f.encoding)
        try:
            with open(path, "w", encoding="ascii", newline="\n") as fh:
                fh.write(f.dumps())
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
        out.append(path)
    return out[0], out[1]


def read_stream_file(path: str) -> CmdStreamFile:
    try:
        with open(path, encoding="ascii", newline="\n") as fh:
            text = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError:
        raise FormatError(f"{path}: not an ASCII command file") from None
    try:
        return CmdStreamFile.loads(text)
    except FormatError as exc:
        raise FormatError(f"{os.fspath(path)}: {exc}") from None


def moves_per_set(stream: CmdStream) -> float:
    sets = len(stream.values)
    return (len(stream.ops) - sets) / sets if sets else 0.0
