import collections
import os

import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from zipbench import bintree as bt
from zipbench.rng import SplitMix64
from zipbench.verify import random_config, traversal_case
from zipbench.workload import (P_RIGHT_BIASED, CmdStreamFile, FormatError, GenConfig, Scenario,
                               emit_pair, encode_cursor, encode_root, moves_per_set,
                               read_stream_file, sample_position, stream_path, validate_moves,
                               walk_params, write_pair)

L, R, U, SET = bt.L, bt.R, bt.U, bt.SET


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig(0, 1)
    with pytest.raises(ValueError):
        GenConfig(3, 0)
    with pytest.raises(ValueError):
        GenConfig(3, 1, "sideways")
    assert GenConfig(3, 1, "bottom-right").scenario is Scenario.BOTTOM_RIGHT


@pytest.mark.parametrize("scenario", list(Scenario))
def test_depth_one_is_always_root(scenario):
    cfg = GenConfig(1, 10, scenario, 5)
    rng = SplitMix64(5)
    assert all(sample_position(cfg, rng) == [] for _ in range(50))


def test_uniform_is_uniform_over_nodes():
    cfg = GenConfig(3, 1, "uniform")
    rng = SplitMix64(2024)
    draws = 10 ** 6
    counts = collections.Counter(tuple(sample_position(cfg, rng)) for _ in range(draws))
    assert len(counts) == 7
    for c in counts.values():
        assert abs(c / draws - 1 / 7) < 0.02
    assert chisquare(list(counts.values())).pvalue > 1e-4


def test_right_bias_frequency_and_depths():
    cfg = GenConfig(3, 1, "right")
    rng = SplitMix64(99)
    draws = 200_000
    moves = rights = 0
    depths = collections.Counter()
    for _ in range(draws):
        p = sample_position(cfg, rng)
        depths[len(p)] += 1
        moves += len(p)
        rights += sum(1 for d in p if d == R)
    assert abs(rights / moves - P_RIGHT_BIASED) < 0.02
    # Same depth distribution as a uniformly chosen node.
    for d, want in ((0, 1 / 7), (1, 2 / 7), (2, 4 / 7)):
        assert abs(depths[d] / draws - want) < 0.02


def test_bottom_bias_deepens_positions():
    rng = SplitMix64(1)
    mean = {}
    for sc in ("uniform", "bottom"):
        cfg = GenConfig(12, 1, sc)
        mean[sc] = sum(len(sample_position(cfg, rng)) for _ in range(20000)) / 20000
    assert mean["bottom"] > mean["uniform"]


def test_walk_params():
    stops, pr = walk_params(Scenario.RIGHT, 3)
    assert stops == [1 / 7, 1 / 3, 1.0] and pr == P_RIGHT_BIASED
    stops, pr = walk_params(Scenario.BOTTOM, 3)
    assert stops[-1] == 1.0 and pr == 0.5


def test_worked_example_encodings():
    c = encode_cursor([[L], [R]], [10, 20])
    r = encode_root([[L], [R]], [10, 20])
    assert c.ops == [L, SET, U, R, SET] and c.values == [10, 20]
    assert r.ops == [L, SET, R, SET]


def test_repeated_position_emits_only_set():
    c = encode_cursor([[L, R], [L, R]], [1, 2])
    assert c.ops == [L, R, SET, SET]


def test_cursor_climbs_to_common_ancestor():
    c = encode_cursor([[L, L, R], [L, R]], [1, 2])
    assert c.ops == [L, L, R, SET, U, U, R, SET]


def test_pairs_replay_equally():
    rng = SplitMix64(12)
    for _ in range(100):
        cfg = random_config(rng)
        assert traversal_case(cfg) == []


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10), st.integers(1, 300), st.sampled_from(list(Scenario)),
       st.integers(0, 2 ** 64 - 1))
def test_streams_validate_and_round_trip(depth, count, scenario, seed):
    cfg = GenConfig(depth, count, scenario, seed)
    for f in emit_pair(cfg):
        validate_moves(f.stream, depth)
        text = f.dumps()
        assert CmdStreamFile.loads(text) == f
        assert len(f.stream.values) == count


def test_determinism_byte_identical(tmp_path):
    cfg = GenConfig(10, 500, "bottom-right", 31337)
    a = write_pair(cfg, str(tmp_path / "a"))
    b = write_pair(cfg, str(tmp_path / "b"))
    for pa, pb in zip(a, b):
        with open(pa, "rb") as fa, open(pb, "rb") as fb:
            assert fa.read() == fb.read()
    assert a[0] == stream_path(str(tmp_path / "a"), "cursor")


def test_different_seeds_differ():
    a = emit_pair(GenConfig(8, 50, "uniform", 1))[0].dumps()
    b = emit_pair(GenConfig(8, 50, "uniform", 2))[0].dumps()
    assert a != b


def test_file_format(tmp_path):
    cursor, root = emit_pair(GenConfig(2, 2, "uniform", 3))
    lines = cursor.dumps().splitlines()
    assert lines[0] == "ZCMD 1 encoding=cursor depth=2 count=2 scenario=uniform seed=3"
    assert all(l in ("M L", "M R", "M U") or l.startswith("S ") for l in lines[1:])
    assert cursor.dumps().endswith("\n")
    paths = write_pair(GenConfig(2, 2, "uniform", 3), str(tmp_path / "w"))
    assert read_stream_file(paths[1]) == root


HEADER = "ZCMD 1 encoding=cursor depth=3 count=1 scenario=uniform seed=0\n"


@pytest.mark.parametrize("text,msg", [
    ("", "empty"),
    ("ZCMX 1\n", "header"),
    ("ZCMD 2 encoding=cursor depth=3 count=1 scenario=uniform seed=0\n", "version"),
    ("ZCMD 1 encoding=cursor depth=3 count=1 seed=0\nS 1\n", "bad header"),
    ("ZCMD 1 encoding=sideways depth=3 count=1 scenario=uniform seed=0\nS 1\n", "encoding"),
    (HEADER + "M X\nS 1\n", "bad record"),
    (HEADER + "S one\n", "bad value"),
    (HEADER + "S 1\nS 2\n", "declares 1"),
    (HEADER + "M U\nS 1\n", "Mov U at the root"),
    (HEADER + "M L\nM L\nM L\nS 1\n", "below the bottom"),
    (HEADER + "S 9223372036854775808\n", "64-bit"),
    ("ZCMD 1 encoding=root depth=3 count=1 scenario=uniform seed=0\nM U\nS 1\n", "not allowed"),
])
def test_format_errors(text, msg):
    with pytest.raises(FormatError, match=msg):
        CmdStreamFile.loads(text)


def test_read_errors_name_the_file(tmp_path):
    with pytest.raises(OSError, match="missing.cmds"):
        read_stream_file(str(tmp_path / "missing.cmds"))
    bad = tmp_path / "bad.cmds"
    bad.write_text("nonsense\n")
    with pytest.raises(FormatError, match="bad.cmds"):
        read_stream_file(str(bad))


def test_write_error_names_the_file(tmp_path):
    with pytest.raises(OSError, match="nodir"):
        write_pair(GenConfig(2, 1), os.path.join(str(tmp_path), "nodir", "x"))


def test_locality_ordering_small():
    per = {}
    for sc in Scenario:
        c, r = emit_pair(GenConfig(14, 20000, sc, 8))
        per[sc] = moves_per_set(c.stream), moves_per_set(r.stream)
    for sc in (Scenario.RIGHT, Scenario.BOTTOM_RIGHT):
        assert per[sc][0] < per[Scenario.UNIFORM][0]
        assert per[sc][0] < per[sc][1]
    for sc in (Scenario.UNIFORM, Scenario.BOTTOM):
        assert per[sc][0] > per[sc][1]
