"""Sweep enumeration, determinism, checkpoints, shards, and merge validation."""

import json

import pytest

from steptile import (
    CheckpointError,
    build_modulus,
    enumerate_candidates,
    merge_shards,
    run_sweep,
    screen,
    support_T2,
    sweep_config,
    sweep_rows,
)
from steptile.sweep import (
    SweepRow,
    config_hash,
    free_divisors,
    render_csv,
    render_violators,
)
from steptile.zm_arith import ClassSet

M900 = 900  # (2*3*5)^2: same shape as the production modulus, 32x smaller rows


def small_cfg(tmp_path, name="out", *, slice_=(0, 256), **kw):
    return sweep_config(
        M=M900,
        rows=((2, 3, 5),),
        counter_slice=slice_,
        output_path=str(tmp_path / f"{name}.csv"),
        checkpoint_path=str(tmp_path / f"{name}.ckpt"),
        **kw,
    )


def read_outputs(cfg):
    csv_text = open(cfg.output_path).read()
    viol = open(cfg.output_path + ".violators.jsonl").read()
    return csv_text, viol


def test_sweep_rows_lexicographic():
    mod = build_modulus(M900)
    assert sweep_rows(mod) == (
        (2, 3, 5), (2, 3, 25), (2, 9, 5), (2, 9, 25),
        (4, 3, 5), (4, 3, 25), (4, 9, 5), (4, 9, 25),
    )
    mod2 = build_modulus(11025)
    rows = sweep_rows(mod2)
    assert len(rows) == 8 and rows[0] == (3, 5, 7) and rows[-1] == (9, 25, 49)


def test_free_divisors():
    mod = build_modulus(M900)
    free = free_divisors(mod)
    assert len(free) == 27 - 1 - 6
    assert M900 not in free
    for s in mod.prime_powers:
        assert M900 // s not in free
    assert list(free) == sorted(free)


def test_enumerate_candidates_counter_semantics():
    from itertools import islice

    mod = build_modulus(M900)
    config = sweep_config(M=M900, rows=((2, 3, 5),))
    free = free_divisors(mod)
    cands = list(islice(enumerate_candidates(config, (2, 3, 5)), 8))
    base = {M900, M900 // 2, M900 // 3, M900 // 5}
    assert set(cands[0].members) == base
    assert set(cands[1].members) == base | {free[0]}
    assert set(cands[2].members) == base | {free[1]}
    assert set(cands[3].members) == base | {free[0], free[1]}
    assert set(cands[7].members) == base | {free[0], free[1], free[2]}
    with pytest.raises(ValueError):
        next(iter(enumerate_candidates(config, (7, 3, 5))))


def test_config_validation():
    with pytest.raises(ValueError):
        sweep_config(M=36)  # two primes only
    with pytest.raises(ValueError):
        sweep_config(M=1800)  # exponents not all 2
    with pytest.raises(ValueError):
        sweep_config(M=M900, rows=((7, 3, 5),))  # 7 is not a prime power of 900
    with pytest.raises(ValueError):
        sweep_config(M=M900, shard=(3, 3))
    with pytest.raises(ValueError):
        sweep_config(M=M900, counter_slice=(10, 5))
    with pytest.raises(ValueError):
        sweep_config(M=M900, counter_slice=(0, 1 << 21))
    with pytest.raises(ValueError):
        sweep_config(M=M900, delta=0)
    cfg = sweep_config(M=M900)
    assert cfg.total_per_row == 1 << 20
    assert cfg.effective_range == (0, 1 << 20)


def test_config_hash_semantics(tmp_path):
    a = small_cfg(tmp_path, "a")
    b = small_cfg(tmp_path, "b")  # different paths, same semantics
    assert config_hash(a) == config_hash(b)
    c = small_cfg(tmp_path, "c", delta="1/900")
    assert config_hash(c) != config_hash(a)
    d = small_cfg(tmp_path, "d", shard=(0, 2))
    assert config_hash(d) == config_hash(a)  # shard excluded
    e = small_cfg(tmp_path, "e", float_prescreen=False)
    assert config_hash(e) != config_hash(a)


def test_determinism_repeat_runs(tmp_path):
    cfg1 = small_cfg(tmp_path / "r1", "x")
    cfg2 = small_cfg(tmp_path / "r2", "x")
    (tmp_path / "r1").mkdir(); (tmp_path / "r2").mkdir()
    rows1 = run_sweep(cfg1, jobs=1)
    rows2 = run_sweep(cfg2, jobs=1)
    assert rows1 == rows2
    assert read_outputs(cfg1) == read_outputs(cfg2)


def test_prescreen_identity_around_passing_candidates(tmp_path):
    # counter 860160 = bits for {30, 60, 90, 150}: together with the base
    # classes this is the transform support of the subgroup tiling by 30Z,
    # which passes the screen -- so this slice exercises the accept path too
    (tmp_path / "p1").mkdir(); (tmp_path / "p0").mkdir()
    lo = sum(1 << j for j in (13, 16, 18, 19))
    with_pre = small_cfg(tmp_path / "p1", "pre", slice_=(lo, lo + 64),
                         float_prescreen=True)
    without = small_cfg(tmp_path / "p0", "pre", slice_=(lo, lo + 64),
                        float_prescreen=False)
    mod = build_modulus(M900)
    free = free_divisors(mod)
    assert {free[13], free[16], free[18], free[19]} == {30, 60, 90, 150}
    r1 = run_sweep(with_pre, jobs=1)
    r2 = run_sweep(without, jobs=1)
    assert r1 == r2
    assert r1[0].passing >= 1
    assert read_outputs(with_pre) == read_outputs(without)


def test_restart_resumes_to_identical_output(tmp_path):
    (tmp_path / "whole").mkdir(); (tmp_path / "split").mkdir()
    whole = small_cfg(tmp_path / "whole", "w")
    split = small_cfg(tmp_path / "split", "w")
    expected = run_sweep(whole, jobs=1)
    # interrupted first pass: small checkpoint blocks, stop midway
    partial = run_sweep(split, stop_after=100, checkpoint_every=32, jobs=1)
    assert partial == []  # row not finished yet
    assert json.loads(open(split.checkpoint_path).read())["counter"] >= 100
    resumed = run_sweep(split, checkpoint_every=32, jobs=1)
    assert resumed == expected
    assert read_outputs(split) == read_outputs(whole)


def test_completed_checkpoint_short_circuits(tmp_path):
    cfg = small_cfg(tmp_path, "done")
    first = run_sweep(cfg, jobs=1)
    # wipe outputs; a rerun must restore them from the completed checkpoint
    out1 = read_outputs(cfg)
    import os

    os.remove(cfg.output_path)
    again = run_sweep(cfg, jobs=1)
    assert again == first
    assert read_outputs(cfg) == out1


def test_jobs_parallel_identical(tmp_path):
    (tmp_path / "j1").mkdir(); (tmp_path / "j2").mkdir()
    c1 = small_cfg(tmp_path / "j1", "j")
    c2 = small_cfg(tmp_path / "j2", "j")
    r1 = run_sweep(c1, jobs=1)
    r2 = run_sweep(c2, jobs=2, checkpoint_every=32)
    assert r1 == r2
    assert read_outputs(c1) == read_outputs(c2)


def test_shard_merge_equals_single_run(tmp_path):
    (tmp_path / "single").mkdir()
    single = small_cfg(tmp_path / "single", "s", slice_=(0, 384))
    expected = run_sweep(single, jobs=1)
    shard_paths = []
    for i in range(3):
        d = tmp_path / f"shard{i}"
        d.mkdir()
        cfg = sweep_config(
            M=M900,
            rows=((2, 3, 5),),
            counter_slice=(0, 384),
            shard=(i, 3),
            output_path=str(d / "part.json"),
            checkpoint_path=str(d / "part.ckpt"),
        )
        run_sweep(cfg, jobs=1)
        shard_paths.append(str(d / "part.json"))
    (tmp_path / "merged").mkdir()
    final = small_cfg(tmp_path / "merged", "s", slice_=(0, 384))
    merged = merge_shards(final, shard_paths)
    assert merged == expected
    assert read_outputs(final) == read_outputs(single)


def test_merge_rejects_mismatched_and_gappy_shards(tmp_path):
    d0 = tmp_path / "s0"; d0.mkdir()
    cfg0 = sweep_config(
        M=M900, rows=((2, 3, 5),), counter_slice=(0, 128), shard=(0, 2),
        output_path=str(d0 / "p.json"), checkpoint_path=str(d0 / "p.ckpt"),
    )
    run_sweep(cfg0, jobs=1)
    final = sweep_config(
        M=M900, rows=((2, 3, 5),), counter_slice=(0, 128),
        output_path=str(tmp_path / "f.csv"), checkpoint_path=str(tmp_path / "f.ckpt"),
    )
    # missing second shard: ranges do not tile
    with pytest.raises(CheckpointError, match="tile|stop"):
        merge_shards(final, [str(d0 / "p.json")])
    # config mismatch: different delta
    other = sweep_config(
        M=M900, rows=((2, 3, 5),), counter_slice=(0, 128), delta="1/7",
        output_path=str(tmp_path / "g.csv"), checkpoint_path=str(tmp_path / "g.ckpt"),
    )
    with pytest.raises(CheckpointError, match="hash"):
        merge_shards(other, [str(d0 / "p.json")])
    with pytest.raises(ValueError):
        merge_shards(cfg0, [str(d0 / "p.json")])  # sharded merge target


def test_checkpoint_corruption_detected(tmp_path):
    cfg = small_cfg(tmp_path, "c", slice_=(0, 64))
    run_sweep(cfg, stop_after=32, checkpoint_every=32, jobs=1)
    with open(cfg.checkpoint_path, "w") as fh:
        fh.write("{ not json")
    with pytest.raises(CheckpointError, match="corrupt|parse"):
        run_sweep(cfg, jobs=1)


def test_checkpoint_config_mismatch_detected(tmp_path):
    cfg = small_cfg(tmp_path, "m", slice_=(0, 64))
    run_sweep(cfg, stop_after=32, checkpoint_every=32, jobs=1)
    changed = small_cfg(tmp_path, "m", slice_=(0, 64), delta="1/11")
    with pytest.raises(CheckpointError, match="hash|config"):
        run_sweep(changed, jobs=1)
    # resume=False ignores the stale checkpoint and recomputes cleanly
    rows = run_sweep(changed, resume=False, jobs=1)
    assert len(rows) == 1


def test_checkpoint_shard_mismatch_detected(tmp_path):
    cfg = sweep_config(
        M=M900, rows=((2, 3, 5),), counter_slice=(0, 128), shard=(0, 2),
        output_path=str(tmp_path / "p.json"), checkpoint_path=str(tmp_path / "p.ckpt"),
    )
    run_sweep(cfg, stop_after=32, checkpoint_every=32, jobs=1)
    other = sweep_config(
        M=M900, rows=((2, 3, 5),), counter_slice=(0, 128), shard=(1, 2),
        output_path=str(tmp_path / "p.json"), checkpoint_path=str(tmp_path / "p.ckpt"),
    )
    with pytest.raises(CheckpointError, match="shard"):
        run_sweep(other, jobs=1)


def test_checkpoint_wrong_current_row_detected(tmp_path):
    cfg = sweep_config(
        M=M900, rows=((2, 3, 5), (2, 3, 25)), counter_slice=(0, 64),
        output_path=str(tmp_path / "w.csv"), checkpoint_path=str(tmp_path / "w.ckpt"),
    )
    run_sweep(cfg, stop_after=32, checkpoint_every=32, jobs=1)
    obj = json.loads(open(cfg.checkpoint_path).read())
    assert obj["current_row"] == [2, 3, 5]
    obj["current_row"] = [2, 3, 25]
    obj["row_state"]["prime_powers"] = [2, 3, 25]
    with open(cfg.checkpoint_path, "w") as fh:
        json.dump(obj, fh)
    with pytest.raises(CheckpointError, match="next unfinished"):
        run_sweep(cfg, jobs=1)


def test_render_csv_format():
    row = SweepRow(prime_powers=(2, 3, 5), total=16, passing=3, t2_violating=1,
                   violators=((5, {"passes": True}),), full_passing=None)
    text = render_csv([row])
    assert text == 'prime_powers,total,passing,t2_violating\n"{2,3,5}",16,3,1\n'
    jsonl = render_violators([row])
    obj = json.loads(jsonl.strip())
    assert obj["H"] == "0x5" and obj["report"] == {"passes": True}


def test_progress_callback(tmp_path):
    cfg = small_cfg(tmp_path, "prog", slice_=(0, 64))
    seen = []
    run_sweep(cfg, jobs=1, checkpoint_every=32,
              progress=lambda row, done, total: seen.append((row, done, total)))
    assert seen and seen[-1] == ((2, 3, 5), 64, 64)
    assert all(t == 64 for _, _, t in seen)


def test_known_passing_candidate_in_row():
    # the transform support of the subgroup tiling 30Z passes the screen and
    # satisfies the support-level (T2); it must therefore never be a violator
    mod = build_modulus(M900)
    from steptile import delta_screen

    H = ClassSet(mod, frozenset({30, 60, 90, 150, 180, 300, 450, 900}))
    rep = screen(H, delta_screen(mod))
    assert rep.passes and support_T2(H)
