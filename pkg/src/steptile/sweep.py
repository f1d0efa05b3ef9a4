"""Sweep over candidate class-sets H of Z_M for M = (p1 p2 p3)^2.

For each of the 8 ways to pick one class from {R_{M/p}, R_{M/p^2}} per prime,
the sweep walks all 2^20 subsets of the remaining 20 divisor classes, screens
each H = {M} u selection u subset with the two-LP predicate
D^{delta+}(H) = D^-(H) = k_H, and tests every passer with support_T2.  Counts
are exact; an optional floating-point prescreen only discards candidates whose
bound is off k_H by more than PRESCREEN_MARGIN, and every survivor is
confirmed by the exact kernel.  Work is checkpointed, shardable by contiguous
counter ranges, and deterministic: final output files are byte-identical
regardless of shard count, job count, or interruption pattern.
"""

from __future__ import annotations

import json
import hashlib
import itertools
from dataclasses import dataclass
from fractions import Fraction
from multiprocessing import Pool
from os import replace as atomic_replace
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

from .zm_arith import ClassSet, Modulus, build_modulus
from .fourier import ft_class_matrix
from .cyclotomic import support_T2
from .delsarte import delta_screen, screen
from .ratlp import ResourceLimitError

PRESCREEN_MARGIN = 1e-4
CHECKPOINT_EVERY = 1 << 14


class CheckpointError(RuntimeError):
    """Raised when a checkpoint cannot be trusted (corrupt or wrong config)."""


def sweep_rows(mod: Modulus) -> tuple[tuple[int, ...], ...]:
    """The 8 prime-power selections (one of p, p^2 per prime), lexicographic."""
    return tuple(itertools.product(*[(p, p * p) for p in mod.primes]))


def free_divisors(mod: Modulus) -> tuple[int, ...]:
    """Divisors whose classes are neither R_0 nor any prime-power class R_{M/p^a}."""
    pp = {mod.M // s for s in mod.prime_powers}
    return tuple(d for d in mod.divisors if d != mod.M and d not in pp)


@dataclass(frozen=True)
class SweepConfig:
    mod: Modulus
    delta: Fraction
    prime_power_selection: tuple[tuple[int, ...], ...]  # rows to run, in order
    float_prescreen: bool = True
    full_screen: bool = False
    shard: tuple[int, int] | None = None
    counter_slice: tuple[int, int] | None = None  # restrict rows to [lo, hi)
    checkpoint_path: str | None = None
    output_path: str | None = None
    violators_path: str | None = None

    def __post_init__(self) -> None:
        mod = self.mod
        if len(mod.factors) != 3 or any(a != 2 for _, a in mod.factors):
            raise ValueError(
                f"sweep needs M = (p1 p2 p3)^2 with 3 distinct primes, got M = {mod.M}"
            )
        valid = set(sweep_rows(mod))
        for row in self.prime_power_selection:
            if row not in valid:
                raise ValueError(f"invalid prime-power selection {row} for M = {mod.M}")
        if self.shard is not None:
            i, n = self.shard
            if not (0 <= i < n):
                raise ValueError(f"shard index {i} must lie in [0, {n})")
        if self.counter_slice is not None:
            lo, hi = self.counter_slice
            if not (0 <= lo < hi <= self.total_per_row):
                raise ValueError(f"counter slice {self.counter_slice} out of range")
        if self.delta <= 0:
            raise ValueError("delta must be positive")

    @property
    def total_per_row(self) -> int:
        return 1 << len(free_divisors(self.mod))

    @property
    def effective_range(self) -> tuple[int, int]:
        return self.counter_slice if self.counter_slice else (0, self.total_per_row)


def sweep_config(
    M: int = 11025,
    *,
    delta=None,
    rows=None,
    float_prescreen: bool = True,
    full_screen: bool = False,
    shard: tuple[int, int] | None = None,
    counter_slice: tuple[int, int] | None = None,
    checkpoint_path: str | None = None,
    output_path: str | None = None,
    violators_path: str | None = None,
) -> SweepConfig:
    """Convenience constructor.  rows: None or "all" for all 8; a single triple
    like (3, 5, 7); or an explicit sequence of triples."""
    mod = build_modulus(M)
    if delta is None:
        delta = delta_screen(mod)
    if rows is None or rows == "all":
        selection = sweep_rows(mod)
    elif rows and isinstance(rows[0], int):
        selection = (tuple(rows),)
    else:
        selection = tuple(tuple(r) for r in rows)
    return SweepConfig(
        mod=mod,
        delta=Fraction(delta),
        prime_power_selection=selection,
        float_prescreen=float_prescreen,
        full_screen=full_screen,
        shard=shard,
        counter_slice=counter_slice,
        checkpoint_path=checkpoint_path,
        output_path=output_path,
        violators_path=violators_path,
    )


@dataclass(frozen=True)
class SweepRow:
    """Aggregated result for one prime-power selection (or a shard of one)."""

    prime_powers: tuple[int, ...]
    total: int
    passing: int
    t2_violating: int
    violators: tuple[tuple[int, dict], ...] = ()  # (H bitmask, ScreenReport dict)
    full_passing: int | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.t2_violating <= self.passing <= self.total:
            raise ValueError("need t2_violating <= passing <= total")

    @property
    def violating_H(self) -> tuple[int, ...]:
        return tuple(mask for mask, _ in self.violators)


def enumerate_candidates(cfg: SweepConfig, row: tuple[int, ...]):
    """All 2^20 candidate H for one selection, in binary-counter order over the
    canonical (ascending) divisor order; counter 0 is the bare selection."""
    mod = cfg.mod
    if row not in set(sweep_rows(mod)):
        raise ValueError(f"invalid prime-power selection {row} for M = {mod.M}")
    base = frozenset({mod.M} | {mod.M // s for s in row})
    free = free_divisors(mod)
    for counter in range(1 << len(free)):
        extra = {free[j] for j in range(len(free)) if counter >> j & 1}
        yield ClassSet(mod, base | extra)


def _shard_range(cfg: SweepConfig) -> tuple[int, int]:
    base_lo, base_hi = cfg.effective_range
    if cfg.shard is None:
        return base_lo, base_hi
    i, n = cfg.shard
    span = base_hi - base_lo
    block = -(-span // n)  # ceil
    return base_lo + min(i * block, span), base_lo + min((i + 1) * block, span)


def config_hash(cfg: SweepConfig) -> str:
    """Hash of the semantic configuration (shard excluded so shards can merge)."""
    core = {
        "M": cfg.mod.M,
        "delta": str(cfg.delta),
        "rows": [list(r) for r in cfg.prime_power_selection],
        "float_prescreen": cfg.float_prescreen,
        "full_screen": cfg.full_screen,
        "slice": list(cfg.counter_slice) if cfg.counter_slice else None,
        "margin": PRESCREEN_MARGIN,
    }
    blob = json.dumps(core, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# --- the hot loop ---------------------------------------------------------


def _run_range(
    M: int,
    delta_str: str,
    row: tuple[int, ...],
    float_prescreen: bool,
    full_screen: bool,
    lo: int,
    hi: int,
):
    """Screen candidates lo..hi-1 of one row; returns exact partial results."""
    mod = build_modulus(M)
    delta = Fraction(delta_str)
    divs = mod.divisors
    m_index = mod.divisor_index(mod.M)
    free = free_divisors(mod)
    free_idx = [mod.divisor_index(d) for d in free]
    base_idx = sorted(mod.divisor_index(mod.M // s) for s in row)
    k = 1
    for s in row:
        for p in mod.primes:
            if s % p == 0:
                k *= p

    T = ft_class_matrix(mod)
    Tf = np.array(T.rows, dtype=np.float64)
    phi = np.array([mod.phi[mod.M // m] for m in divs], dtype=np.float64)
    ones = np.ones(len(divs))
    minus_cols = [i for i in range(len(divs)) if i != m_index]
    A_minus = -Tf[:, minus_cols]
    phi_minus = phi[minus_cols]

    def float_rejects(on_idx: list[int]) -> bool:
        # D+ relaxation: variables on H - {R_0} only, c >= 0.
        res = linprog(
            -phi[on_idx], A_ub=-Tf[:, on_idx], b_ub=ones, bounds=(0, None), method="highs"
        )
        if res.status == 0 and abs(1.0 - res.fun - k) > PRESCREEN_MARGIN:
            return True
        # D- : all classes variable, c <= 0 off H.
        on = set(on_idx)
        bnds = [(None, None) if i in on else (None, 0.0) for i in minus_cols]
        res = linprog(-phi_minus, A_ub=A_minus, b_ub=ones, bounds=bnds, method="highs")
        if res.status == 0 and abs(1.0 - res.fun - k) > PRESCREEN_MARGIN:
            return True
        return False  # solver trouble or within margin: the exact kernel decides

    passing = violating = 0
    full_passing = 0 if full_screen else None
    violators: list[tuple[int, dict]] = []
    nfree = len(free_idx)
    for counter in range(lo, hi):
        on_idx = base_idx + [free_idx[j] for j in range(nfree) if counter >> j & 1]
        if float_prescreen and float_rejects(on_idx):
            continue
        H = ClassSet(mod, frozenset(divs[i] for i in on_idx) | {mod.M})
        rep = screen(H, delta, full=full_screen)
        if rep.passes:
            passing += 1
            if full_screen and rep.d_plus == rep.k_h:
                full_passing += 1
            if not support_T2(H):
                violating += 1
                violators.append((H.bitmask(), json.loads(rep.to_json())))
    return passing, violating, full_passing, violators


def _block_worker(args):
    lo = args[5]
    return lo, _run_range(*args)


# --- checkpointing ---------------------------------------------------------


def _row_state_json(row: tuple[int, ...], state: dict) -> dict:
    return {
        "prime_powers": list(row),
        "passing": state["passing"],
        "t2_violating": state["violating"],
        "full_passing": state["full_passing"],
        "violators": [[mask, rep] for mask, rep in state["violators"]],
    }


def _write_json_atomic(path: str, obj) -> None:
    tmp = Path(path).with_suffix(Path(path).suffix + ".tmp")
    tmp.write_text(json.dumps(obj))
    atomic_replace(tmp, path)


def _write_checkpoint(cfg, completed, current_row, counter, state, done) -> None:
    if cfg.checkpoint_path is None:
        return
    obj = {
        "version": 1,
        "config_hash": config_hash(cfg),
        "shard": list(cfg.shard) if cfg.shard else None,
        "completed_rows": [
            _row_state_json(r.prime_powers, _row_as_state(r)) for r in completed
        ],
        "current_row": list(current_row) if current_row else None,
        "counter": counter,
        "row_state": _row_state_json(current_row, state) if current_row else None,
        "completed": done,
    }
    _write_json_atomic(cfg.checkpoint_path, obj)


def _row_as_state(row: SweepRow) -> dict:
    return {
        "passing": row.passing,
        "violating": row.t2_violating,
        "full_passing": row.full_passing,
        "violators": list(row.violators),
    }


def _parse_row_state(obj: dict) -> tuple[tuple[int, ...], dict]:
    row = tuple(obj["prime_powers"])
    state = {
        "passing": obj["passing"],
        "violating": obj["t2_violating"],
        "full_passing": obj["full_passing"],
        "violators": [(mask, rep) for mask, rep in obj["violators"]],
    }
    return row, state


def _load_checkpoint(cfg: SweepConfig):
    path = cfg.checkpoint_path
    if path is None or not Path(path).exists():
        return None
    try:
        obj = json.loads(Path(path).read_text())
        if obj["version"] != 1:
            raise CheckpointError(f"{path}: unknown checkpoint version {obj['version']}")
        found, expect = obj["config_hash"], config_hash(cfg)
        if found != expect:
            raise CheckpointError(
                f"{path}: config hash mismatch (checkpoint {found[:12]}..., "
                f"current {expect[:12]}...); refusing to resume under a changed configuration"
            )
        shard = tuple(obj["shard"]) if obj["shard"] else None
        if shard != cfg.shard:
            raise CheckpointError(
                f"{path}: shard mismatch (checkpoint {shard}, current {cfg.shard})"
            )
        obj["completed_rows"] = [_parse_row_state(r) for r in obj["completed_rows"]]
        return obj
    except CheckpointError:
        raise
    except Exception as exc:  # corrupt JSON, missing keys, wrong shapes
        raise CheckpointError(f"corrupt checkpoint {path}: {exc!r}") from exc


# --- output files ----------------------------------------------------------


def _violators_path(cfg: SweepConfig) -> str | None:
    if cfg.violators_path is not None:
        return cfg.violators_path
    if cfg.output_path is not None:
        return cfg.output_path + ".violators.jsonl"
    return None


def render_csv(rows: list[SweepRow]) -> str:
    lines = ["prime_powers,total,passing,t2_violating"]
    for r in rows:
        label = "{" + ",".join(str(s) for s in r.prime_powers) + "}"
        lines.append(f'"{label}",{r.total},{r.passing},{r.t2_violating}')
    return "\n".join(lines) + "\n"


def render_violators(rows: list[SweepRow]) -> str:
    lines = []
    for r in rows:
        for mask, rep in r.violators:
            lines.append(json.dumps({"H": format(mask, "#x"), "report": rep}))
    return "\n".join(lines) + ("\n" if lines else "")


def _write_outputs(cfg: SweepConfig, rows: list[SweepRow]) -> None:
    if cfg.output_path is not None:
        Path(cfg.output_path).write_text(render_csv(rows))
    vpath = _violators_path(cfg)
    if vpath is not None:
        Path(vpath).write_text(render_violators(rows))


# --- the driver ------------------------------------------------------------


def run_sweep(
    cfg: SweepConfig,
    *,
    resume: bool = True,
    stop_after: int | None = None,
    checkpoint_every: int = CHECKPOINT_EVERY,
    jobs: int = 1,
    progress=None,
) -> list[SweepRow]:
    """Run the sweep; returns one SweepRow per completed selection.

    Resumes from cfg.checkpoint_path when it matches the configuration.
    stop_after bounds the number of candidates processed in this invocation
    (rounded up to a checkpoint block); a stopped run returns only the rows
    finished so far and leaves the rest in the checkpoint.  jobs > 1 fans
    blocks out to worker processes; results are folded in counter order, so
    output is independent of scheduling.
    """
    lo0, hi0 = _shard_range(cfg)
    fresh = {"passing": 0, "violating": 0,
             "full_passing": 0 if cfg.full_screen else None, "violators": []}

    completed: list[SweepRow] = []
    cur_row_state = dict(fresh, violators=[])
    cur_counter = lo0
    start_index = 0
    ckpt = _load_checkpoint(cfg) if resume else None
    if ckpt is not None:
        for row, state in ckpt["completed_rows"]:
            completed.append(_make_row(cfg, row, state, hi0 - lo0))
        start_index = len(completed)
        if ckpt["completed"]:
            _finish(cfg, completed)
            return completed
        if ckpt["current_row"] is not None:
            if tuple(ckpt["current_row"]) != cfg.prime_power_selection[start_index]:
                raise CheckpointError(
                    f"{cfg.checkpoint_path}: current row {ckpt['current_row']} is not "
                    f"the next unfinished selection"
                )
            _, cur_row_state = _parse_row_state(ckpt["row_state"])
            cur_counter = ckpt["counter"]

    pool = Pool(jobs) if jobs > 1 else None
    processed = 0
    row: tuple[int, ...] | None = None
    state = cur_row_state
    counter = cur_counter
    try:
        for idx in range(start_index, len(cfg.prime_power_selection)):
            row = cfg.prime_power_selection[idx]
            state = cur_row_state if idx == start_index else dict(fresh, violators=[])
            counter = cur_counter if idx == start_index else lo0
            while counter < hi0:
                batch = []
                c = counter
                while c < hi0 and len(batch) < max(jobs, 1):
                    h = min(c + checkpoint_every, hi0)
                    batch.append((cfg.mod.M, str(cfg.delta), row,
                                  cfg.float_prescreen, cfg.full_screen, c, h))
                    c = h
                if pool is not None:
                    results = pool.map(_block_worker, batch)  # input order == counter order
                else:
                    results = [_block_worker(a) for a in batch]
                for _blk_lo, (p, v, fp, viol) in results:
                    state["passing"] += p
                    state["violating"] += v
                    if fp is not None:
                        state["full_passing"] += fp
                    state["violators"].extend(viol)
                processed += c - counter
                counter = c
                _write_checkpoint(cfg, completed, row, counter, state, False)
                if progress is not None:
                    progress(row, counter - lo0, hi0 - lo0)
                if stop_after is not None and processed >= stop_after and counter < hi0:
                    return completed
            completed.append(_make_row(cfg, row, state, hi0 - lo0))
            _write_checkpoint(cfg, completed, None, lo0, dict(fresh, violators=[]),
                              len(completed) == len(cfg.prime_power_selection))
    except ResourceLimitError:
        if row is not None:  # clean partial flush before propagating
            _write_checkpoint(cfg, completed, row, counter, state, False)
        raise
    finally:
        if pool is not None:
            pool.close()
            pool.join()

    _finish(cfg, completed)
    return completed


def _make_row(cfg, row, state, total) -> SweepRow:
    return SweepRow(
        prime_powers=tuple(row),
        total=total,
        passing=state["passing"],
        t2_violating=state["violating"],
        violators=tuple((mask, rep) for mask, rep in state["violators"]),
        full_passing=state["full_passing"],
    )


def _finish(cfg: SweepConfig, rows: list[SweepRow]) -> None:
    if cfg.shard is None:
        _write_outputs(cfg, rows)
    elif cfg.output_path is not None:
        lo, hi = _shard_range(cfg)
        obj = {
            "config_hash": config_hash(cfg),
            "shard": list(cfg.shard),
            "lo": lo,
            "hi": hi,
            "rows": [
                {
                    "prime_powers": list(r.prime_powers),
                    "passing": r.passing,
                    "t2_violating": r.t2_violating,
                    "full_passing": r.full_passing,
                    "violators": [[mask, rep] for mask, rep in r.violators],
                }
                for r in rows
            ],
        }
        _write_json_atomic(cfg.output_path, obj)


def merge_shards(final_cfg: SweepConfig, shard_paths) -> list[SweepRow]:
    """Merge shard output files into final CSV/JSONL (written via final_cfg).

    Validates that every shard ran the same semantic configuration and that
    the counter ranges tile [0, 2^20) exactly; counts add, violator lists
    concatenate in counter order.
    """
    if final_cfg.shard is not None:
        raise ValueError("merge target must be an unsharded config")
    expect = config_hash(final_cfg)
    shards = []
    for path in shard_paths:
        obj = json.loads(Path(path).read_text())
        if obj["config_hash"] != expect:
            raise CheckpointError(
                f"{path}: shard config hash {obj['config_hash'][:12]}... does not "
                f"match merge target {expect[:12]}..."
            )
        shards.append(obj)
    shards.sort(key=lambda o: o["lo"])
    lo0, hi0 = final_cfg.effective_range
    pos = lo0
    for obj in shards:
        if obj["lo"] != pos:
            raise CheckpointError(
                f"shard ranges do not tile [{lo0}, {hi0}): gap or overlap at {pos} "
                f"(next shard starts at {obj['lo']})"
            )
        pos = obj["hi"]
    if pos != hi0:
        raise CheckpointError(f"shard ranges stop at {pos}, expected {hi0}")

    merged: list[SweepRow] = []
    for i, row in enumerate(final_cfg.prime_power_selection):
        passing = violating = 0
        full_passing = 0 if final_cfg.full_screen else None
        violators: list[tuple[int, dict]] = []
        for obj in shards:
            r = obj["rows"][i]
            if tuple(r["prime_powers"]) != row:
                raise CheckpointError(f"shard row order mismatch at index {i}")
            passing += r["passing"]
            violating += r["t2_violating"]
            if full_passing is not None:
                full_passing += r["full_passing"]
            violators.extend((mask, rep) for mask, rep in r["violators"])
        merged.append(SweepRow(row, hi0 - lo0, passing, violating, tuple(violators), full_passing))
    _write_outputs(final_cfg, merged)
    return merged
