"""Command-line frontend.

Every subcommand writes its report to stdout (JSON by default, --format human
for text; sweep emits CSV) and diagnostics to stderr.  Exit codes: 0 success,
1 a check failed or the answer is negative (sands/pdtile/screen/pair-from-H),
2 usage or invalid input.  No subcommand uses randomness, so identical
invocations produce identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .zm_arith import ClassSet, Modulus, build_modulus
from .step_fn import StepFunction, indicator, rat_str, total_weight
from .fourier import eigen_check, ft_step
from .cyclotomic import support_T2, t1t2_report
from .delsarte import (
    DELTA_PLUS,
    MINUS,
    PLUS,
    clique_number,
    delsarte_bound,
    delta_m,
    delta_screen,
    k_of,
    screen,
    standard_complement,
)
from .tiling import (
    construct_pd_pair,
    counterexample_pair,
    pd_tile_feasible,
    sands_check,
    div_star,
    is_tiling,
    tile_set,
    verify_functional_pd_tiling,
)
from . import sweep as sweep_mod


class CliError(Exception):
    """Invalid input discovered after argparse; maps to exit code 2."""


def _parse_H(mod: Modulus, text: str) -> ClassSet:
    """H as a comma-separated divisor list or a hex bitmask over the canonical
    (ascending) divisor order; both forms round-trip with the JSON output."""
    text = text.strip()
    try:
        if text.lower().startswith("0x"):
            return ClassSet.from_bitmask(mod, int(text, 16))
        members = frozenset(int(tok) for tok in text.split(","))
        return ClassSet(mod, members)
    except ValueError as exc:
        raise CliError(f"bad H spec {text!r}: {exc}") from exc


def _parse_delta(args, mod: Modulus, *, required: bool):
    if getattr(args, "delta", None) is not None:
        try:
            return Fraction(args.delta)
        except (ValueError, ZeroDivisionError) as exc:
            raise CliError(f"bad --delta {args.delta!r}: {exc}") from exc
    preset = getattr(args, "delta_preset", None)
    if preset == "m":
        return delta_m(mod)
    if preset == "screen":
        return delta_screen(mod)
    if required:
        return delta_screen(mod)
    return None


def _read_step(path: str) -> StepFunction:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        return StepFunction.from_json(text)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise CliError(f"{path} is not a step-function JSON file: {exc}") from exc


def _elements(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError as exc:
        raise CliError(f"bad element list {text!r}: {exc}") from exc


def _emit(args, obj: dict, human_lines) -> None:
    if args.format == "human":
        print("\n".join(human_lines))
    else:
        print(json.dumps(obj, indent=2))


def _classset_json(H: ClassSet) -> dict:
    return {"members": list(H.sorted_members()), "bitmask": format(H.bitmask(), "#x")}


# --- subcommand handlers ----------------------------------------------------


def _cmd_info(args) -> int:
    mod = build_modulus(args.M)
    obj = {
        "M": mod.M,
        "factors": [[p, a] for p, a in mod.factors],
        "divisors": list(mod.divisors),
        "class_sizes": {str(m): mod.class_size(m) for m in mod.divisors},
        "prime_powers": list(mod.prime_powers),
        "delta_m": rat_str(delta_m(mod)),
        "delta_screen": rat_str(delta_screen(mod)),
    }
    fact = " * ".join(f"{p}^{a}" if a > 1 else str(p) for p, a in mod.factors)
    lines = [
        f"M = {mod.M} = {fact}",
        f"divisors ({len(mod.divisors)}): {', '.join(map(str, mod.divisors))}",
        "class sizes: "
        + ", ".join(f"|R_{m}| = {mod.class_size(m)}" for m in mod.divisors),
        f"delta_M = {rat_str(delta_m(mod))}, delta_screen = {rat_str(delta_screen(mod))}",
    ]
    _emit(args, obj, lines)
    return 0


def _cmd_ft(args) -> int:
    f = _read_step(args.file)
    fh = ft_step(f)
    lam = eigen_check(f)
    obj = {
        "transform": json.loads(fh.to_json()),
        "eigenvalue": None if lam is None else rat_str(lam),
    }
    lines = [f"M = {f.mod.M}"]
    lines += [f"  (f^)_{e} = {rat_str(fh.coeffs[e])}" for e in f.mod.divisors]
    lines.append(f"eigenvalue: {'none' if lam is None else rat_str(lam)}")
    _emit(args, obj, lines)
    return 0


def _cmd_cyclo(args) -> int:
    if args.file is not None:
        f = _read_step(args.file)
        M = f.mod.M
    elif args.set is not None and args.M is not None:
        mod = build_modulus(args.M)
        f = indicator(mod, _elements(args.set))
        M = mod.M
    else:
        raise CliError("cyclo needs either FILE or --M with --set")
    if total_weight(f) <= 0:
        raise CliError("cyclo needs a function with positive total weight")
    rep = t1t2_report(f)
    obj = json.loads(rep.to_json())
    lines = [
        f"M = {M}",
        f"spectrum: {list(rep.spectrum)}",
        f"S_F: {list(rep.s_f)}",
        f"(T1): {'holds' if rep.t1 else 'fails'}",
        f"(T2): {'holds' if rep.t2 else f'fails (witness {rep.t2_witness})'}",
    ]
    _emit(args, obj, lines)
    return 0


def _cmd_delsarte(args) -> int:
    mod = build_modulus(args.M)
    H = _parse_H(mod, args.H)
    delta = _parse_delta(args, mod, required=False)
    d_plus = delsarte_bound(H, PLUS)
    d_minus = delsarte_bound(H, MINUS)
    obj = {
        "M": mod.M,
        "H": _classset_json(H),
        "k_H": k_of(H),
        "d_plus": rat_str(d_plus),
        "d_minus": rat_str(d_minus),
    }
    lines = [
        f"M = {mod.M}, H = {{{', '.join(map(str, H.sorted_members()))}}}, k_H = {k_of(H)}",
        f"D+(H)  = {rat_str(d_plus)}",
        f"D-(H)  = {rat_str(d_minus)}",
    ]
    if delta is not None:
        d_dp = delsarte_bound(H, DELTA_PLUS, delta=delta)
        obj["delta"] = rat_str(delta)
        obj["d_delta_plus"] = rat_str(d_dp)
        lines.append(f"Dd+(H) = {rat_str(d_dp)}  (delta = {rat_str(delta)})")
    _emit(args, obj, lines)
    return 0


def _cmd_screen(args) -> int:
    mod = build_modulus(args.M)
    H = _parse_H(mod, args.H)
    delta = _parse_delta(args, mod, required=True)
    rep = screen(H, delta, full=args.full)
    obj = {"M": mod.M, "H": _classset_json(H), "report": json.loads(rep.to_json())}
    state = "PASS" if rep.passes else "FAIL"
    lines = [
        f"M = {mod.M}, H = {{{', '.join(map(str, H.sorted_members()))}}}",
        f"k_H = {rep.k_h}, delta = {rat_str(rep.delta_used)}",
        f"Dd+(H) = {rat_str(rep.d_delta_plus)}",
        f"D-(H)  = {'unsolved' if rep.d_minus is None else rat_str(rep.d_minus)}",
        f"D+(H)  = {'unsolved' if rep.d_plus is None else rat_str(rep.d_plus)}",
        f"screen: {state}",
    ]
    _emit(args, obj, lines)
    return 0 if rep.passes else 1


def _cmd_sands(args) -> int:
    mod = build_modulus(args.M)
    A = tile_set(mod, _elements(args.A))
    B = tile_set(mod, _elements(args.B))
    ok = sands_check(A, B)
    tiles = is_tiling(A, B)
    obj = {
        "M": mod.M,
        "A": list(A.elements),
        "B": list(B.elements),
        "sands": ok,
        "is_tiling": tiles,
        "div_star_A": list(div_star(A).sorted_members()),
        "div_star_B": list(div_star(B).sorted_members()),
    }
    lines = [
        f"M = {mod.M}",
        f"Div*(A) = {obj['div_star_A']}",
        f"Div*(B) = {obj['div_star_B']}",
        f"Sands: {'yes' if ok else 'no'}   direct tiling check: {'yes' if tiles else 'no'}",
    ]
    _emit(args, obj, lines)
    return 0 if ok else 1


def _cmd_pdtile(args) -> int:
    mod = build_modulus(args.M)
    A = tile_set(mod, _elements(args.A))
    feasible, witness = pd_tile_feasible(A)
    obj = {
        "M": mod.M,
        "A": list(A.elements),
        "feasible": feasible,
        "witness": None if witness is None else json.loads(witness.to_json()),
    }
    lines = [f"M = {mod.M}, A = {list(A.elements)}", f"pd-tiling complement: {'exists' if feasible else 'none'}"]
    if witness is not None:
        lines += [f"  c_{m} = {rat_str(c)}" for m, c in sorted(witness.coeffs.items()) if c]
    _emit(args, obj, lines)
    return 0 if feasible else 1


def _cmd_counterexample(args) -> int:
    try:
        f, g = counterexample_pair(args.p, args.q)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    obj = {
        "M": f.mod.M,
        "f": json.loads(f.to_json()),
        "g": json.loads(g.to_json()),
    }
    lines = [f"M = {f.mod.M} = {args.p}^4 * {args.q}^2"]
    code = 0
    if args.check:
        rep = verify_functional_pd_tiling(f, g)
        lam_f, lam_g = eigen_check(f), eigen_check(g)
        obj["check"] = {
            "report": json.loads(rep.to_json()),
            "eigenvalue_f": None if lam_f is None else rat_str(lam_f),
            "eigenvalue_g": None if lam_g is None else rat_str(lam_g),
            "t2_witness_f": t1t2_report(f).t2_witness,
            "t2_witness_g": t1t2_report(g).t2_witness,
        }
        ok = (
            rep.valid
            and rep.t1_f
            and rep.t1_g
            and not rep.t2_f
            and not rep.t2_g
            and lam_f == lam_g == args.p * args.p * args.q
        )
        lines.append(f"valid pd pair: {rep.valid}; eigenvalues {lam_f}, {lam_g}")
        lines.append(
            f"(T1) f/g: {rep.t1_f}/{rep.t1_g}; (T2) f/g: {rep.t2_f}/{rep.t2_g}"
        )
        code = 0 if ok else 1
    _emit(args, obj, lines)
    return code


def _cmd_pair_from_h(args) -> int:
    mod = build_modulus(args.M)
    H = _parse_H(mod, args.H)
    delta = _parse_delta(args, mod, required=True)
    try:
        pair = construct_pd_pair(H, delta)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if pair is None:
        _emit(args, {"M": mod.M, "pair": None}, ["no pair found (LP infeasible)"])
        return 1
    f, g = pair
    rep = verify_functional_pd_tiling(f, g)
    obj = {
        "M": mod.M,
        "f": json.loads(f.to_json()),
        "g": json.loads(g.to_json()),
        "report": json.loads(rep.to_json()),
    }
    lines = [
        f"M = {mod.M}: pair constructed, valid = {rep.valid}",
        f"(T1) f/g: {rep.t1_f}/{rep.t1_g}; (T2) f/g: {rep.t2_f}/{rep.t2_g}",
    ]
    _emit(args, obj, lines)
    return 0 if rep.valid else 1


def _cmd_clique(args) -> int:
    mod = build_modulus(args.M)
    H = _parse_H(mod, args.H)
    omega = clique_number(H)
    obj = {"M": mod.M, "H": _classset_json(H), "omega": omega}
    _emit(args, obj, [f"omega(Gamma_H) = {omega}"])
    return 0


def _parse_row(text: str):
    if text == "all":
        return "all"
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError as exc:
        raise CliError(f"bad --row {text!r}: {exc}") from exc


def _cmd_sweep(args) -> int:
    mod = build_modulus(args.M)
    delta = _parse_delta(args, mod, required=True)
    shard = None
    if args.shard is not None:
        try:
            i, n = args.shard.split("/")
            shard = (int(i), int(n))
        except ValueError as exc:
            raise CliError(f"bad --shard {args.shard!r}; expected i/n") from exc
    counter_slice = None
    if args.slice is not None:
        try:
            lo, hi = args.slice.split(":")
            counter_slice = (int(lo), int(hi))
        except ValueError as exc:
            raise CliError(f"bad --slice {args.slice!r}; expected lo:hi") from exc
    try:
        cfg = sweep_mod.sweep_config(
            args.M,
            delta=delta,
            rows=_parse_row(args.row),
            float_prescreen=not args.no_prescreen,
            full_screen=args.full_screen,
            shard=shard,
            counter_slice=counter_slice,
            checkpoint_path=args.checkpoint
            or (args.out + ".ckpt" if args.out else None),
            output_path=args.out,
            violators_path=args.violators,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc

    if args.merge:
        try:
            rows = sweep_mod.merge_shards(cfg, args.merge)
        except (sweep_mod.CheckpointError, OSError, ValueError) as exc:
            raise CliError(str(exc)) from exc
        sys.stdout.write(sweep_mod.render_csv(rows))
        return 0

    def progress(row, done, total):
        print(f"row {{{','.join(map(str, row))}}}: {done}/{total}", file=sys.stderr)

    try:
        rows = sweep_mod.run_sweep(cfg, jobs=args.jobs, progress=progress,
                                   stop_after=args.stop_after)
    except sweep_mod.CheckpointError as exc:
        raise CliError(str(exc)) from exc
    if cfg.shard is None:
        sys.stdout.write(sweep_mod.render_csv(rows))
        if cfg.full_screen:
            for r in rows:
                print(
                    f"full screen (Dd+, D+, D- all = k): {r.full_passing} of {r.passing}",
                    file=sys.stderr,
                )
    else:
        print(f"shard {cfg.shard[0]}/{cfg.shard[1]} written to {cfg.output_path}",
              file=sys.stderr)
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="steptile",
        description="Exact step-function Fourier analysis, Delsarte LP bounds, "
        "and pd-tilings of Z_M.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def add(name, func, help_, fmt=True):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        if fmt:
            p.add_argument("--format", choices=("json", "human"), default="json")
        return p

    p = add("info", _cmd_info, "modulus profile: divisors, class sizes, presets")
    p.add_argument("M", type=int)

    p = add("ft", _cmd_ft, "transform a step function (JSON file or - for stdin)")
    p.add_argument("file")

    p = add("cyclo", _cmd_cyclo, "cyclotomic spectrum and (T1)/(T2) report")
    p.add_argument("file", nargs="?", help="step-function JSON file or - for stdin")
    p.add_argument("--M", type=int, help="modulus when using --set")
    p.add_argument("--set", help="comma-separated elements of a subset of Z_M")

    for name, func, help_ in (
        ("delsarte", _cmd_delsarte, "exact Delsarte bounds D+, D- (and Dd+ with --delta)"),
        ("screen", _cmd_screen, "two-LP screen: Dd+(H) = D-(H) = k_H"),
        ("clique", _cmd_clique, "exact clique number of the Cayley graph Gamma_H"),
    ):
        p = add(name, func, help_)
        p.add_argument("--M", type=int, required=True)
        p.add_argument("--H", required=True,
                       help="divisor list '36,12,1' or hex bitmask '0x401'")
        p.add_argument("--delta", help="rational like 1/46656")
        p.add_argument("--delta-preset", choices=("m", "screen"))
        if name == "screen":
            p.add_argument("--full", action="store_true",
                           help="also solve D+ exactly")

    p = add("sands", _cmd_sands, "Sands' criterion for a candidate tiling pair")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("A", help="comma-separated elements, e.g. 0,1,2")
    p.add_argument("B")

    p = add("pdtile", _cmd_pdtile, "does A admit a pd-tiling complement?")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("A", help="comma-separated elements containing 0")

    p = add("counterexample", _cmd_counterexample,
            "the explicit pair on Z_{p^4 q^2} (requires p < q < p^2)")
    p.add_argument("-p", type=int, required=True)
    p.add_argument("-q", type=int, required=True)
    p.add_argument("--check", action="store_true",
                   help="verify the pair and the (T1)/(T2) verdicts; exit 1 on failure")

    p = add("pair-from-H", _cmd_pair_from_h,
            "construct a functional pd-tiling from a screened H")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--H", required=True)
    p.add_argument("--delta", help="rational like 1/46656")
    p.add_argument("--delta-preset", choices=("m", "screen"))

    p = add("sweep", _cmd_sweep, "screen 2^20 candidate H per prime-power row", fmt=False)
    p.add_argument("--M", type=int, default=11025)
    p.add_argument("--row", default="all", help="'3,5,7' or 'all'")
    p.add_argument("--out", help="CSV output path (violators JSONL alongside)")
    p.add_argument("--violators", help="violators JSONL path override")
    p.add_argument("--checkpoint", help="checkpoint path (default: OUT.ckpt)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--delta", help="rational; default delta_screen")
    p.add_argument("--delta-preset", choices=("m", "screen"))
    p.add_argument("--no-prescreen", action="store_true",
                   help="skip the floating prescreen; exact LPs on every candidate")
    p.add_argument("--full-screen", action="store_true",
                   help="also solve D+ per candidate and report alongside")
    p.add_argument("--shard", help="i/n: run the i-th of n contiguous counter ranges")
    p.add_argument("--slice", help="lo:hi counter sub-range (testing/experiments)")
    p.add_argument("--stop-after", type=int,
                   help="stop after this many candidates (checkpoint and exit)")
    p.add_argument("--merge", nargs="+", metavar="SHARD_JSON",
                   help="merge shard outputs into the final CSV/JSONL")
    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
