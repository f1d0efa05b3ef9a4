"""Delsarte LP bounds, clique numbers, duality, and the coincidence screen."""

import itertools
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))
import oracles  # noqa: E402

from steptile import (  # noqa: E402
    ClassSet,
    build_modulus,
    clique_number,
    delsarte_bound,
    delta_m,
    delta_screen,
    ft_step,
    k_of,
    screen,
    standard_complement,
)
from steptile.delsarte import InfeasibleDeltaError, bound_witness  # noqa: E402
from steptile.ratlp import ResourceLimitError  # noqa: E402
from steptile.tiling import div_star, tile_set  # noqa: E402

F = Fraction


def H_of(mod, members):
    return ClassSet(mod, frozenset(members) | {mod.M})


def test_delta_constants():
    mod = build_modulus(12)
    assert delta_m(mod) == F(1, 12 * 4)
    assert delta_screen(mod) == F(1, 12 * 12 * 4)
    assert delta_screen(mod) < delta_m(mod)


def test_standard_complement_involution():
    mod = build_modulus(36)
    H = H_of(mod, {1, 4, 9})
    Hp = standard_complement(H)
    assert Hp.members == (set(mod.divisors) - {1, 4, 9}) | {36}
    assert standard_complement(Hp).members == H.members | {36}
    # complement of the full set is {M}; complement of {M} is everything
    full = ClassSet(mod, frozenset(mod.divisors))
    assert standard_complement(full).members == frozenset({36})
    assert standard_complement(ClassSet(mod, frozenset({36}))).members == frozenset(
        mod.divisors
    )


def test_k_of_examples():
    mod = build_modulus(900)
    H = H_of(mod, {450, 300, 180})  # M/2, M/3, M/5
    assert k_of(H) == 30
    assert k_of(ClassSet(mod, frozenset({900}))) == 1
    assert k_of(ClassSet(mod, frozenset(mod.divisors))) == 900
    # picking the square classes M/4, M/9, M/25 gives the same product
    assert k_of(H_of(mod, {225, 100, 36})) == 30


def test_bounds_trivial_class_sets():
    for M in (6, 12, 36):
        mod = build_modulus(M)
        only_zero = ClassSet(mod, frozenset({M}))
        full = ClassSet(mod, frozenset(mod.divisors))
        assert delsarte_bound(only_zero, "plus") == 1
        assert delsarte_bound(full, "plus") == M
        assert delsarte_bound(only_zero, "minus") == 1
        assert delsarte_bound(full, "minus") == M
        assert clique_number(only_zero) == 1
        assert clique_number(full) == M


def test_bounds_frozen_small_cases():
    # Z_6, H = {0} u R_2: the clique {0,2,4} realizes the tiling bound 3
    mod6 = build_modulus(6)
    H = H_of(mod6, {2})
    for kind in ("plus", "minus"):
        assert delsarte_bound(H, kind) == 3
    assert delsarte_bound(H, "delta_plus", delta_m(mod6)) == 3
    assert clique_number(H) == 3
    # Z_4, H = {0} u R_2 = {0, 2}: pair clique
    mod4 = build_modulus(4)
    H = H_of(mod4, {2})
    assert delsarte_bound(H, "plus") == 2
    assert delsarte_bound(H, "minus") == 2
    assert clique_number(H) == 2


def test_kind_validation():
    mod = build_modulus(12)
    H = H_of(mod, {1})
    with pytest.raises(ValueError):
        delsarte_bound(H, "plus", delta=F(1, 3))
    with pytest.raises(ValueError):
        delsarte_bound(H, "delta_plus")
    with pytest.raises(ValueError):
        delsarte_bound(H, "delta_plus", delta=0)
    with pytest.raises(ValueError):
        delsarte_bound(H, "spam")


def test_infeasible_delta_error():
    # Z_4, H = {0} u R_1: h^(2) = 1 - 2 c_1 >= 0 forces c_1 <= 1/2 < 1
    mod = build_modulus(4)
    H = H_of(mod, {1})
    with pytest.raises(InfeasibleDeltaError):
        delsarte_bound(H, "delta_plus", delta=1)
    # small delta is feasible
    assert delsarte_bound(H, "delta_plus", delta=delta_m(mod)) >= 1


def test_witness_properties():
    mod = build_modulus(36)
    rng = random.Random(36)
    divs = [d for d in mod.divisors if d != mod.M]
    dm = delta_m(mod)
    for _ in range(8):
        H = H_of(mod, rng.sample(divs, rng.randrange(0, len(divs))))
        for kind, delta in (("plus", None), ("minus", None), ("delta_plus", dm)):
            try:
                value, h = bound_witness(H, kind, delta)
            except InfeasibleDeltaError:
                continue
            assert h.coeffs[mod.M] == 1
            hat = ft_step(h)
            assert all(hat.coeffs[e] >= 0 for e in mod.divisors)
            assert value == 1 + sum(
                h.coeffs[m] * mod.class_size(m) for m in divs
            )
            assert value == delsarte_bound(H, kind, delta)
            if kind in ("plus", "delta_plus"):
                lo = delta if kind == "delta_plus" else 0
                for m in divs:
                    if m in H.members:
                        assert h.coeffs[m] >= lo
                    else:
                        assert h.coeffs[m] == 0
            else:
                for m in divs:
                    if m not in H.members:
                        assert h.coeffs[m] <= 0


@pytest.mark.parametrize("M", [12, 36, 60])
def test_duality_and_monotonicity_random(M):
    mod = build_modulus(M)
    rng = random.Random(M)
    divs = [d for d in mod.divisors if d != mod.M]
    dm = delta_m(mod)
    for _ in range(15):
        H = H_of(mod, rng.sample(divs, rng.randrange(0, len(divs))))
        Hp = standard_complement(H)
        dp = delsarte_bound(H, "plus")
        dmin = delsarte_bound(H, "minus")
        ddp = delsarte_bound(H, "delta_plus", dm)
        assert ddp <= dp <= dmin
        assert dmin * delsarte_bound(Hp, "plus") == M
        assert clique_number(H) <= dp


def test_plus_against_float_lp():
    # cross-check the exact optimum against HiGHS on the same LP
    from steptile import ft_class_matrix

    mod = build_modulus(60)
    rng = random.Random(601)
    divs = [d for d in mod.divisors if d != mod.M]
    T = ft_class_matrix(mod)
    for _ in range(10):
        members = rng.sample(divs, rng.randrange(1, len(divs)))
        H = H_of(mod, members)
        cols = [m for m in divs if m in H.members]
        col_idx = [mod.divisor_index(m) for m in cols]
        A_ub = [[-row[j] for j in col_idx] for row in T.rows]
        b_ub = [1.0] * len(T.rows)
        ref = oracles.lp_float(
            [-mod.class_size(m) for m in cols],
            A_ub=A_ub,
            b_ub=b_ub,
            bounds=[(0, None)] * len(cols),
        )
        exact = delsarte_bound(H, "plus")
        assert ref.status == 0
        assert abs(float(exact) - (1.0 - ref.fun)) <= 1e-7 * (1 + abs(ref.fun))


def test_clique_guard(monkeypatch):
    monkeypatch.setenv("STEPTILE_CLIQUE_MAX_M", "10")
    mod = build_modulus(12)
    with pytest.raises(ResourceLimitError):
        clique_number(H_of(mod, {1}))


def test_clique_vs_brute_force():
    # exhaustive check against itertools cliques on Z_12
    mod = build_modulus(12)
    M = 12
    divs = [d for d in mod.divisors if d != M]
    import math

    for r in range(len(divs) + 1):
        for members in itertools.combinations(divs, r):
            H = H_of(mod, members)
            allowed = set(members)
            best = 1
            verts = list(range(1, M))
            # brute force: grow cliques containing 0
            for size in range(2, M + 1):
                found = False
                for combo in itertools.combinations(verts, size - 1):
                    pts = (0,) + combo
                    if all(
                        math.gcd(a - b, M) in allowed
                        for a, b in itertools.combinations(pts, 2)
                    ):
                        found = True
                        break
                if found:
                    best = size
                else:
                    break
            assert clique_number(H) == best, members


def test_tiling_existence_iff_clique_product():
    # omega(H) * omega(H') = M exactly when some tiling has Div*(A) in H
    # and Div*(B) in H' - checked exhaustively for three moduli
    for M in (12, 16, 18):
        mod = build_modulus(M)
        tilings = oracles.all_tilings_cached(M)
        pairs = [
            (div_star(tile_set(M, A)).members, div_star(tile_set(M, B)).members)
            for A, B in tilings
        ]
        divs = [d for d in mod.divisors if d != M]
        for r in range(len(divs) + 1):
            for members in itertools.combinations(divs, r):
                H = H_of(mod, members)
                Hp = standard_complement(H)
                exists = any(
                    da <= H.members and db <= Hp.members for da, db in pairs
                )
                product = clique_number(H) * clique_number(Hp)
                assert exists == (product == M), (M, members, product)


def test_screen_passing_case():
    # transform support of the subgroup tiling 30Z at M = 900 passes at k = 30
    mod = build_modulus(900)
    H = ClassSet(mod, frozenset({30, 60, 90, 150, 180, 300, 450, 900}))
    assert k_of(H) == 30
    rep = screen(H, delta_screen(mod))
    assert rep.passes is True
    assert rep.k_h == 30
    assert rep.d_delta_plus == 30 and rep.d_minus == 30
    # the two-LP shortcut pins d_plus by the sandwich
    assert rep.d_plus == 30
    full = screen(H, delta_screen(mod), full=True)
    assert full.passes is True
    assert (full.d_delta_plus, full.d_plus, full.d_minus) == (30, 30, 30)


def test_screen_failing_case():
    mod = build_modulus(900)
    # {M} alone: k_H = 1 but D-({M}) = 1 = k... pick H with a mismatch:
    # full set has k = 900 but adding nothing: D = 900 = k -> passes, so use
    # H = {0} u R_1: k = 1, D(delta+) > 1
    H = ClassSet(mod, frozenset({1, 900}))
    rep = screen(H, delta_screen(mod))
    assert rep.passes is False
    assert rep.to_json()  # serializable either way
    obj = json.loads(rep.to_json())
    assert obj["passes"] is False


def test_screen_full_and_short_agree():
    mod = build_modulus(60)
    rng = random.Random(60)
    divs = [d for d in mod.divisors if d != mod.M]
    ds = delta_screen(mod)
    for _ in range(12):
        H = H_of(mod, rng.sample(divs, rng.randrange(0, len(divs))))
        short = screen(H, ds)
        full = screen(H, ds, full=True)
        assert short.passes == full.passes
        if short.passes:
            assert (short.d_delta_plus, short.d_plus, short.d_minus) == (
                full.d_delta_plus,
                full.d_plus,
                full.d_minus,
            )
