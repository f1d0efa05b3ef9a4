"""Tile sets, Sands' criterion, pd-tilings and the p^4 q^2 counterexample pair.

A pd-tiling complement of A is f >= 0 with f(0) = 1, f^ >= 0 and 1_A * f = 1;
a functional pd-tiling drops the indicator: f * g = 1 with both factors
nonnegative, positive definite and equal to 1 at 0.  All checks here are exact
and run at class resolution through the step-function transform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .zm_arith import ClassSet, Modulus, build_modulus
from .step_fn import DenseFunction, StepFunction, indicator, total_weight
from .fourier import ft_class_matrix, ft_step
from .cyclotomic import divides, t1t2_report
from .ratlp import EQ, GE, LpProblem, solve
from .delsarte import delta_screen, k_of, screen, standard_complement


@dataclass(frozen=True)
class TileSet:
    """A subset of Z_M normalized to contain 0, elements sorted."""

    mod: Modulus
    elements: tuple[int, ...]

    def __post_init__(self) -> None:
        els = self.elements
        if not els or els[0] != 0:
            raise ValueError("tile sets are normalized to contain 0 (sorted first)")
        if list(els) != sorted(set(els)):
            raise ValueError("elements must be sorted and distinct")
        if els[-1] >= self.mod.M:
            raise ValueError("element out of range")

    def indicator(self) -> DenseFunction:
        return indicator(self.mod, self.elements)

    def to_json(self) -> str:
        return json.dumps({"M": self.mod.M, "elements": list(self.elements)})

    @staticmethod
    def from_json(text: str) -> "TileSet":
        obj = json.loads(text)
        mod = build_modulus(int(obj["M"]))
        return TileSet(mod, tuple(sorted(int(x) % mod.M for x in obj["elements"])))

    def __repr__(self) -> str:
        return f"TileSet(M={self.mod.M}, {{{', '.join(map(str, self.elements))}}})"


def tile_set(mod_or_m, elements) -> TileSet:
    mod = mod_or_m if isinstance(mod_or_m, Modulus) else build_modulus(mod_or_m)
    return TileSet(mod, tuple(sorted({e % mod.M for e in elements})))


def div_star(A: TileSet) -> ClassSet:
    """Div*(A): the classes hit by gcd(a - a', M); contains M (a = a')."""
    M = A.mod.M
    members = {M}
    els = A.elements
    for i, a in enumerate(els):
        for b in els[:i]:
            members.add(gcd(a - b, M))
    return ClassSet(A.mod, frozenset(members))


def is_tiling(A: TileSet, B: TileSet) -> bool:
    """Direct check: every x in Z_M has exactly one representation a + b."""
    M = A.mod.M
    if A.mod.M != B.mod.M:
        raise ValueError("is_tiling: modulus mismatch")
    if len(A.elements) * len(B.elements) != M:
        return False
    seen = 0
    for a in A.elements:
        for b in B.elements:
            bit = 1 << ((a + b) % M)
            if seen & bit:
                return False
            seen |= bit
    return True


def sands_check(A: TileSet, B: TileSet) -> bool:
    """|A||B| = M and Div*(A), Div*(B) share only the class of 0."""
    if A.mod.M != B.mod.M:
        raise ValueError("sands_check: modulus mismatch")
    if len(A.elements) * len(B.elements) != A.mod.M:
        return False
    return div_star(A).members & div_star(B).members == {A.mod.M}


def _transform_lp(
    mod: Modulus,
    cols: tuple[int, ...],
    lower,
    zero_classes: frozenset[int],
    weight_target: Fraction,
):
    """Feasibility LP over step functions h with c_M = 1 and variables `cols`.

    Rows: (h^)_e == 0 on zero_classes, (h^)_M == weight_target, (h^)_e >= 0
    elsewhere.  Returns the witness StepFunction or None.  `cols` empty means
    h = delta_0 is the only candidate; it is checked directly.
    """
    T = ft_class_matrix(mod)
    idx = mod.divisor_index
    if not cols:
        ok = weight_target == 1 and not zero_classes  # delta_0 has h^ = 1 everywhere
        if not ok:
            return None
        coeffs = {d: Fraction(0) for d in mod.divisors}
        coeffs[mod.M] = Fraction(1)
        return StepFunction(mod, coeffs)
    col_idx = [idx(m) for m in cols]
    constraints = []
    for i, e in enumerate(mod.divisors):
        row = T.rows[i]
        vec = tuple(Fraction(row[j]) for j in col_idx)
        if e == mod.M:
            constraints.append((vec, EQ, weight_target - 1))
        elif e in zero_classes:
            constraints.append((vec, EQ, Fraction(-1)))
        else:
            constraints.append((vec, GE, Fraction(-1)))
    prob = LpProblem(
        n=len(cols),
        objective=tuple(Fraction(0) for _ in cols),
        constraints=tuple(constraints),
        bounds=tuple((lower, None) for _ in cols),
    )
    res = solve(prob)
    if res.status != "optimal":
        return None
    coeffs = {d: Fraction(0) for d in mod.divisors}
    coeffs[mod.M] = Fraction(1)
    for m, v in zip(cols, res.witness):
        coeffs[m] = v
    return StepFunction(mod, coeffs)


def pd_tile_feasible(A: TileSet):
    """(feasible, witness): does A admit a pd-tiling complement?

    Reduction to step functions: if any dense complement f exists, its unit
    average is again a complement (averaging preserves f >= 0, f(0) = 1,
    f^ >= 0, and 1_A * f = 1 because the support of 1_A^ is a union of
    classes); conversely a step witness is itself a dense complement.  So it
    suffices to solve one LP: find step f, c_m >= 0, c_M = 1, f^ >= 0, f^ = 0
    on supp(1_A^) - {0}, f^(0) = M/|A|.
    """
    mod = A.mod
    M = mod.M
    n = len(A.elements)
    if M % n:
        return False, None
    ind = A.indicator()
    # supp(1_A^) at class resolution: 1_A^ vanishes on R_s iff Phi_{M/s} | A(X)
    zero_classes = frozenset(
        s for s in mod.divisors if s != M and divides(ind, M // s)
    )
    supp = frozenset(d for d in mod.divisors if d != M) - zero_classes
    cols = tuple(m for m in mod.divisors if m != M)
    witness = _transform_lp(mod, cols, Fraction(0), supp, Fraction(M, n))
    return (witness is not None), witness


@dataclass(frozen=True)
class PdTilingReport:
    """Exact verification of f * g = 1 with both factors pd and unital."""

    valid: bool
    checks: dict[str, bool]
    t1_f: bool
    t2_f: bool
    t1_g: bool
    t2_g: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "valid": self.valid,
                "checks": self.checks,
                "t1_f": self.t1_f,
                "t2_f": self.t2_f,
                "t1_g": self.t1_g,
                "t2_g": self.t2_g,
            }
        )


def verify_functional_pd_tiling(f: StepFunction, g: StepFunction) -> PdTilingReport:
    """All five defining checks, exact; convolution is checked in the transform
    domain: f^ g^ must vanish off the class of 0 and the weights multiply to M."""
    if f.mod.M != g.mod.M:
        raise ValueError("verify_functional_pd_tiling: modulus mismatch")
    mod = f.mod
    fh, gh = ft_step(f), ft_step(g)
    checks = {
        "nonnegative": all(c >= 0 for c in f.coeffs.values())
        and all(c >= 0 for c in g.coeffs.values()),
        "unit_at_zero": f.coeffs[mod.M] == 1 and g.coeffs[mod.M] == 1,
        "transforms_nonnegative": all(c >= 0 for c in fh.coeffs.values())
        and all(c >= 0 for c in gh.coeffs.values()),
        "transform_supports_disjoint": all(
            fh.coeffs[e] * gh.coeffs[e] == 0 for e in mod.divisors if e != mod.M
        ),
        "weight_product": total_weight(f) * total_weight(g) == mod.M,
    }
    valid = all(checks.values())
    t1_f = t2_f = t1_g = t2_g = False
    if checks["nonnegative"]:
        if total_weight(f) > 0:
            rf = t1t2_report(f)
            t1_f, t2_f = rf.t1, rf.t2
        if total_weight(g) > 0:
            rg = t1t2_report(g)
            t1_g, t2_g = rg.t1, rg.t2
    return PdTilingReport(valid, checks, t1_f, t2_f, t1_g, t2_g)


def _require_prime(n: int, name: str) -> None:
    if n < 2 or any(n % k == 0 for k in range(2, int(n**0.5) + 1)):
        raise ValueError(f"{name} = {n} is not prime")


def counterexample_pair(p: int, q: int) -> tuple[StepFunction, StepFunction]:
    """The explicit functional pd-tiling pair on Z_{p^4 q^2} (p < q < p^2).

    Both functions are nonnegative transform eigenfunctions with eigenvalue
    p^2 q, their class supports partition the divisors (meeting only at the
    class of 0), both satisfy (T1) and both fail (T2).
    """
    _require_prime(p, "p")
    _require_prime(q, "q")
    if not p < q:
        raise ValueError(f"need p < q, got p = {p}, q = {q}")
    if not q < p * p:
        raise ValueError(f"need q < p^2, got q = {q} >= p^2 = {p * p}")
    M = p**4 * q**2
    mod = build_modulus(M)
    phi_q = q - 1
    phi_q2 = q * (q - 1)
    d = 2 * p * q - p * p - q  # positive since p(q-p) + q(p-1) > 0

    def cls(a: int, b: int) -> int:
        return M // (p**a * q**b)

    f_table = {
        cls(0, 0): Fraction(1),
        cls(0, 2): Fraction(q - p, phi_q2),
        cls(1, 1): Fraction(1, phi_q),
        cls(1, 2): Fraction(q - p, phi_q2),
        cls(2, 0): Fraction(q * q - p * q + p * p - q, p * phi_q2),
        cls(2, 1): Fraction(p * p - q, p * phi_q2),
        cls(3, 0): Fraction(q - p, p * phi_q),
        cls(4, 2): Fraction(1, p * p * phi_q),
    }
    g_table = {
        cls(0, 0): Fraction(1),
        cls(0, 1): Fraction(p * (q - p), d),
        cls(1, 0): Fraction(q * (p - 1), d),
        cls(2, 2): Fraction(1, d),
        cls(3, 1): Fraction(q, p * d),
        cls(3, 2): Fraction(p - 1, p * d),
        cls(4, 0): Fraction(q - p, p * d),
        cls(4, 1): Fraction(q - p, p * d),
    }
    f = StepFunction(mod, {m: f_table.get(m, Fraction(0)) for m in mod.divisors})
    g = StepFunction(mod, {m: g_table.get(m, Fraction(0)) for m in mod.divisors})
    return f, g


def standard_prime_power_tiling(p: int, alpha: int, J) -> tuple[TileSet, TileSet]:
    """The digit tiling of Z_{p^alpha}: C uses base-p digits at positions J,
    D the remaining positions; C + D = Z_{p^alpha} is verified directly."""
    _require_prime(p, "p")
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    J = frozenset(J)
    if not J <= set(range(1, alpha + 1)):
        raise ValueError(f"J must be a subset of 1..{alpha}")
    mod = build_modulus(p**alpha)

    def digit_set(positions) -> tuple[int, ...]:
        out = [0]
        for j in sorted(positions):
            out = [x + a * p ** (j - 1) for x in out for a in range(p)]
        return tuple(sorted(out))

    C = TileSet(mod, digit_set(J))
    D = TileSet(mod, digit_set(set(range(1, alpha + 1)) - J))
    if not is_tiling(C, D):
        raise AssertionError("digit construction failed to tile (bug)")
    return C, D


def construct_pd_pair(H: ClassSet, delta=None):
    """Build a functional pd-tiling (f, g) from a screened H, or None.

    f is supported in H with c_m >= delta there, f^ >= 0, f^ = 0 off H and
    f^(0) = k_H; g is supported in the standard complement H' with g^ >= 0,
    g^(0) = M/k_H, and g^ forced to vanish exactly on supp(f^) - {0} (this
    pairing makes f^ g^ = 0 off 0 and covers the degenerate ends H = {M},
    H = all divisors, where the static "f^ = 0 off H" reading has no witness).
    If the static f-program is infeasible the vanishing constraint on f^ is
    dropped and g absorbs the whole disjointness burden.  Infeasibility of
    both programs yields None — it never refutes anything.
    """
    mod = H.mod
    if delta is None:
        delta = delta_screen(mod)
    delta = Fraction(delta)
    rep = screen(H, delta)
    if not rep.passes:
        raise ValueError("construct_pd_pair: H does not pass the screen")
    k = k_of(H)
    Hp = standard_complement(H)
    off_H = frozenset(d for d in mod.divisors if d != mod.M and d not in H.members)
    f_cols = tuple(m for m in mod.divisors if m != mod.M and m in H.members)
    f = _transform_lp(mod, f_cols, delta, off_H, Fraction(k))
    if f is None:
        f = _transform_lp(mod, f_cols, delta, frozenset(), Fraction(k))
        if f is None:
            return None
    fh = ft_step(f)
    fh_supp = frozenset(e for e in mod.divisors if e != mod.M and fh.coeffs[e] != 0)
    g_cols = tuple(m for m in mod.divisors if m != mod.M and m in Hp.members)
    g = _transform_lp(mod, g_cols, Fraction(0), fh_supp, Fraction(mod.M, k))
    if g is None:
        return None
    return f, g
