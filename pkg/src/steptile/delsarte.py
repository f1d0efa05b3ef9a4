"""Delsarte-type LP bounds for unions of step classes H in Z_M.

Gamma_H is the Cayley graph on Z_M with x ~ y iff gcd(x - y, M) in H \\ {M}.
Three LP relaxations over step functions h in A(M) with h(0) = 1 bound its
clique number:

    D+(H):       max h^(0)  s.t.  h >= 0 supported in H, h^ >= 0
    D-(H):       max h^(0)  s.t.  h <= 0 off H, h^ >= 0
    Ddelta+(H):  as D+ but h >= delta on H

All three are class-resolution LPs (variables c_m, m != M; c_M = 1 fixed) and
are bounded by M, since h^(0) <= M h(0) whenever h^ >= 0.  Two named deltas
matter: delta_m = 1/(M phi(M)) and delta_screen = 1/(M^2 phi(M)); callers pick
one explicitly — there is no hidden default.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .zm_arith import ClassSet, Modulus
from .step_fn import StepFunction, rat_str
from .fourier import ft_class_matrix
from .ratlp import GE, LpProblem, ResourceLimitError, solve

_DEFAULT_CLIQUE_MAX_M = 200

PLUS, MINUS, DELTA_PLUS = "plus", "minus", "delta_plus"


class InfeasibleDeltaError(ValueError):
    """The Ddelta+ program is infeasible: delta is too large for this H."""


def delta_m(mod: Modulus) -> Fraction:
    """delta_M = 1/(M phi(M)) — the autocorrelation floor."""
    return Fraction(1, mod.M * mod.phi[mod.M])


def delta_screen(mod: Modulus) -> Fraction:
    """delta = 1/(M^2 phi(M)) — the screening constant."""
    return Fraction(1, mod.M * mod.M * mod.phi[mod.M])


def standard_complement(H: ClassSet) -> ClassSet:
    """H' = (divisors \\ H) + {M}; an involution on class sets containing M."""
    members = (frozenset(H.mod.divisors) - H.members) | {H.mod.M}
    return ClassSet(H.mod, members)


def k_of(H: ClassSet) -> int:
    """k_H = product of p over prime powers p^a with M/p^a in H.

    When each prime-power class lies in exactly one of H, H', k_H k_H' = M.
    """
    mod = H.mod
    k = 1
    for s in mod.prime_powers:
        if mod.M // s in H.members:
            p = next(p for p, _ in mod.factors if s % p == 0)
            k *= p
    return k


def _bound_problem(H: ClassSet, kind: str, delta) -> tuple[LpProblem, tuple[int, ...]]:
    """The LP for one Delsarte parameter; variables are c_m over `cols`.

    Objective: sum_m phi(M/m) c_m (the constant phi(1) c_M = 1 is added back by
    the caller).  Rows: (h^)_e = T[e, M] + sum_m T[e, m] c_m >= 0 for every
    frequency class e, i.e. sum_m T[e, m] c_m >= -1.
    """
    mod = H.mod
    T = ft_class_matrix(mod)
    idx = mod.divisor_index
    if kind in (PLUS, DELTA_PLUS):
        cols = tuple(m for m in mod.divisors if m != mod.M and m in H.members)
        lo = delta if kind == DELTA_PLUS else Fraction(0)
        bounds = tuple((lo, None) for _ in cols)
    elif kind == MINUS:
        cols = tuple(m for m in mod.divisors if m != mod.M)
        bounds = tuple(
            (None, None) if m in H.members else (None, Fraction(0)) for m in cols
        )
    else:
        raise ValueError(f"unknown Delsarte kind {kind!r}")
    if not cols:  # H = {M}: h = delta_0 is the only candidate, value 1
        return None, cols
    col_idx = [idx(m) for m in cols]
    constraints = []
    for row in T.rows:
        constraints.append(
            (tuple(Fraction(row[j]) for j in col_idx), GE, Fraction(-1))
        )
    objective = tuple(Fraction(mod.class_size(m)) for m in cols)
    return (
        LpProblem(n=len(cols), objective=objective, constraints=tuple(constraints), bounds=bounds),
        cols,
    )


def delsarte_bound(H: ClassSet, kind: str, delta=None) -> Fraction:
    """Exact value of D+(H), D-(H) or Ddelta+(H).

    plus/minus are always feasible (h = delta_0); delta_plus raises
    InfeasibleDeltaError when delta is too large.
    """
    if kind == DELTA_PLUS:
        if delta is None or delta <= 0:
            raise ValueError("delta_plus needs a positive delta")
        delta = Fraction(delta)
    elif delta is not None:
        raise ValueError(f"delta only applies to delta_plus, not {kind!r}")
    prob, _ = _bound_problem(H, kind, delta)
    if prob is None:
        return Fraction(1)
    res = solve(prob)
    if res.status == "infeasible":
        if kind == DELTA_PLUS:
            raise InfeasibleDeltaError(f"delta = {delta} admits no witness for this H")
        raise AssertionError(f"{kind} program cannot be infeasible (bug)")
    assert res.status == "optimal", "Delsarte programs are bounded by M"
    return Fraction(1) + res.value


def bound_witness(H: ClassSet, kind: str, delta=None):
    """(value, StepFunction witness) for the optimum; used by pair construction."""
    if kind == DELTA_PLUS:
        delta = Fraction(delta)
    prob, cols = _bound_problem(H, kind, delta)
    mod = H.mod
    coeffs = {d: Fraction(0) for d in mod.divisors}
    coeffs[mod.M] = Fraction(1)
    if prob is None:
        return Fraction(1), StepFunction(mod, coeffs)
    res = solve(prob)
    if res.status != "optimal":
        if kind == DELTA_PLUS and res.status == "infeasible":
            raise InfeasibleDeltaError(f"delta = {delta} admits no witness for this H")
        raise AssertionError(f"unexpected LP status {res.status}")
    for m, v in zip(cols, res.witness):
        coeffs[m] = v
    return Fraction(1) + res.value, StepFunction(mod, coeffs)


def clique_number(H: ClassSet) -> int:
    """Exact omega(Gamma_H) by bitset branch-and-bound with a greedy-coloring
    bound.  Gamma_H is vertex-transitive, so some maximum clique contains 0;
    we fix it and search inside N(0).  Guarded by STEPTILE_CLIQUE_MAX_M."""
    mod = H.mod
    M = mod.M
    limit = int(os.environ.get("STEPTILE_CLIQUE_MAX_M", _DEFAULT_CLIQUE_MAX_M))
    if M > limit:
        raise ResourceLimitError(
            f"clique search refused for M={M} > {limit} (set STEPTILE_CLIQUE_MAX_M)"
        )
    small = H.members - {M}
    if not small:
        return 1
    diff = 0
    for z in range(1, M):
        if gcd(z, M) in small:
            diff |= 1 << z
    full = (1 << M) - 1
    adj = [((diff << v) | (diff >> (M - v))) & full for v in range(M)]

    best = 1

    def expand(size: int, cand: int) -> None:
        nonlocal best
        if not cand:
            if size > best:
                best = size
            return
        # greedy coloring of the candidate subgraph: a clique takes at most one
        # vertex per color class, so color index bounds the achievable size
        order: list[int] = []
        colors: list[int] = []
        q = cand
        color = 0
        while q:
            color += 1
            avail = q
            while avail:
                v = (avail & -avail).bit_length() - 1
                bit = 1 << v
                avail &= ~adj[v] & ~bit
                q &= ~bit
                order.append(v)
                colors.append(color)
        for i in range(len(order) - 1, -1, -1):
            if size + colors[i] <= best:
                return
            v = order[i]
            expand(size + 1, cand & adj[v])
            cand &= ~(1 << v)

    expand(1, adj[0])
    return best


@dataclass(frozen=True)
class ScreenReport:
    """Outcome of the coincidence screen D^{delta+}(H) = D-(H) = k_H.

    Short-circuited fields are None; when both computed ends equal k_H, d_plus
    is pinned to k_H by monotonicity without a third solve.
    """

    k_h: int
    delta_used: Fraction
    d_delta_plus: Fraction | None
    d_plus: Fraction | None
    d_minus: Fraction | None
    passes: bool

    def to_json(self) -> str:
        def r(x):
            return None if x is None else rat_str(x)

        return json.dumps(
            {
                "k_H": self.k_h,
                "delta": rat_str(self.delta_used),
                "d_delta_plus": r(self.d_delta_plus),
                "d_plus": r(self.d_plus),
                "d_minus": r(self.d_minus),
                "passes": self.passes,
            }
        )


def screen(H: ClassSet, delta, full: bool = False) -> ScreenReport:
    """Cheapest-first coincidence screen.

    Default mode solves Ddelta+ and (only if it hits k_H) D-; D+ is sandwiched
    between them, so a third LP is unnecessary.  full=True solves all three
    regardless (used to cross-check the two-LP shortcut).
    """
    delta = Fraction(delta)
    k = k_of(H)
    kf = Fraction(k)
    ddp = dp = dm = None
    try:
        ddp = delsarte_bound(H, DELTA_PLUS, delta)
    except InfeasibleDeltaError:
        if not full:
            return ScreenReport(k, delta, None, None, None, False)
    if full:
        dp = delsarte_bound(H, PLUS)
        dm = delsarte_bound(H, MINUS)
        passes = ddp == kf and dp == kf and dm == kf
        return ScreenReport(k, delta, ddp, dp, dm, passes)
    if ddp != kf:
        return ScreenReport(k, delta, ddp, None, None, False)
    dm = delsarte_bound(H, MINUS)
    if dm != kf:
        return ScreenReport(k, delta, ddp, None, dm, False)
    # ddp = dm = k_H forces d_plus = k_H as well (monotone chain)
    return ScreenReport(k, delta, ddp, kf, dm, True)
