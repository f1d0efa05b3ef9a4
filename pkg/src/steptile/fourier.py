"""Exact Fourier analysis of step functions at divisor-class resolution.

With the convention f^(xi) = sum_z f(z) e^{-2 pi i z xi / M}, the transform of a
class indicator 1_{R_m} at xi depends only on e = gcd(xi, M):

    T[e, m] = sum_{d | gcd(M/m, e)} mu(M/(m d)) d            (a Ramanujan sum)

so the transform of any step function is again a step function, computed by one
integer matrix-vector product.  Individual xi values are never materialized.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

from .zm_arith import ClassSet, Modulus
from .step_fn import StepFunction


@dataclass(frozen=True)
class StepFourierMatrix:
    """T[e][m] indexed by divisor position (rows: frequency class e, cols: class m)."""

    mod: Modulus
    rows: tuple[tuple[int, ...], ...]

    def entry(self, e: int, m: int) -> int:
        idx = self.mod.divisor_index
        return self.rows[idx(e)][idx(m)]


@lru_cache(maxsize=None)
def ft_class_matrix(mod: Modulus) -> StepFourierMatrix:
    """Build T once per modulus; integer entries, T[M, m] = phi(M/m), T[e, M] = 1."""
    M = mod.M
    rows = []
    for e in mod.divisors:
        row = []
        for m in mod.divisors:
            g = gcd(M // m, e)
            acc = 0
            for d in mod.divisors:  # divisors of g are divisors of M
                if g % d == 0:
                    acc += mod.mu[M // (m * d)] * d
            row.append(acc)
        rows.append(tuple(row))
    return StepFourierMatrix(mod, tuple(rows))


def ft_step(f: StepFunction) -> StepFunction:
    """(f^)_e = sum_m c_m T[e, m].  Applied twice gives M * f."""
    mod = f.mod
    T = ft_class_matrix(mod)
    vec = f.vector()
    out = {}
    for i, e in enumerate(mod.divisors):
        row = T.rows[i]
        out[e] = sum((c * t for c, t in zip(vec, row) if c != 0), Fraction(0))
    return StepFunction(mod, out)


def eigen_check(f: StepFunction):
    """Return lambda with f^ = lambda * f entrywise (exact), or None.

    For a nonzero eigenfunction lambda^2 = M.  Zero input is rejected: every
    scalar works, so the question is ill-posed.
    """
    if f.is_zero():
        raise ValueError("eigen_check: zero function has no well-defined eigenvalue")
    fh = ft_step(f)
    lam = None
    for d in f.mod.divisors:
        c, ch = f.coeffs[d], fh.coeffs[d]
        if c == 0:
            if ch != 0:
                return None
            continue
        ratio = ch / c
        if lam is None:
            lam = ratio
        elif ratio != lam:
            return None
    return lam


def ft_support(f: StepFunction) -> ClassSet:
    """Divisors e with (f^)_e != 0, as a ClassSet (contains M whenever weight > 0)."""
    fh = ft_step(f)
    members = {e for e in f.mod.divisors if fh.coeffs[e] != 0}
    if f.mod.M not in members:
        # (f^)_M is the total weight; a transform vanishing at 0 is not a
        # class set (those must contain the class of 0)
        raise ValueError("ft_support: transform vanishes at 0, not a class set")
    return ClassSet(f.mod, frozenset(members))
