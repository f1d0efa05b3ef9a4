"""Rational functions on Z_M and the step-function algebra A(M).

A step function is constant on every step class R_m; it is determined by the
coefficient vector (c_m)_{m | M} with c_m = value on R_m.  All arithmetic here
is exact rational — the facts downstream are exact equalities, so no floats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .zm_arith import Modulus, build_modulus

Rat = Fraction


def rat_str(x: Fraction) -> str:
    """Render a rational as "num/den" (denominator always explicit)."""
    return f"{x.numerator}/{x.denominator}"


def parse_rat(s: str) -> Fraction:
    return Fraction(s)


@dataclass(frozen=True)
class DenseFunction:
    """A function Z_M -> Q given by its value vector, index = residue."""

    mod: Modulus
    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.values) != self.mod.M:
            raise ValueError(f"expected {self.mod.M} values, got {len(self.values)}")

    def value_at(self, z: int) -> Fraction:
        return self.values[z % self.mod.M]

    def __repr__(self) -> str:
        return f"DenseFunction(M={self.mod.M})"


@dataclass(frozen=True)
class StepFunction:
    """An element of A(M): coeffs[m] = value on the class R_m, every divisor present."""

    mod: Modulus
    coeffs: dict[int, Fraction]

    def __post_init__(self) -> None:
        if set(self.coeffs) != set(self.mod.divisors):
            raise ValueError("coefficient map must cover exactly the divisors of M")

    def value_at(self, z: int) -> Fraction:
        z %= self.mod.M
        return self.coeffs[gcd(z, self.mod.M)] if z else self.coeffs[self.mod.M]

    def as_dense(self) -> DenseFunction:
        vals = [self.value_at(z) for z in range(self.mod.M)]
        return DenseFunction(self.mod, tuple(vals))

    def vector(self) -> tuple[Fraction, ...]:
        """Coefficients in canonical (ascending-divisor) order."""
        return tuple(self.coeffs[d] for d in self.mod.divisors)

    def support(self) -> frozenset[int]:
        return frozenset(d for d in self.mod.divisors if self.coeffs[d] != 0)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs.values())

    def to_json(self) -> str:
        obj = {"M": self.mod.M, "coeffs": {str(d): rat_str(self.coeffs[d]) for d in self.mod.divisors}}
        return json.dumps(obj)

    @staticmethod
    def from_json(text: str) -> "StepFunction":
        obj = json.loads(text)
        mod = build_modulus(int(obj["M"]))
        raw = {int(k): parse_rat(v) for k, v in obj["coeffs"].items()}
        coeffs = {d: raw.get(d, Fraction(0)) for d in mod.divisors}
        extra = set(raw) - set(mod.divisors)
        if extra:
            raise ValueError(f"coefficients on non-divisors of {mod.M}: {sorted(extra)}")
        return StepFunction(mod, coeffs)

    def __repr__(self) -> str:
        parts = ", ".join(f"c_{d}={self.coeffs[d]}" for d in reversed(self.mod.divisors))
        return f"StepFunction(M={self.mod.M}; {parts})"


def step_from_vector(mod: Modulus, vec) -> StepFunction:
    """Build a step function from coefficients in canonical divisor order."""
    vec = [Fraction(v) for v in vec]
    if len(vec) != len(mod.divisors):
        raise ValueError("wrong vector length")
    return StepFunction(mod, dict(zip(mod.divisors, vec)))


def zero_step(mod: Modulus) -> StepFunction:
    return StepFunction(mod, {d: Fraction(0) for d in mod.divisors})


def delta_step(mod: Modulus) -> StepFunction:
    """The step function 1_{{0}} (c_M = 1, all other classes 0)."""
    coeffs = {d: Fraction(0) for d in mod.divisors}
    coeffs[mod.M] = Fraction(1)
    return StepFunction(mod, coeffs)


def const_step(mod: Modulus, value=1) -> StepFunction:
    return StepFunction(mod, {d: Fraction(value) for d in mod.divisors})


def indicator(mod: Modulus, elements) -> DenseFunction:
    vals = [Fraction(0)] * mod.M
    for a in elements:
        vals[a % mod.M] = Fraction(1)
    return DenseFunction(mod, tuple(vals))


def average_to_step(f: DenseFunction) -> StepFunction:
    """Class-mean projection onto A(M): c_m = (1/|R_m|) sum_{z in R_m} f(z).

    Equal to the unit-orbit average because the units act transitively on each
    class; the class mean costs O(M) instead of O(M phi(M)).  Idempotent on
    step functions.
    """
    mod = f.mod
    sums = {d: Fraction(0) for d in mod.divisors}
    for z in range(mod.M):
        sums[gcd(z, mod.M) if z else mod.M] += f.values[z]
    return StepFunction(mod, {d: sums[d] / mod.class_size(d) for d in mod.divisors})


def convolve(f: DenseFunction, g: DenseFunction) -> DenseFunction:
    """(f*g)(x) = sum_y f(y) g(x-y), exact.  Naive O(M^2); not on any hot path."""
    if f.mod.M != g.mod.M:
        raise ValueError("convolve: modulus mismatch")
    M = f.mod.M
    out = [Fraction(0)] * M
    fv, gv = f.values, g.values
    for y, fy in enumerate(fv):
        if fy == 0:
            continue
        for x in range(M):
            out[x] += fy * gv[x - y]  # negative index wraps mod M
    return DenseFunction(f.mod, tuple(out))


def autocorrelation_step(mod: Modulus, elements) -> StepFunction:
    """h_A = class average of (1/|A|) 1_A * 1_{-A}; h_A(0) = 1, supp h_A = Div*(A)."""
    A = sorted({a % mod.M for a in elements})
    if not A:
        raise ValueError("autocorrelation of an empty set")
    if 0 not in A:
        raise ValueError("autocorrelation requires 0 in A")
    M = mod.M
    # counts[z] = #{(a,a') in A^2 : a - a' = z}; class-sum it directly
    sums = {d: 0 for d in mod.divisors}
    for a in A:
        for b in A:
            z = (a - b) % M
            sums[gcd(z, M) if z else M] += 1
    n = len(A)
    return StepFunction(
        mod, {d: Fraction(sums[d], n * mod.class_size(d)) for d in mod.divisors}
    )


def fold(f, N: int):
    """Reduce f on Z_M to f_N on Z_N (N | M): f_N(z) = sum_{y = z mod N} f(y).

    Preserves total weight.  Step functions fold to step functions, and are
    folded at class resolution without materializing M values.
    """
    mod = f.mod
    if N < 1 or mod.M % N:
        raise ValueError(f"fold: {N} does not divide {mod.M}")
    target = build_modulus(N) if N >= 2 else None
    if isinstance(f, StepFunction):
        if N == 1:
            raise ValueError("fold: target modulus 1 is not representable")
        k = mod.M // N
        coeffs = {}
        for m in target.divisors:
            # representative m of the class R_m in Z_N; sum the M-level values
            # over its fiber {m + jN}
            acc = Fraction(0)
            for j in range(k):
                y = m % N + j * N
                acc += f.coeffs[gcd(y, mod.M) if y else mod.M]
            coeffs[m] = acc
        return StepFunction(target, coeffs)
    if not isinstance(f, DenseFunction):
        raise TypeError(f"fold: unsupported type {type(f).__name__}")
    if N == 1:
        raise ValueError("fold: target modulus 1 is not representable")
    vals = [Fraction(0)] * N
    for y, v in enumerate(f.values):
        vals[y % N] += v
    return DenseFunction(target, tuple(vals))


def total_weight(f) -> Fraction:
    """sum_z f(z); for step functions sum_m c_m phi(M/m)."""
    if isinstance(f, StepFunction):
        return sum((f.coeffs[d] * f.mod.class_size(d) for d in f.mod.divisors), Fraction(0))
    if isinstance(f, DenseFunction):
        return sum(f.values, Fraction(0))
    raise TypeError(f"total_weight: unsupported type {type(f).__name__}")
