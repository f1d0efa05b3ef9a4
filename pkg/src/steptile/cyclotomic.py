"""Cyclotomic divisibility of mask polynomials: cuboids, remainders, (T1)/(T2).

For f on Z_M with mask polynomial F(X) = sum f(z) X^z, divisibility Phi_d | F
(exponents mod X^M - 1) is decided by two routes:

* step functions: fold down to Z_d and evaluate a single d-cuboid
  Delta = prod_i (1 - X^{d/p_i}) at vertex 0 — sufficient for step functions
  (any one cuboid with a vertex at 0 works; we fix rho_i = 1 for
  reproducibility).  Cost: 2^(number of primes of d) lookups.
* dense functions: fold down to Z_d and take the exact polynomial remainder
  modulo Phi_d.  A single cuboid is NOT sufficient for general dense functions
  (see the tests for the standard witness 1_{{0,2}} on Z_6).

Folding first is sound in both routes because X^d = 1 modulo Phi_d, so
F mod Phi_d = (F mod X^d - 1) mod Phi_d.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product as iproduct
from math import lcm

from .zm_arith import ClassSet, Modulus, build_modulus
from .step_fn import DenseFunction, StepFunction, fold, total_weight


@lru_cache(maxsize=None)
def cyclotomic_poly(d: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_d, ascending degree; computed by iterated
    exact division of X^d - 1 by the Phi_e for proper divisors e | d."""
    if d < 1:
        raise ValueError("cyclotomic index must be >= 1")
    if d == 1:
        return (-1, 1)
    num = [0] * (d + 1)
    num[0], num[d] = -1, 1
    for e in range(1, d):
        if d % e == 0:
            num = _int_poly_div_exact(num, cyclotomic_poly(e))
    return tuple(num)


def _int_poly_div_exact(num: list[int], den: tuple[int, ...]) -> list[int]:
    """Exact division of integer polynomials, den monic; remainder must be 0."""
    num = list(num)
    dn = len(den) - 1
    out = [0] * (len(num) - dn)
    for i in range(len(num) - 1, dn - 1, -1):
        c = num[i]
        if c:
            out[i - dn] = c
            for j, a in enumerate(den):
                if a:
                    num[i - dn + j] -= c * a
    assert not any(num), "non-exact polynomial division"
    return out


@dataclass(frozen=True)
class Cuboid:
    """The multiset X^c prod_i (1 - X^{rho_i N/p_i}) on Z_N, N = mod.M."""

    mod: Modulus
    c: int
    rho: tuple[int, ...]

    def __post_init__(self) -> None:
        primes = self.mod.primes
        if len(self.rho) != len(primes):
            raise ValueError("need one rho per distinct prime")
        for r, p in zip(self.rho, primes):
            if not 1 <= r <= p - 1:
                raise ValueError(f"rho={r} out of range for prime {p}")
        if not 0 <= self.c < self.mod.M:
            raise ValueError("base vertex out of range")

    @property
    def offsets(self) -> tuple[int, ...]:
        N = self.mod.M
        return tuple(r * (N // p) for r, p in zip(self.rho, self.mod.primes))


def cuboid_eval(f, delta: Cuboid) -> Fraction:
    """F[Delta] = sum over vertices with alternating signs.  f may be dense or step."""
    if f.mod.M != delta.mod.M:
        raise ValueError("cuboid_eval: modulus mismatch")
    N = f.mod.M
    offs = delta.offsets
    acc = Fraction(0)
    for eps in iproduct((0, 1), repeat=len(offs)):
        v = (delta.c + sum(e * o for e, o in zip(eps, offs))) % N
        term = f.value_at(v)
        acc += -term if sum(eps) % 2 else term
    return acc


def _canonical_cuboid(mod: Modulus) -> Cuboid:
    return Cuboid(mod, 0, (1,) * len(mod.primes))


def divides(f, d: int) -> bool:
    """Phi_d | F?  (d | M, d > 1.)  Step input: fold + one cuboid; dense input:
    fold + exact remainder."""
    M = f.mod.M
    if d <= 1 or M % d:
        raise ValueError(f"divides: need a divisor d > 1 of {M}, got {d}")
    fd = fold(f, d) if d != M else f
    if isinstance(fd, StepFunction):
        return cuboid_eval(fd, _canonical_cuboid(fd.mod)) == 0
    rem = _remainder_at_level(fd)
    return not rem


def remainder_oracle(f: DenseFunction, d: int) -> tuple[Fraction, ...]:
    """Exact remainder of F(X) modulo Phi_d, ascending degree, trailing zeros
    trimmed (empty tuple = divisible).  d | M required; d = 1 gives (F(1),)."""
    M = f.mod.M
    if d < 1 or M % d:
        raise ValueError(f"remainder_oracle: need a divisor of {M}, got {d}")
    if d == 1:
        w = total_weight(f)
        return (w,) if w else ()
    fd = fold(f, d) if d != M else f
    return _remainder_at_level(fd)


def _remainder_at_level(fd: DenseFunction) -> tuple[Fraction, ...]:
    """Remainder of the mask polynomial of fd modulo Phi_d, d = fd's modulus."""
    d = fd.mod.M
    phi = cyclotomic_poly(d)
    deg = len(phi) - 1
    den = lcm(*(v.denominator for v in fd.values))
    coeffs = [int(v * den) for v in fd.values]
    # reduce in place against the monic phi, touching only its nonzero terms
    lower = [(j, a) for j, a in enumerate(phi[:-1]) if a]
    for i in range(len(coeffs) - 1, deg - 1, -1):
        c = coeffs[i]
        if c:
            coeffs[i] = 0
            for j, a in lower:
                coeffs[i - deg + j] -= c * a
    rem = coeffs[:deg]
    while rem and rem[-1] == 0:
        rem.pop()
    return tuple(Fraction(c, den) for c in rem)


@dataclass(frozen=True)
class CycloReport:
    """Spectrum of cyclotomic divisors plus the (T1)/(T2) verdict."""

    spectrum: tuple[int, ...]
    s_f: tuple[int, ...]
    t1: bool
    t2: bool
    t2_witness: int | None

    def to_json(self) -> str:
        return json.dumps(
            {
                "spectrum": list(self.spectrum),
                "S_F": list(self.s_f),
                "t1": self.t1,
                "t2": self.t2,
                "t2_witness": self.t2_witness,
            }
        )


def t1t2_report(f) -> CycloReport:
    """CycloReport for nonnegative f with positive weight.

    (T1): total weight equals prod of p over the prime powers p^a in S_F
    (each Phi_{p^a}(1) = p).  (T2): for every choice of >= 2 prime powers from
    S_F with pairwise distinct primes, their product is again a cyclotomic
    divisor; the witness is the first failure in ascending product order.
    """
    mod = f.mod
    w = total_weight(f)
    if w <= 0:
        raise ValueError("t1t2_report: needs positive total weight")
    spectrum = tuple(d for d in mod.divisors if d > 1 and divides(f, d))
    spec_set = set(spectrum)
    s_f = tuple(s for s in mod.prime_powers if s in spec_set)

    t1_product = 1
    for s in s_f:
        p = min(p for p, _ in mod.factors if s % p == 0)
        t1_product *= p
    t1 = w == t1_product

    by_prime: dict[int, list[int]] = {}
    for s in s_f:
        p = next(p for p, _ in mod.factors if s % p == 0)
        by_prime.setdefault(p, []).append(s)
    primes = sorted(by_prime)
    products = []
    for k in range(2, len(primes) + 1):
        for combo in combinations(primes, k):
            for choice in iproduct(*(by_prime[p] for p in combo)):
                acc = 1
                for s in choice:
                    acc *= s
                products.append(acc)
    t2_witness = None
    for s in sorted(products):
        if s not in spec_set:
            t2_witness = s
            break
    return CycloReport(spectrum, s_f, t1, t2_witness is None, t2_witness)


def support_T2(H: ClassSet) -> bool:
    """Support-level (T2) for a candidate transform support H.

    Reading H as supp of |1_A^|^2, Phi_s | A iff M/s is not in H.  Let S be the
    prime powers s with M/s not in H; the condition holds iff every product of
    >= 2 members of S with pairwise distinct primes also has M/product not in H.
    """
    mod = H.mod
    M = mod.M
    S = [s for s in mod.prime_powers if M // s not in H.members]
    by_prime: dict[int, list[int]] = {}
    for s in S:
        p = next(p for p, _ in mod.factors if s % p == 0)
        by_prime.setdefault(p, []).append(s)
    primes = sorted(by_prime)
    for k in range(2, len(primes) + 1):
        for combo in combinations(primes, k):
            for choice in iproduct(*(by_prime[p] for p in combo)):
                acc = 1
                for s in choice:
                    acc *= s
                if M // acc in H.members:
                    return False
    return True
