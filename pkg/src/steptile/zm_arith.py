"""Number-theoretic substrate for Z_M: factorization, divisors, phi, mu, step classes.

Everything downstream works at "class resolution": the step class of z in Z_M is
R_m = {z : gcd(z, M) = m}, indexed by the divisor m of M.  The classes partition
Z_M with |R_m| = phi(M/m), and R_M = {0}.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache

# Trial division is all we need at desk scale; refuse absurd inputs instead of
# silently spinning.  Override with STEPTILE_MAX_M for bigger experiments.
_DEFAULT_MAX_M = 10**7


def _max_modulus() -> int:
    return int(os.environ.get("STEPTILE_MAX_M", _DEFAULT_MAX_M))


@dataclass(frozen=True, eq=False)
class Modulus:
    """Immutable bundle of arithmetic data for one M.

    divisors are sorted ascending; every divisor-indexed structure in this
    package uses that order, so serialized artifacts are byte-stable.
    build_modulus is cached, so each M has one shared instance (identity
    equality/hashing is intended).
    """

    M: int
    factors: tuple[tuple[int, int], ...]  # (prime, exponent), primes increasing
    divisors: tuple[int, ...]
    phi: dict[int, int]  # d -> phi(d), for every d | M
    mu: dict[int, int]  # d -> mu(d), for every d | M

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    @property
    def prime_powers(self) -> tuple[int, ...]:
        """All p^a dividing M with a >= 1, sorted ascending."""
        pp = [p**a for p, n in self.factors for a in range(1, n + 1)]
        return tuple(sorted(pp))

    def divisor_index(self, d: int) -> int:
        return self._index[d]

    @property
    def _index(self) -> dict[int, int]:
        # lazily built; object.__setattr__ because the dataclass is frozen
        idx = self.__dict__.get("_index_cache")
        if idx is None:
            idx = {d: i for i, d in enumerate(self.divisors)}
            object.__setattr__(self, "_index_cache", idx)
        return idx

    def class_size(self, m: int) -> int:
        """|R_m| = phi(M/m)."""
        return self.phi[self.M // m]

    def __repr__(self) -> str:  # keep reprs short; divisor lists can be long
        fact = "*".join(f"{p}^{n}" if n > 1 else f"{p}" for p, n in self.factors)
        return f"Modulus({self.M}={fact})"


def _factorize(M: int) -> list[tuple[int, int]]:
    factors = []
    rem = M
    p = 2
    while p * p <= rem:
        if rem % p == 0:
            n = 0
            while rem % p == 0:
                rem //= p
                n += 1
            factors.append((p, n))
        p += 1 if p == 2 else 2
    if rem > 1:
        factors.append((rem, 1))
    return factors


@lru_cache(maxsize=None)
def build_modulus(M: int) -> Modulus:
    """Factor M and tabulate divisors, phi and mu.  Deterministic."""
    if not isinstance(M, int) or M < 2:
        raise ValueError(f"modulus must be an integer >= 2, got {M!r}")
    if M > _max_modulus():
        raise ValueError(
            f"modulus {M} exceeds the trial-division bound {_max_modulus()} "
            "(set STEPTILE_MAX_M to raise it)"
        )
    factors = _factorize(M)

    divisors = [1]
    for p, n in factors:
        divisors = [d * p**a for d in divisors for a in range(n + 1)]
    divisors.sort()

    def phi_of(d: int) -> int:
        out = d
        for p, _ in factors:
            if d % p == 0:
                out = out // p * (p - 1)
        return out

    def mu_of(d: int) -> int:
        m = 0
        for p, _ in factors:
            if d % p == 0:
                if d % (p * p) == 0:
                    return 0
                m += 1
        return -1 if m % 2 else 1

    phi = {d: phi_of(d) for d in divisors}
    mu = {d: mu_of(d) for d in divisors}
    return Modulus(M=M, factors=tuple(factors), divisors=tuple(divisors), phi=phi, mu=mu)


def class_of(z: int, mod: Modulus) -> int:
    """The divisor m with z in R_m, i.e. gcd(z, M); class_of(0) = M."""
    if not 0 <= z < mod.M:
        raise ValueError(f"residue {z} out of range for M={mod.M}")
    return math.gcd(z, mod.M) if z else mod.M


@dataclass(frozen=True)
class ClassSet:
    """A union of step classes H = U R_m, given by its divisor set; 0 in H always.

    The canonical bitmask puts bit i on divisor mod.divisors[i].
    """

    mod: Modulus
    members: frozenset[int]

    def __post_init__(self) -> None:
        if not self.members <= set(self.mod.divisors):
            bad = sorted(set(self.members) - set(self.mod.divisors))
            raise ValueError(f"not divisors of {self.mod.M}: {bad}")
        if self.mod.M not in self.members:
            raise ValueError("class set must contain the class of 0 (divisor M)")

    def bitmask(self) -> int:
        mask = 0
        for i, d in enumerate(self.mod.divisors):
            if d in self.members:
                mask |= 1 << i
        return mask

    @staticmethod
    def from_bitmask(mod: Modulus, mask: int) -> "ClassSet":
        if mask < 0 or mask >> len(mod.divisors):
            raise ValueError(f"bitmask {mask:#x} out of range for {len(mod.divisors)} divisors")
        members = frozenset(d for i, d in enumerate(mod.divisors) if mask >> i & 1)
        return ClassSet(mod, members)

    def sorted_members(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))

    def __contains__(self, d: int) -> bool:
        return d in self.members

    def __repr__(self) -> str:
        return f"ClassSet(M={self.mod.M}, {{{', '.join(map(str, self.sorted_members()))}}})"
