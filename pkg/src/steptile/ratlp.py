"""Exact rational simplex: maximize c.x subject to rational rows and bounds.

Dense two-phase tableau with Bland's anti-cycling rule, over exact rationals
(gmpy2.mpq when available, fractions.Fraction otherwise — numerators and
denominators stay normalized after every pivot because the scalar type reduces
canonically).  Problems in this package have <= ~30 variables and ~60 rows, so
no sparsity or revised-simplex machinery is warranted.

Deterministic: fixed variable/constraint order in, identical pivots out.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _Q = Fraction

LE, EQ, GE = "<=", "==", ">="

_DEFAULT_MAX_PIVOTS = 200_000


class ResourceLimitError(RuntimeError):
    """A configured resource ceiling (pivot count, modulus size, ...) was hit."""


def _max_pivots() -> int:
    return int(os.environ.get("STEPTILE_MAX_PIVOTS", _DEFAULT_MAX_PIVOTS))


@dataclass(frozen=True)
class LpProblem:
    """max objective . x subject to constraints and per-variable bounds.

    constraints: (coeffs, rel, rhs) with rel in {"<=", "==", ">="}.
    bounds: per variable (lb | None, ub | None); None = unbounded on that side.
    """

    n: int
    objective: tuple
    constraints: tuple
    bounds: tuple

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("LpProblem needs at least one variable")
        if len(self.objective) != self.n:
            raise ValueError("objective length mismatch")
        if len(self.bounds) != self.n:
            raise ValueError("bounds length mismatch")
        for coeffs, rel, _ in self.constraints:
            if len(coeffs) != self.n:
                raise ValueError("constraint length mismatch")
            if rel not in (LE, EQ, GE):
                raise ValueError(f"bad relation {rel!r}")
        if not self.constraints and all(b == (None, None) for b in self.bounds):
            raise ValueError("need at least one constraint or bound")


def problem(objective, constraints, bounds=None, n=None) -> LpProblem:
    """Convenience constructor taking plain lists; rationals coerced exactly."""
    obj = tuple(Fraction(c) for c in objective)
    n = n if n is not None else len(obj)
    cons = tuple(
        (tuple(Fraction(a) for a in coeffs), rel, Fraction(rhs))
        for coeffs, rel, rhs in constraints
    )
    if bounds is None:
        bounds = [(None, None)] * n
    bnds = tuple(
        (None if lo is None else Fraction(lo), None if hi is None else Fraction(hi))
        for lo, hi in bounds
    )
    return LpProblem(n=n, objective=obj, constraints=cons, bounds=bnds)


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None
    witness: tuple | None  # x assignment when optimal


def _pivot(rows, obj, basis, r, j):
    prow = rows[r]
    piv = prow[j]
    if piv != 1:
        inv = 1 / piv
        rows[r] = prow = [a * inv for a in prow]
    for i, row in enumerate(rows):
        if i != r:
            fac = row[j]
            if fac:
                rows[i] = [a - fac * b for a, b in zip(row, prow)]
    fac = obj[j]
    if fac:
        obj[:] = [a - fac * b for a, b in zip(obj, prow)]
    basis[r] = j


def _run_simplex(rows, obj, basis, budget):
    """Bland's rule iterations until optimal/unbounded; returns status string."""
    ncols = len(obj) - 1
    pivots = 0
    while True:
        enter = -1
        for j in range(ncols):
            if obj[j] > 0:
                enter = j
                break
        if enter < 0:
            return "optimal"
        best_r, best_ratio = -1, None
        for i, row in enumerate(rows):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[i] < basis[best_r])
                ):
                    best_r, best_ratio = i, ratio
        if best_r < 0:
            return "unbounded"
        _pivot(rows, obj, basis, best_r, enter)
        pivots += 1
        if pivots > budget:
            raise ResourceLimitError(
                f"simplex exceeded {budget} pivots (raise STEPTILE_MAX_PIVOTS)"
            )


def solve(p: LpProblem) -> LpResult:
    """Exact optimum of p.  The witness satisfies every constraint exactly."""
    budget = _max_pivots()
    zero, one = _Q(0), _Q(1)

    # --- substitute bounds away: internal columns y >= 0 ----------------------
    # each original variable maps to one of
    #   ("shift", lb, col):   x = lb + y
    #   ("neg", ub, col):     x = ub - y
    #   ("split", c+, c-):    x = y+ - y-        (free variable)
    col_of = []
    extra_rows = []  # (col, cap): y_col <= cap, from two-sided bounds
    ncols = 0
    for lo, hi in p.bounds:
        if lo is not None and hi is not None and lo > hi:
            return LpResult("infeasible", None, None)
        if lo is not None:
            col_of.append(("shift", _Q(lo), ncols))
            if hi is not None:
                extra_rows.append((ncols, _Q(hi) - _Q(lo)))
            ncols += 1
        elif hi is not None:
            col_of.append(("neg", _Q(hi), ncols))
            ncols += 1
        else:
            col_of.append(("split", ncols, ncols + 1))
            ncols += 2

    def to_cols(coeffs):
        """Rewrite a row over x into (row over y, constant term)."""
        row = [zero] * ncols
        const = zero
        for a, spec in zip(coeffs, col_of):
            if a == 0:
                continue
            a = _Q(a)
            if spec[0] == "shift":
                const += a * spec[1]
                row[spec[2]] += a
            elif spec[0] == "neg":
                const += a * spec[1]
                row[spec[2]] -= a
            else:
                row[spec[1]] += a
                row[spec[2]] -= a
        return row, const

    # rows in y-space, rhs sign-normalized to >= 0
    norm_rows = []  # (coeffs, effective_rel in {LE, GE, EQ}, rhs >= 0)
    for coeffs, rel, rhs in p.constraints:
        row, const = to_cols(coeffs)
        r = _Q(rhs) - const
        if r < 0:
            row = [-a for a in row]
            r = -r
            rel = GE if rel == LE else LE if rel == GE else EQ
        norm_rows.append((row, rel, r))
    for col, cap in extra_rows:
        row = [zero] * ncols
        row[col] = one
        if cap < 0:
            return LpResult("infeasible", None, None)
        norm_rows.append((row, LE, cap))

    # --- build tableau: [y cols | slack cols | artificial cols | rhs] ---------
    n_slack = sum(1 for _, rel, _ in norm_rows if rel != EQ)
    n_art = sum(1 for _, rel, _ in norm_rows if rel != LE)
    total_cols = ncols + n_slack + n_art
    tableau = []
    basis = []
    art_cols = []
    s_at, a_at = ncols, ncols + n_slack
    for row, rel, rhs in norm_rows:
        r = row + [zero] * (n_slack + n_art) + [rhs]
        if rel != EQ:
            r[s_at] = one if rel == LE else -one
            if rel == LE:
                basis.append(s_at)
            s_at += 1
        if rel != LE:
            r[a_at] = one
            basis.append(a_at)
            art_cols.append(a_at)
            a_at += 1
        tableau.append(r)

    # --- phase 1: drive artificials to zero -----------------------------------
    if art_cols:
        ph1 = [zero] * (total_cols + 1)
        for c in art_cols:
            ph1[c] = -one
        for i, b in enumerate(basis):
            if b in art_cols:  # price out the artificial basis
                ph1 = [x + t for x, t in zip(ph1, tableau[i])]
        status = _run_simplex(tableau, ph1, basis, budget)
        assert status == "optimal", "phase 1 cannot be unbounded"
        if ph1[-1] != 0:
            return LpResult("infeasible", None, None)
        art_set = set(art_cols)
        keep = []
        for i in range(len(tableau)):
            if basis[i] in art_set:
                pivot_col = next(
                    (j for j in range(ncols + n_slack) if tableau[i][j] != 0), None
                )
                if pivot_col is None:
                    continue  # redundant row: drop it
                _pivot(tableau, ph1, basis, i, pivot_col)
            keep.append(i)
        tableau = [tableau[i] for i in keep]
        basis = [basis[i] for i in keep]
        # slice artificial columns off
        tableau = [row[: ncols + n_slack] + [row[-1]] for row in tableau]
        total_cols = ncols + n_slack

    # --- phase 2 ---------------------------------------------------------------
    obj_row, obj_const = to_cols(p.objective)
    obj = obj_row + [zero] * (total_cols - ncols) + [zero]
    for i, b in enumerate(basis):
        fac = obj[b]
        if fac:
            obj = [x - fac * t for x, t in zip(obj, tableau[i])]
    status = _run_simplex(tableau, obj, basis, budget)
    if status == "unbounded":
        return LpResult("unbounded", None, None)

    yvals = [zero] * total_cols
    for i, b in enumerate(basis):
        yvals[b] = tableau[i][-1]

    xs = []
    for spec in col_of:
        if spec[0] == "shift":
            xs.append(spec[1] + yvals[spec[2]])
        elif spec[0] == "neg":
            xs.append(spec[1] - yvals[spec[2]])
        else:
            xs.append(yvals[spec[1]] - yvals[spec[2]])
    witness = tuple(Fraction(int(x.numerator), int(x.denominator)) for x in xs)

    # exactness is the contract: re-derive the value from the witness and check
    # every constraint with no tolerance
    value = sum((c * x for c, x in zip(p.objective, witness)), Fraction(0))
    for coeffs, rel, rhs in p.constraints:
        lhs = sum((a * x for a, x in zip(coeffs, witness)), Fraction(0))
        ok = lhs <= rhs if rel == LE else lhs >= rhs if rel == GE else lhs == rhs
        if not ok:
            raise AssertionError("simplex produced an infeasible witness (bug)")
    for x, (lo, hi) in zip(witness, p.bounds):
        if (lo is not None and x < lo) or (hi is not None and x > hi):
            raise AssertionError("simplex witness violates bounds (bug)")
    return LpResult("optimal", value, witness)
