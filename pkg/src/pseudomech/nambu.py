"""Generalized Nambu 4-bracket on the one-dimensional super phase space.

The bracket is a graded Jacobian: row ``r`` holds the derivatives of the
r-th function with respect to the column variables (left derivatives for
momenta, right derivatives for coordinates), and the determinant is
expanded over permutations with a fixed factor order.  Because entries may
be odd, that order matters; ``row-major`` multiplies factors in row order,
``column-major`` in column order.

Division by the odd divisor is never carried out; dynamics are certified by
the defect ``c * J - dF/dt * divisor`` vanishing.  The divisor sits to the
right of the time derivative: with row-major expansion that is the placement
under which every phase-space monomial obeys the bracket's dynamics.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from pseudomech.gbracket import BracketContext, gpb
from pseudomech.superpoly import (
    DEFAULT_TOL,
    EXP_BITS,
    SuperPolynomial,
    left_derivative,
    right_derivative,
)
from pseudomech.symmetry import coefficient_matrix, match_up_to_scalar

ORDERS = ("row-major", "column-major")


class NambuError(ValueError):
    pass


class AmbiguousQuotientError(ValueError):
    """Raised when ``J = D R`` has several exact solutions; ``particular``
    holds the minimum-norm one."""

    def __init__(self, msg, particular):
        super().__init__(msg)
        self.particular = particular


@dataclass(frozen=True)
class NambuSpec:
    hamiltonians: tuple  # three SuperPolynomials
    divisor: SuperPolynomial
    normalization: complex | None = None  # None: calibrate on the first variable
    variable_order: tuple = ("P", "X", "pi", "theta")
    order: str = "row-major"

    def with_normalization(self, c):
        return replace(self, normalization=complex(c))


def _perm_sign(p):
    inv = sum(1 for i in range(len(p)) for j in range(i + 1, len(p)) if p[i] > p[j])
    return -1 if inv & 1 else 1


def derivative_matrix(rows, variables, ctx: BracketContext):
    t = ctx.vartable
    out = []
    for f in rows:
        row = []
        for v in variables:
            if t.variable(v).role == "momentum":
                row.append(left_derivative(f, v))
            else:
                row.append(right_derivative(f, v))
        out.append(row)
    return out


def graded_determinant(D, order="row-major"):
    if order not in ORDERS:
        raise ValueError(f"unknown determinant order {order!r}")
    n = len(D)
    table = D[0][0].table
    out = table.zero()
    for perm in itertools.permutations(range(n)):
        if order == "row-major":
            factors = [D[i][perm[i]] for i in range(n)]
        else:
            rows_for_col = [0] * n
            for i, c in enumerate(perm):
                rows_for_col[c] = i
            factors = [D[rows_for_col[c]][c] for c in range(n)]
        if any(not f for f in factors):
            continue
        term = table.const(_perm_sign(perm))
        for f in factors:
            term = term * f
        out = out + term
    return out


def graded_jacobian(F: SuperPolynomial, spec: NambuSpec, ctx: BracketContext) -> SuperPolynomial:
    rows = [F, *spec.hamiltonians]
    return graded_determinant(derivative_matrix(rows, spec.variable_order, ctx), spec.order)


def calibrate(spec: NambuSpec, H: SuperPolynomial, ctx: BracketContext, probe=None):
    """Normalization ``c`` with ``c J(probe) = dprobe/dt * divisor``; None if
    no scalar works."""
    F = ctx.vartable.var(probe or spec.variable_order[0])
    J = graded_jacobian(F, spec, ctx)
    if not J:
        return None
    return match_up_to_scalar(gpb(F, H, ctx) * spec.divisor, J)


def _resolved(spec, H, ctx):
    if spec.normalization is not None:
        return spec
    c = calibrate(spec, H, ctx)
    if c is None:
        raise NambuError("cannot calibrate the bracket normalization on the probe variable")
    return spec.with_normalization(c)


def nambu_defect(F: SuperPolynomial, H: SuperPolynomial, spec: NambuSpec, ctx: BracketContext):
    spec = _resolved(spec, H, ctx)
    return spec.normalization * graded_jacobian(F, spec, ctx) - gpb(F, H, ctx) * spec.divisor


def select_order(spec: NambuSpec, H, ctx: BracketContext, tol=DEFAULT_TOL):
    """Row-major if it reproduces the equations of motion of every phase
    variable, otherwise column-major; returns the calibrated spec."""
    t = ctx.vartable
    for order in ORDERS:
        candidate = replace(spec, order=order)
        try:
            candidate = _resolved(candidate, H, ctx)
        except NambuError:
            continue
        if all(nambu_defect(t.var(v), H, candidate, ctx).max_abs() < tol for v in spec.variable_order):
            return candidate
    raise NambuError("neither determinant order reproduces the equations of motion")


def _fields_nonnegative(table, kj, kd):
    field = (1 << EXP_BITS) - 1
    for n in table.even_names:
        s = table.shift_of(n)
        if (kj >> s) & field < (kd >> s) & field:
            return False
    return True


def exact_quotient(J: SuperPolynomial, D: SuperPolynomial, tol=DEFAULT_TOL, side="left"):
    """Solve ``J = D R`` (``side="left"``) or ``J = R D`` (``side="right"``)
    over monomial coefficients.

    Returns R, or None when no exact quotient exists.  Raises
    :class:`AmbiguousQuotientError` when several exact solutions exist.
    """
    if side not in ("left", "right"):
        raise ValueError(f"unknown side {side!r}")
    if not D:
        raise ValueError("division by the zero polynomial")
    t = J.table
    if not J:
        return t.zero()
    cands = set()
    for kj, _ in J.items():
        for kd, _ in D.items():
            # a divisor monomial must be a sub-monomial of the dividend one
            if (kd & t.odd_mask) & ~kj or not _fields_nonnegative(t, kj, kd):
                continue
            cands.add(kj - kd)
    if not cands:
        return None
    cands = sorted(cands)
    if side == "left":
        columns = [D * SuperPolynomial(t, {k: 1}) for k in cands]
    else:
        columns = [SuperPolynomial(t, {k: 1}) * D for k in cands]
    keys = sorted({k for c in columns for k, _ in c.items()} | {k for k, _ in J.items()})
    A = coefficient_matrix(columns, keys)
    b = coefficient_matrix([J], keys)[:, 0]
    x, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if np.abs(A @ x - b).max() >= tol:
        return None
    R = SuperPolynomial(t, dict(zip(cands, x)))
    if rank < len(cands):
        raise AmbiguousQuotientError("quotient is not unique", R)
    return R


def nambu_bracket_of_hamiltonians(rows, spec: NambuSpec, ctx: BracketContext) -> SuperPolynomial:
    """Graded Jacobian with four given functions as rows."""
    if len(rows) != 4:
        raise ValueError("the 4-bracket takes four functions")
    return graded_determinant(derivative_matrix(rows, spec.variable_order, ctx), spec.order)


def hamiltonian_brackets(conserved, spec: NambuSpec, ctx: BracketContext):
    """``{C, H1, H2, H3}`` for every ``C`` in ``conserved``, with the
    Nambu-Hamiltonians in the trailing slots."""
    return [nambu_bracket_of_hamiltonians([c, *spec.hamiltonians], spec, ctx) for c in conserved]


def defect_battery(spec: NambuSpec, H, ctx: BracketContext, max_degree=2) -> float:
    from pseudomech.supercharge import monomial_basis

    return max(nambu_defect(F, H, spec, ctx).max_abs() for F in monomial_basis(ctx.vartable, max_degree))


def alternative_specs(conserved, H, ctx: BracketContext, tol=DEFAULT_TOL, max_degree=2):
    """Every ordered choice of three conserved quantities (the remaining one
    as divisor) whose calibrated bracket reproduces the dynamics of all
    monomials up to ``max_degree``.  Yields ``(indices, divisor_index, spec)``."""
    n = len(conserved)
    for trip in itertools.permutations(range(n), 3):
        rest = [i for i in range(n) if i not in trip]
        for d in rest:
            spec = NambuSpec(tuple(conserved[i] for i in trip), conserved[d])
            try:
                spec = select_order(spec, H, ctx, tol)
            except NambuError:
                continue
            if defect_battery(spec, H, ctx, max_degree) < tol:
                yield trip, d, spec
