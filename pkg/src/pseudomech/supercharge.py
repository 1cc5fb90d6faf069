"""Classical supercharges and the supersymmetry transformations they generate."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from pseudomech.gbracket import BracketContext, gpb
from pseudomech.superpoly import DEFAULT_TOL, Parity, SuperPolynomial, VarTable, parity_of
from pseudomech.symmetry import match_up_to_scalar


class DegenerateSuperchargeError(ValueError):
    pass


@dataclass(frozen=True)
class SuperchargePair:
    Q: SuperPolynomial
    Qbar: SuperPolynomial
    alpha: complex
    beta: complex


def build_supercharges_1d(table: VarTable, alpha, beta, *, X="X", P="P", theta="theta",
                          pi="pi", check=True) -> SuperchargePair:
    """``Q = a P theta + b X pi`` and ``Qbar = b* P theta + a* X pi``.

    ``check=False`` skips the independence test so degenerate pairs can be
    built as negative controls.
    """
    alpha, beta = complex(alpha), complex(beta)
    if check and abs(abs(alpha) ** 2 - abs(beta) ** 2) < 1e-14:
        raise DegenerateSuperchargeError("degenerate supercharge pair: |alpha|^2 == |beta|^2")
    Xv, Pv, tv, pv = table.vars(X, P, theta, pi)
    Q = alpha * (Pv * tv) + beta * (Xv * pv)
    Qbar = beta.conjugate() * (Pv * tv) + alpha.conjugate() * (Xv * pv)
    return SuperchargePair(Q, Qbar, alpha, beta)


def monomial_basis(table: VarTable, max_degree):
    """Every monomial (coefficient 1) of total degree 0..max_degree."""
    evens, odds = table.even_names, table.odd_names
    out = []
    for deg in range(max_degree + 1):
        for k in range(min(deg, len(odds)) + 1):
            for odd in itertools.combinations(odds, k):
                for ev in itertools.combinations_with_replacement(evens, deg - k):
                    exps = {}
                    for n in ev:
                        exps[n] = exps.get(n, 0) + 1
                    out.append(table.monomial(exps, odd))
    return out


class NilpotencyDefects(NamedTuple):
    QQ: SuperPolynomial
    QbarQbar: SuperPolynomial
    operator_defect: float  # max over test functions of |{{f,Q},Q}| and |{{f,Qbar},Qbar}|


def operator_square_defect(Q, ctx: BracketContext, test_functions):
    return max((gpb(gpb(f, Q, ctx), Q, ctx).max_abs() for f in test_functions), default=0.0)


def nilpotency_defects(pair: SuperchargePair, ctx: BracketContext, max_degree=3) -> NilpotencyDefects:
    basis = monomial_basis(ctx.vartable, max_degree)
    op = max(operator_square_defect(pair.Q, ctx, basis),
             operator_square_defect(pair.Qbar, ctx, basis))
    return NilpotencyDefects(gpb(pair.Q, pair.Q, ctx), gpb(pair.Qbar, pair.Qbar, ctx), op)


class TableRow(NamedTuple):
    variable: str
    with_Q: SuperPolynomial
    with_Qbar: SuperPolynomial


def susy_transform_table(pair: SuperchargePair, ctx: BracketContext):
    t = ctx.vartable
    return [TableRow(v, gpb(t.var(v), pair.Q, ctx), gpb(t.var(v), pair.Qbar, ctx)) for v in t.names]


# {v, Q} and {v, Qbar} patterns: target variable for "~" entries, None for zero
PATTERN_ALPHA = {"X": ("theta", None), "P": (None, "pi"), "theta": (None, "X"), "pi": ("P", None)}
PATTERN_BETA = {"X": (None, "theta"), "P": ("pi", None), "theta": ("X", None), "pi": (None, "P")}


@dataclass
class PatternCheck:
    ok: bool
    max_zero_defect: float
    constants: dict  # (variable, column) -> recovered scalar
    failures: list


def check_pattern(rows, pattern, table: VarTable, tol=DEFAULT_TOL) -> PatternCheck:
    """Compare bracket rows against ``pattern`` (variable -> (Q target,
    Qbar target)).  A target name means "proportional with non-zero constant";
    ``None`` means zero."""
    consts, failures, zero_defect = {}, [], 0.0
    by_var = {r.variable: r for r in rows}
    for v, targets in pattern.items():
        row = by_var[v]
        for col, value, target in (("Q", row.with_Q, targets[0]), ("Qbar", row.with_Qbar, targets[1])):
            if target is None:
                zero_defect = max(zero_defect, value.max_abs())
                if value.max_abs() >= tol:
                    failures.append((v, col, "expected zero"))
                continue
            expected = table.var(target) if isinstance(target, str) else target
            c = match_up_to_scalar(value, expected, tol)
            consts[(v, col)] = c
            if c is None or abs(c) < tol:
                failures.append((v, col, f"not proportional to {target}"))
    return PatternCheck(not failures, zero_defect, consts, failures)


def map_boson_fermion(E: SuperPolynomial, pair: SuperchargePair, ctx: BracketContext) -> SuperPolynomial:
    """``{{E, Q}, Qbar}``."""
    if parity_of(E) is not Parity.EVEN:
        raise ValueError("map_boson_fermion expects an even function")
    return gpb(gpb(E, pair.Q, ctx), pair.Qbar, ctx)


# -- two dimensions ---------------------------------------------------------

class Charges2D(NamedTuple):
    Q1: SuperPolynomial
    Qbar1: SuperPolynomial
    Q2: SuperPolynomial
    Qbar2: SuperPolynomial

    @property
    def Q(self):
        return (self.Q1, self.Q2)

    @property
    def Qbar(self):
        return (self.Qbar1, self.Qbar2)


def build_supercharges_2d(table: VarTable) -> Charges2D:
    X1, X2, P1, P2 = table.vars("X1", "X2", "P1", "P2")
    t1, t2, p1, p2 = table.vars("theta1", "theta2", "pi1", "pi2")
    return Charges2D(
        (P1 + P2) * (t1 + t2),
        (p1 + p2) * (X1 + X2),
        (P1 - P2) * (t1 - t2),
        (p1 - p2) * (X1 - X2),
    )


class AlgebraDecompositionError(ValueError):
    pass


@dataclass
class Algebra2D:
    M: list  # M[i][j] = {Q_i, Qbar_j}
    H0: SuperPolynomial
    H1: SuperPolynomial
    residual: float
    QQ_defect: float  # max over i, j of {Q_i, Q_j} and {Qbar_i, Qbar_j}


def supercharge_algebra_2d(charges: Charges2D, ctx: BracketContext, tol=DEFAULT_TOL) -> Algebra2D:
    """Decompose ``{Q_i, Qbar_j} = 2 (sigma0 H0 + sigma3 H1)_ij``."""
    Qs, Qbs = charges.Q, charges.Qbar
    M = [[gpb(Qs[i], Qbs[j], ctx) for j in range(2)] for i in range(2)]
    H0 = (M[0][0] + M[1][1]) / 4
    H1 = (M[0][0] - M[1][1]) / 4
    residual = max(
        (M[0][0] - 2 * (H0 + H1)).max_abs(),
        (M[1][1] - 2 * (H0 - H1)).max_abs(),
        M[0][1].max_abs(),
        M[1][0].max_abs(),
    )
    if residual >= tol:
        raise AlgebraDecompositionError(f"sigma0/sigma3 decomposition residual {residual:.3e}")
    qq = max(gpb(a, b, ctx).max_abs() for xs in (Qs, Qbs) for a in xs for b in xs)
    return Algebra2D(M, H0, H1, residual, qq)


def rotate_charges(charges: Charges2D, phi, psi) -> Charges2D:
    a, b = np.exp(1j * phi), np.exp(1j * psi)
    return Charges2D(a * charges.Q1, np.conj(a) * charges.Qbar1, b * charges.Q2, np.conj(b) * charges.Qbar2)


@dataclass
class RSymmetryReport:
    phi: float
    psi: float
    QQ_defect: float
    residual: float
    H0_shift: float
    H1_shift: float

    def ok(self, tol=DEFAULT_TOL):
        return max(self.QQ_defect, self.residual, self.H0_shift, self.H1_shift) < tol


def r_symmetry_check(charges: Charges2D, phi, psi, ctx: BracketContext, tol=DEFAULT_TOL) -> RSymmetryReport:
    base = supercharge_algebra_2d(charges, ctx, tol)
    rot = supercharge_algebra_2d(rotate_charges(charges, phi, psi), ctx, tol)
    return RSymmetryReport(phi, psi, rot.QQ_defect, rot.residual,
                           (rot.H0 - base.H0).max_abs(), (rot.H1 - base.H1).max_abs())


def combined_charges(charges: Charges2D, sign=1):
    """``Q = (Q1 + sign Q2)/2`` and its bar partner."""
    return SuperchargePair((charges.Q1 + sign * charges.Q2) / 2,
                           (charges.Qbar1 + sign * charges.Qbar2) / 2, 0j, 0j)


def susy_transform_table_2d(pair: SuperchargePair, ctx: BracketContext):
    return susy_transform_table(pair, ctx)


def pattern_2d(cross: bool):
    """Expected pattern for ``Q`` (diagonal) or ``Q'`` (cross-index)."""
    pattern = {}
    for j, k in ((1, 2), (2, 1)):
        m = k if cross else j
        pattern[f"X{j}"] = (f"theta{m}", None)
        pattern[f"P{j}"] = (None, f"pi{m}")
        pattern[f"theta{j}"] = (None, f"X{m}")
        pattern[f"pi{j}"] = (f"P{m}", None)
    return pattern

