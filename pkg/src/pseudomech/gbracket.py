"""Generalized Poisson bracket on graded phase space.

Coordinates are differentiated from the right and momenta from the left::

    {F, G} = sum over pairs (Q, P) of
             F_{,Q} dG/dP - (-1)^(|F||G|) G_{,Q} dF/dP

for parity-homogeneous ``F`` and ``G`` (``|.|`` is 0 for even, 1 for odd);
mixed arguments are split into even and odd parts and handled bilinearly.
"""
from __future__ import annotations

from dataclasses import dataclass

from pseudomech.superpoly import (
    Parity,
    SuperPolynomial,
    VarTable,
    homogeneous_parts,
    left_derivative,
    parity_of,
    right_derivative,
)


class NotEvenError(ValueError):
    pass


@dataclass(frozen=True)
class BracketContext:
    vartable: VarTable

    @property
    def pairs(self):
        return self.vartable.pairs

    def check(self, *fs):
        for f in fs:
            if f.table != self.vartable:
                raise ValueError("polynomial is not defined over the bracket's variable table")


def _gpb_homogeneous(f, df, g, dg, ctx):
    out = ctx.vartable.zero()
    sign = -1 if df * dg else 1
    for q, p in ctx.pairs:
        fq = right_derivative(f, q)
        if fq:
            gp = left_derivative(g, p)
            if gp:
                out = out + fq * gp
        gq = right_derivative(g, q)
        if gq:
            fp = left_derivative(f, p)
            if fp:
                out = out - sign * (gq * fp)
    return out


def gpb(f: SuperPolynomial, g: SuperPolynomial, ctx: BracketContext) -> SuperPolynomial:
    """The generalized Poisson bracket ``{f, g}``."""
    ctx.check(f, g)
    out = ctx.vartable.zero()
    for df, fpart in homogeneous_parts(f):
        for dg, gpart in homogeneous_parts(g):
            out = out + _gpb_homogeneous(fpart, df, gpart, dg, ctx)
    return out


def time_derivative(f: SuperPolynomial, H: SuperPolynomial, ctx: BracketContext) -> SuperPolynomial:
    if parity_of(H) is not Parity.EVEN:
        raise NotEvenError("Hamiltonian must be even")
    return gpb(f, H, ctx)


def jacobi_defect(f, g, h, ctx: BracketContext) -> SuperPolynomial:
    """Left-hand side of the graded Jacobi identity; zero when it holds."""
    degs = []
    for x in (f, g, h):
        p = parity_of(x)
        if p is Parity.MIXED:
            raise ValueError("jacobi_defect needs parity-homogeneous arguments")
        degs.append(p.degree)
    a, b, c = degs
    s2 = -1 if (a * (b + c)) & 1 else 1
    s3 = -1 if (c * (a + b)) & 1 else 1
    return (gpb(f, gpb(g, h, ctx), ctx)
            + s2 * gpb(g, gpb(h, f, ctx), ctx)
            + s3 * gpb(h, gpb(f, g, ctx), ctx))


def canonical_table(ctx: BracketContext):
    """All brackets between the declared variables, keyed by name pair."""
    t = ctx.vartable
    return {(a, b): gpb(t.var(a), t.var(b), ctx) for a in t.names for b in t.names}


def expected_canonical(table: VarTable, a: str, b: str) -> complex:
    """Value of ``{a, b}`` for canonical variables: 1 for (coordinate, its
    momentum); -1 (even) or +1 (odd) for the reversed order; else 0."""
    va = table.variable(a)
    if va.partner != b:
        return 0
    if va.role == "coordinate":
        return 1
    return 1 if va.odd else -1


def canonical_defect(ctx: BracketContext) -> float:
    t = ctx.vartable
    worst = 0.0
    for (a, b), val in canonical_table(ctx).items():
        worst = max(worst, (val - expected_canonical(t, a, b)).max_abs())
    return worst


def equations_of_motion(H: SuperPolynomial, ctx: BracketContext):
    """Time derivative of each variable alongside both derivative flavours
    of ``H`` with respect to its partner, for diagnostics."""
    rows = {}
    t = ctx.vartable
    for v in t.entries:
        rows[v.name] = {
            "bracket": time_derivative(t.var(v.name), H, ctx),
            "left": left_derivative(H, v.partner),
            "right": right_derivative(H, v.partner),
        }
    return rows


def graded_symmetry_defect(f, g, ctx) -> float:
    total = 0.0
    for df, fp in homogeneous_parts(f):
        for dg, gp in homogeneous_parts(g):
            s = -1 if df * dg else 1
            total = max(total, (gpb(fp, gp, ctx) + s * gpb(gp, fp, ctx)).max_abs())
    return total
