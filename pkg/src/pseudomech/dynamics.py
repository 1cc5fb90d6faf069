"""Exact flows of quadratic super-Hamiltonians.

For a quadratic ``H`` the bracket maps each variable to a linear form, so
``dv/dt = L v`` on the ordered variable vector and the flow is ``exp(L t)``.
Odd initial data stays symbolic: an odd component is a coefficient vector
over the odd generators.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.linalg

from pseudomech.gbracket import BracketContext, expected_canonical, gpb, time_derivative
from pseudomech.superpoly import DEFAULT_TOL, SuperPolynomial, VarTable, substitute


class NotQuadraticError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class EvolutionMatrix:
    L: np.ndarray
    basis: VarTable

    @property
    def names(self):
        return self.basis.names

    def exp(self, t) -> np.ndarray:
        return expm(self.L * t)


def linearize(H: SuperPolynomial, ctx: BracketContext) -> EvolutionMatrix:
    t = ctx.vartable
    index = {t.key_of(n): j for j, n in enumerate(t.names)}
    L = np.zeros((len(t), len(t)), dtype=complex)
    for i, n in enumerate(t.names):
        for key, c in time_derivative(t.var(n), H, ctx).items():
            if key not in index:
                raise NotQuadraticError(f"not a quadratic Hamiltonian: d{n}/dt has the term "
                                        f"{SuperPolynomial(t, {key: c})}")
            L[i, index[key]] = c
    return EvolutionMatrix(L, t)


def expm(A: np.ndarray) -> np.ndarray:
    """Matrix exponential by eigendecomposition, with scipy's
    scaling-and-squaring when the eigenbasis is ill-conditioned."""
    w, V = np.linalg.eig(A)
    if np.linalg.cond(V) < 1e8:
        Vinv = np.linalg.inv(V)
        if np.abs(V @ np.diag(w) @ Vinv - A).max() < 1e-12 * max(1.0, np.abs(A).max()):
            return V @ np.diag(np.exp(w)) @ Vinv
    return scipy.linalg.expm(A)


def evolve(v0: Mapping[str, object], L: EvolutionMatrix, t) -> dict:
    """``v(t) = exp(L t) v0``.  Even components are complex numbers, odd
    components equal-length coefficient vectors over the odd generators."""
    names = L.names
    missing = set(names) - set(v0)
    extra = set(v0) - set(names)
    if missing or extra:
        raise ValueError(f"initial data does not match the basis (missing {sorted(missing)}, "
                         f"unknown {sorted(extra)})")
    table = L.basis
    odd_len = {np.shape(v0[n]) for n in names if table.is_odd(n)}
    if len(odd_len) > 1:
        raise ValueError("odd components must share one coefficient-vector length")
    for n in names:
        if not table.is_odd(n) and np.ndim(v0[n]) != 0:
            raise ValueError(f"even component {n} must be a number")
    E = L.exp(t)
    out = {}
    for i, n in enumerate(names):
        acc = 0
        for j, m in enumerate(names):
            if E[i, j] != 0 and table.is_odd(m) == table.is_odd(n):
                acc = acc + E[i, j] * np.asarray(v0[m], dtype=complex)
        out[n] = acc if table.is_odd(n) else complex(acc)
    return out


def flow_images(L: EvolutionMatrix, t, tol=1e-15):
    """Each variable at time ``t`` as a linear polynomial in the initial
    variables."""
    table = L.basis
    E = L.exp(t)
    out = {}
    for i, n in enumerate(table.names):
        p = table.zero()
        for j, m in enumerate(table.names):
            if abs(E[i, j]) > tol:
                p = p + complex(E[i, j]) * table.var(m)
        out[n] = p
    return out


def flow_map(f: SuperPolynomial, L: EvolutionMatrix, t) -> SuperPolynomial:
    """``f`` transported along the flow: ``f(v(t))`` in the initial variables."""
    return substitute(f, flow_images(L, t), L.basis)


def conservation_over_time(I: SuperPolynomial, L: EvolutionMatrix, t_grid) -> float:
    return max((flow_map(I, L, t) - I).max_abs() for t in t_grid)


def flow_canonical_defect(L: EvolutionMatrix, t) -> float:
    table = L.basis
    ctx = BracketContext(table)
    imgs = flow_images(L, t)
    return max((gpb(imgs[a], imgs[b], ctx) - expected_canonical(table, a, b)).max_abs()
               for a in table.names for b in table.names)


def recurrence_defect(L: EvolutionMatrix, period=2 * np.pi) -> float:
    return float(np.abs(L.exp(period) - np.eye(len(L.names))).max())


def group_defect(L: EvolutionMatrix, t1, t2) -> float:
    return float(np.abs(L.exp(t1) @ L.exp(t2) - L.exp(t1 + t2)).max())


def default_grid():
    """``t = 0.1 k`` for ``k = 0..62``, covering ``[0, 2 pi]``."""
    return [0.1 * k for k in range(63)]


def is_conserved(I, H, ctx, tol=DEFAULT_TOL):
    return gpb(I, H, ctx).max_abs() < tol
