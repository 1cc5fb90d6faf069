"""u(n,n) generators and the first integrals they induce.

A generator ``T`` acts as ``dQ = i T Q`` and ``dP = -i (eta T* eta) P`` on the
phase vectors, with ``eta = diag(I_n, -I_n)``.  ``H = i P^T Q`` is invariant
exactly when ``eta T^dagger eta = T``; the associated integral is
``sum_jk T_jk P_j Q_k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from pseudomech.gbracket import BracketContext, gpb
from pseudomech.superpoly import DEFAULT_TOL, Parity, SuperPolynomial, VarTable, parity_of

SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def eta(n):
    return np.diag(np.r_[np.ones(n), -np.ones(n)]).astype(complex)


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    entries: np.ndarray
    block_tag: str  # "diagonal" or "off_diagonal"

    @property
    def n(self):
        return self.entries.shape[0] // 2

    def eta_defect(self):
        """max |eta T^dagger eta - T|; zero for u(n,n) members."""
        e = eta(self.n)
        return float(np.abs(e @ self.entries.conj().T @ e - self.entries).max())


def u11_generators():
    """T0 = sigma0/2, T1 = i sigma1/2, T2 = i sigma2/2, T3 = sigma3/2."""
    s0, s1, s2, s3 = SIGMA
    return [
        GeneratorMatrix(s0 / 2, "diagonal"),
        GeneratorMatrix(1j * s1 / 2, "off_diagonal"),
        GeneratorMatrix(1j * s2 / 2, "off_diagonal"),
        GeneratorMatrix(s3 / 2, "diagonal"),
    ]


def hermitian_basis(n):
    """Real basis of n x n Hermitian matrices (n^2 elements)."""
    out = []
    for j in range(n):
        m = np.zeros((n, n), dtype=complex)
        m[j, j] = 1
        out.append(m)
    for j in range(n):
        for k in range(j + 1, n):
            m = np.zeros((n, n), dtype=complex)
            m[j, k] = m[k, j] = 1
            out.append(m)
            m = np.zeros((n, n), dtype=complex)
            m[j, k], m[k, j] = 1j, -1j
            out.append(m)
    return out


def unn_generators(n):
    """4n^2 generators: block-diagonal Hermitian ones for u(n)+u(n), then
    ``(i/2) [[0, M^dagger], [M, 0]]`` for M running over E_jk and i E_jk."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    z = np.zeros((n, n), dtype=complex)
    gens = []
    for h in hermitian_basis(n):
        gens.append(GeneratorMatrix(np.block([[h, z], [z, z]]) / 2, "diagonal"))
    for h in hermitian_basis(n):
        gens.append(GeneratorMatrix(np.block([[z, z], [z, h]]) / 2, "diagonal"))
    for j in range(n):
        for k in range(n):
            for phase in (1, 1j):
                m = np.zeros((n, n), dtype=complex)
                m[j, k] = phase
                g = 0.5j * np.block([[z, m.conj().T], [m, z]])
                gens.append(GeneratorMatrix(g, "off_diagonal"))
    return gens


def u22_generators():
    """Sixteen u(2,2) generators in the numbering used for the planar model.

    0 is the identity, 1-3 are Pauli matrices on the bosonic block, 4-11 are
    the off-diagonal (odd) generators, 12 is the fermionic identity and
    13-15 are Pauli matrices on the fermionic block.  All carry a factor 1/2.
    """
    z = np.zeros((2, 2), dtype=complex)
    gens = [GeneratorMatrix(np.eye(4, dtype=complex) / 2, "diagonal")]
    for s in SIGMA[1:]:
        gens.append(GeneratorMatrix(np.block([[s, z], [z, z]]) / 2, "diagonal"))
    for j in range(2):
        for k in range(2):
            for phase in (1, 1j):
                m = np.zeros((2, 2), dtype=complex)
                m[j, k] = phase
                gens.append(GeneratorMatrix(0.5j * np.block([[z, m.conj().T], [m, z]]), "off_diagonal"))
    for s in SIGMA:
        gens.append(GeneratorMatrix(np.block([[z, z], [z, s]]) / 2, "diagonal"))
    return gens


@dataclass(frozen=True)
class PhaseVectors:
    """Names of the momentum vector (P_i then pi_i) and coordinate vector
    (X_i then theta_i) on a table."""

    table: VarTable
    momenta: tuple
    coordinates: tuple

    def __post_init__(self):
        if len(self.momenta) != len(self.coordinates) or len(self.momenta) % 2:
            raise ValueError("phase vectors need equal, even length")
        n = len(self.momenta) // 2
        for names in (self.momenta, self.coordinates):
            odd = [self.table.is_odd(x) for x in names]
            if any(odd[:n]) or not all(odd[n:]):
                raise ValueError("first half of each phase vector must be even, second half odd")

    @property
    def n(self):
        return len(self.momenta) // 2

    @property
    def P_vec(self):
        return [self.table.var(x) for x in self.momenta]

    @property
    def Q_vec(self):
        return [self.table.var(x) for x in self.coordinates]

    def hamiltonian(self):
        """i P^T Q."""
        return 1j * bilinear(np.eye(2 * self.n), self)


def bilinear(M, pv: PhaseVectors) -> SuperPolynomial:
    M = np.asarray(M)
    if M.shape != (2 * pv.n, 2 * pv.n):
        raise ValueError(f"matrix shape {M.shape} does not match phase vectors of length {2 * pv.n}")
    out = pv.table.zero()
    P, Q = pv.P_vec, pv.Q_vec
    for j in range(2 * pv.n):
        for k in range(2 * pv.n):
            if M[j, k] != 0:
                out = out + complex(M[j, k]) * (P[j] * Q[k])
    return out


def first_integral(T: GeneratorMatrix, pv: PhaseVectors) -> SuperPolynomial:
    return bilinear(T.entries, pv)


def bilinear_matrix(H: SuperPolynomial, pv: PhaseVectors, tol=DEFAULT_TOL):
    """Recover ``M`` with ``H = P^T M Q``; raises if ``H`` is not of that form."""
    n2 = 2 * pv.n
    basis = [pv.P_vec[j] * pv.Q_vec[k] for j in range(n2) for k in range(n2)]
    x, res = solve_in_span(H, basis)
    if res > tol:
        raise ValueError("Hamiltonian is not a bilinear form in the phase vectors")
    return x.reshape(n2, n2)


def invariance_defect(T: GeneratorMatrix, pv: PhaseVectors, H: SuperPolynomial) -> SuperPolynomial:
    """First-order variation of ``H = P^T M Q`` under the infinitesimal action
    of ``T``, keeping every momentum to the left of every coordinate.

    With ``dQ = i T Q`` and ``dP = -i D P`` (``D = eta T* eta``) the change is
    ``P^T (i M T - i D^T M) Q``.
    """
    M = T.entries
    if M.shape != (2 * pv.n, 2 * pv.n):
        raise ValueError("generator and phase vectors have different sizes")
    e = eta(pv.n)
    dual = e @ M.conj() @ e
    HM = bilinear_matrix(H, pv)
    return bilinear(1j * HM @ M - 1j * dual.T @ HM, pv)


def match_up_to_scalar(f: SuperPolynomial, g: SuperPolynomial, tol=DEFAULT_TOL):
    """Return ``c`` with ``f = c g`` coefficient-wise, or None."""
    if not g:
        raise ValueError("cannot match against the zero polynomial")
    gt = g.terms
    ft = f.terms
    num = sum(gt[k].conjugate() * ft.get(k, 0) for k in gt)
    den = sum(abs(v) ** 2 for v in gt.values())
    c = num / den
    if (f - c * g).max_abs() < tol:
        return c
    return None


def coefficient_matrix(polys: Sequence[SuperPolynomial], keys):
    index = {k: i for i, k in enumerate(keys)}
    A = np.zeros((len(keys), len(polys)), dtype=complex)
    for j, p in enumerate(polys):
        for k, v in p.items():
            A[index[k], j] = v
    return A


def solve_in_span(target: SuperPolynomial, span: Sequence[SuperPolynomial]):
    """Least-squares coefficients of ``target`` over ``span`` and the max
    coefficient-wise residual."""
    keys = sorted({k for p in (*span, target) for k, _ in p.items()})
    if not keys:
        return np.zeros(len(span), dtype=complex), 0.0
    A = coefficient_matrix(span, keys)
    b = coefficient_matrix([target], keys)[:, 0]
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    return x, float(np.abs(A @ x - b).max())


@dataclass
class ClosureEntry:
    i: int
    j: int
    coefficients: np.ndarray
    residual: float


@dataclass
class ClosureReport:
    entries: list = field(default_factory=list)

    @property
    def max_residual(self):
        return max((e.residual for e in self.entries), default=0.0)

    def structure_constants(self):
        """Array ``f[i, j, k]`` with ``{I_i, I_j} = sum_k f[i, j, k] S_k``."""
        if not self.entries:
            return np.zeros((0, 0, 0), dtype=complex)
        n = 1 + max(max(e.i, e.j) for e in self.entries)
        m = len(self.entries[0].coefficients)
        out = np.zeros((n, n, m), dtype=complex)
        for e in self.entries:
            out[e.i, e.j] = e.coefficients
        return out


def closure_check(integrals: Sequence[SuperPolynomial], ctx: BracketContext, span=None,
                  pairs=None) -> ClosureReport:
    """Express every pairwise bracket in the linear span of ``span``
    (default: the integrals themselves)."""
    span = list(integrals if span is None else span)
    if pairs is None:
        pairs = [(i, j) for i in range(len(integrals)) for j in range(len(integrals))]
    report = ClosureReport()
    for i, j in pairs:
        b = gpb(integrals[i], integrals[j], ctx)
        x, res = solve_in_span(b, span)
        report.entries.append(ClosureEntry(i, j, x, res))
    return report


def integrals_of(generators, pv: PhaseVectors):
    return [first_integral(T, pv) for T in generators]


def split_by_parity(polys):
    even = [p for p in polys if parity_of(p) is Parity.EVEN]
    odd = [p for p in polys if parity_of(p) is Parity.ODD]
    return even, odd
