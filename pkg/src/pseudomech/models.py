"""Oscillator models: the 1D and planar supersymmetric oscillators, the
Pais-Uhlenbeck schemes, the isotonic reduction and the U(n,n) family."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from pseudomech.gbracket import BracketContext, expected_canonical, gpb
from pseudomech.superpoly import DEFAULT_TOL, Parity, SuperPolynomial, VarTable, parity_of, substitute
from pseudomech.supercharge import build_supercharges_1d, build_supercharges_2d
from pseudomech.symmetry import (
    SIGMA,
    PhaseVectors,
    bilinear,
    first_integral,
    u22_generators,
    unn_generators,
)

SQRT2 = np.sqrt(2.0)


class DomainError(ValueError):
    """Model parameters outside the admissible domain."""


@dataclass(frozen=True, eq=False)
class ModelInstance:
    name: str
    vartable: VarTable
    hamiltonian: SuperPolynomial
    named_integrals: dict
    supercharges: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    bases: dict = field(default_factory=dict)  # basis name -> (VarTable, Hamiltonian)
    maps: dict = field(default_factory=dict)  # name -> LinearCanonicalMap

    @property
    def ctx(self):
        return BracketContext(self.vartable)

    def conservation_defects(self):
        ctx = self.ctx
        return {name: gpb(I, self.hamiltonian, ctx).max_abs() for name, I in self.named_integrals.items()}


# -- linear canonical maps --------------------------------------------------

@dataclass(frozen=True, eq=False)
class LinearCanonicalMap:
    """``target_i = sum_j matrix[i, j] source_j`` on the declared variable
    orders of the two tables."""

    matrix: np.ndarray
    source: VarTable
    target: VarTable

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if m.shape != (len(self.target), len(self.source)):
            raise ValueError(f"matrix shape {m.shape} does not match tables "
                             f"({len(self.target)}, {len(self.source)})")
        for i, tv in enumerate(self.target.entries):
            for j, sv in enumerate(self.source.entries):
                if m[i, j] != 0 and tv.odd != sv.odd:
                    raise ValueError(f"map mixes parities: {tv.name} <- {sv.name}")

    @classmethod
    def from_images(cls, source: VarTable, target: VarTable, images):
        """Build from ``{target name: {source name: coefficient}}``; missing
        target names map to the same-named source variable."""
        m = np.zeros((len(target), len(source)), dtype=complex)
        src = {n: j for j, n in enumerate(source.names)}
        for i, n in enumerate(target.names):
            for s, c in images.get(n, {n: 1}).items():
                if s not in src:
                    raise ValueError(f"image of {n} uses {s!r}, which is not a source variable")
                m[i, src[s]] = c
        return cls(m, source, target)

    def _polys(self, matrix, rows, cols):
        out = {}
        for i, n in enumerate(rows.names):
            p = cols.zero()
            for j, s in enumerate(cols.names):
                if matrix[i, j] != 0:
                    p = p + complex(matrix[i, j]) * cols.var(s)
            out[n] = p
        return out

    def images(self):
        """Each target variable as a polynomial over the source table."""
        return self._polys(self.matrix, self.target, self.source)

    def inverse_images(self):
        """Each source variable as a polynomial over the target table."""
        return self._polys(np.linalg.inv(self.matrix), self.source, self.target)

    def pullback(self, f: SuperPolynomial) -> SuperPolynomial:
        """Rewrite ``f`` (over the source table) in the target variables."""
        if f.table != self.source:
            raise ValueError("polynomial is not over the map's source table")
        return substitute(f, self.inverse_images(), self.target)

    def compose(self, then: "LinearCanonicalMap") -> "LinearCanonicalMap":
        """``then`` applied after ``self``."""
        if then.source != self.target:
            raise ValueError("maps do not chain")
        return LinearCanonicalMap(then.matrix @ self.matrix, self.source, then.target)


class CanonicalReport(NamedTuple):
    ok: bool
    max_defect: float
    failures: list


def verify_canonical(cmap: LinearCanonicalMap, tol=DEFAULT_TOL) -> CanonicalReport:
    """Brackets of the mapped variables, evaluated on the source table,
    against the canonical table of the target."""
    ctx = BracketContext(cmap.source)
    imgs = cmap.images()
    worst, failures = 0.0, []
    for a in cmap.target.names:
        for b in cmap.target.names:
            d = (gpb(imgs[a], imgs[b], ctx) - expected_canonical(cmap.target, a, b)).max_abs()
            worst = max(worst, d)
            if d >= tol:
                failures.append((a, b, d))
    return CanonicalReport(not failures, worst, failures)


def complexify_map(source: VarTable, target: VarTable, pairs):
    """``X = (q - i p)/sqrt2``, ``P = (p - i q)/sqrt2`` for each
    ``((q, p), (X, P))`` in ``pairs``; other variables pass through by name."""
    images = {}
    for (q, p), (X, P) in pairs:
        images[X] = {q: 1 / SQRT2, p: -1j / SQRT2}
        images[P] = {p: 1 / SQRT2, q: -1j / SQRT2}
    return LinearCanonicalMap.from_images(source, target, images)


def scale_map(source: VarTable, target: VarTable, pairs):
    """``q' = s q``, ``p' = p / s`` for each ``((q, p), (q', p'), s)``."""
    images = {}
    for (q, p), (q2, p2), s in pairs:
        images[q2] = {q: s}
        images[p2] = {p: 1 / s}
    return LinearCanonicalMap.from_images(source, target, images)


def rotation_map(source: VarTable, target: VarTable, alpha, coords, momenta):
    """SO(2) rotation by ``alpha`` applied to the coordinate pair and, in the
    same way, to the momentum pair."""
    c, s = np.cos(alpha), np.sin(alpha)
    images = {}
    for (a, b), (a2, b2) in (coords, momenta):
        images[a2] = {a: c, b: s}
        images[b2] = {a: -s, b: c}
    return LinearCanonicalMap.from_images(source, target, images)


def _fermions(n):
    if n == 1:
        return [("theta", "pi")]
    return [(f"theta{j}", f"pi{j}") for j in range(1, n + 1)]


def _phase_vectors(table, n):
    if n == 1:
        return PhaseVectors(table, ("P", "pi"), ("X", "theta"))
    idx = range(1, n + 1)
    return PhaseVectors(table, tuple(f"P{j}" for j in idx) + tuple(f"pi{j}" for j in idx),
                        tuple(f"X{j}" for j in idx) + tuple(f"theta{j}" for j in idx))


def fermionic_hamiltonian(table, freqs):
    """``i sum_j w_j pi_j theta_j``."""
    out = table.zero()
    for w, (th, pi) in zip(freqs, _fermions(len(freqs))):
        out = out + 1j * w * (table.var(pi) * table.var(th))
    return out


# -- 1D ---------------------------------------------------------------------

def build_1d() -> ModelInstance:
    """``H = (p^2 + q^2)/2 + i pi theta``, rewritten as ``i (P X + pi theta)``."""
    qp = VarTable.from_pairs([("q", "p")], _fermions(1))
    tx = VarTable.from_pairs([("X", "P")], _fermions(1))
    q, p, th, pi = qp.vars("q", "p", "theta", "pi")
    H_qp = 0.5 * (p * p + q * q) + 1j * (pi * th)
    cmap = complexify_map(qp, tx, [(("q", "p"), ("X", "P"))])
    H = cmap.pullback(H_qp)
    pv = _phase_vectors(tx, 1)
    X, P, th, pi = tx.vars("X", "P", "theta", "pi")
    integrals = {f"Z{mu}": bilinear(SIGMA[mu], pv) for mu in range(4)}
    integrals["H_B"] = 1j * (P * X)
    integrals["H_F"] = 1j * (pi * th)
    alpha = build_supercharges_1d(tx, SQRT2, 0)
    beta = build_supercharges_1d(tx, 0, SQRT2)
    integrals["Q"], integrals["Qbar"] = alpha.Q, alpha.Qbar
    return ModelInstance(
        "1d", tx, H, integrals,
        supercharges={"alpha": alpha, "beta": beta},
        metadata={"omega": 1.0},
        bases={"qp": (qp, H_qp), "XP": (tx, H)},
        maps={"complexify": cmap},
    )


# -- planar -----------------------------------------------------------------

def _planar_tables(n=2):
    idx = range(1, n + 1)
    qp = VarTable.from_pairs([(f"q{j}", f"p{j}") for j in idx], _fermions(n))
    tx = VarTable.from_pairs([(f"X{j}", f"P{j}") for j in idx], _fermions(n))
    return qp, tx


def _planar_integrals(tx, qp_map):
    pv = _phase_vectors(tx, 2)
    out = {f"C{mu}": first_integral(g, pv) for mu, g in enumerate(u22_generators())}
    qp = qp_map.source
    q1, q2, p1, p2 = qp.vars("q1", "q2", "p1", "p2")
    named_qp = {
        "B1": p1 * p2 + q1 * q2,
        "B2": q2 * p1 - q1 * p2,
        "B3": (p1 * p1 + q1 * q1) - (p2 * p2 + q2 * q2),
        "E": 0.5 * (p1 * p1 + q1 * q1) + 0.5 * (p2 * p2 + q2 * q2),
    }
    for name, f in named_qp.items():
        out[name] = qp_map.pullback(f)
    th = tx.vars("theta1", "theta2")
    pi = tx.vars("pi1", "pi2")
    for a in (1, 2, 3):
        T = SIGMA[a] / 2
        f = tx.zero()
        for j in range(2):
            for k in range(2):
                if T[j, k] != 0:
                    f = f + complex(T[j, k]) * (pi[j] * th[k])
        out[f"F{a}"] = f
    return out


def build_2d(omega=1.0) -> ModelInstance:
    """Planar isotropic oscillator ``H = i omega P^T Q`` with
    ``P = (P1, P2, pi1, pi2)`` and ``Q = (X1, X2, theta1, theta2)``."""
    qp, tx = _planar_tables()
    q1, q2, p1, p2 = qp.vars("q1", "q2", "p1", "p2")
    H_B = 0.5 * omega * (p1 * p1 + q1 * q1 + p2 * p2 + q2 * q2)
    H_qp = H_B + fermionic_hamiltonian(qp, (omega, omega))
    cmap = complexify_map(qp, tx, [(("q1", "p1"), ("X1", "P1")), (("q2", "p2"), ("X2", "P2"))])
    H = cmap.pullback(H_qp)
    charges = build_supercharges_2d(tx)
    integrals = _planar_integrals(tx, cmap)
    for name in ("Q1", "Qbar1", "Q2", "Qbar2"):
        integrals[name] = getattr(charges, name)
    return ModelInstance(
        "2d", tx, H, integrals,
        supercharges={"planar": charges},
        metadata={"omega": float(omega)},
        bases={"qp": (qp, H_qp), "XP": (tx, H)},
        maps={"complexify": cmap},
    )


# -- Pais-Uhlenbeck, scheme one ---------------------------------------------

class PUDiagonalization(NamedTuple):
    a: float
    b: float
    alpha: float
    reconstruction_error: float


def pu_diagonalize(mu1, mu2, rho) -> PUDiagonalization:
    """Frequencies and rotation angle for ``V = [[mu1, -rho], [-rho, mu2]]``.

    ``a >= b``; the angle comes from the eigenvector of the larger eigenvalue
    with a non-negative cosine.
    """
    V = np.array([[mu1, -rho], [-rho, mu2]], dtype=float)
    w, vecs = np.linalg.eigh(V)
    if mu1 <= 0 or mu2 <= 0 or w[0] <= 0:
        raise DomainError(f"potential matrix is not positive definite: eigenvalues {w[0]:.6g}, {w[1]:.6g}")
    if mu1 == mu2 and rho == 0:
        alpha = 0.0
    else:
        v = vecs[:, 1]
        if v[0] < 0 or (v[0] == 0 and v[1] < 0):
            v = -v
        alpha = float(np.arctan2(v[1], v[0]))
    a, b = np.sqrt(w[1]), np.sqrt(w[0])
    c, s = np.cos(alpha), np.sin(alpha)
    R = np.array([[c, s], [-s, c]])
    err = float(np.abs(R.T @ np.diag([a * a, b * b]) @ R - V).max())
    return PUDiagonalization(float(a), float(b), alpha, err)


def _sector_integrals(tx, sectors):
    out = {}
    for s in sectors:
        pv = PhaseVectors(tx, (f"P{s}", f"pi{s}"), (f"X{s}", f"theta{s}"))
        for mu in range(4):
            out[f"Z{mu}_{s}"] = bilinear(SIGMA[mu], pv)
    return out


def build_pu_scheme1(mu1, mu2, rho) -> ModelInstance:
    """Two-oscillator Pais-Uhlenbeck Hamiltonian, diagonalized, rescaled,
    complexified and extended by two fermionic pairs."""
    d = pu_diagonalize(mu1, mu2, rho)
    ferm = _fermions(2)
    xy = VarTable.from_pairs([("x", "px"), ("y", "py")], ferm)
    rot = VarTable.from_pairs([("q1", "p1"), ("q2", "p2")], ferm)
    sc = VarTable.from_pairs([("u1", "k1"), ("u2", "k2")], ferm)
    tx = VarTable.from_pairs([("X1", "P1"), ("X2", "P2")], ferm)
    m1 = rotation_map(xy, rot, d.alpha, (("x", "y"), ("q1", "q2")), (("px", "py"), ("p1", "p2")))
    m2 = scale_map(rot, sc, [(("q1", "p1"), ("u1", "k1"), np.sqrt(d.a)),
                             (("q2", "p2"), ("u2", "k2"), np.sqrt(d.b))])
    m3 = complexify_map(sc, tx, [(("u1", "k1"), ("X1", "P1")), (("u2", "k2"), ("X2", "P2"))])
    composed = m1.compose(m2).compose(m3)
    x, y, px, py = xy.vars("x", "y", "px", "py")
    H_B = 0.5 * (px * px + py * py) + 0.5 * (mu1 * x * x + mu2 * y * y - 2 * rho * x * y)
    H = composed.pullback(H_B) + fermionic_hamiltonian(tx, (d.a, d.b))
    X1, X2, P1, P2 = tx.vars("X1", "X2", "P1", "P2")
    H_expected = 1j * (d.a * (P1 * X1) + d.b * (P2 * X2)) + fermionic_hamiltonian(tx, (d.a, d.b))
    integrals = _sector_integrals(tx, (1, 2))
    charges = {
        f"sector{s}": build_supercharges_1d(tx, SQRT2, 0, X=f"X{s}", P=f"P{s}",
                                            theta=f"theta{s}", pi=f"pi{s}")
        for s in (1, 2)
    }
    return ModelInstance(
        "pu1", tx, H, integrals,
        supercharges=charges,
        metadata={"mu1": mu1, "mu2": mu2, "rho": rho, "a": d.a, "b": d.b, "alpha": d.alpha,
                  "reconstruction_error": d.reconstruction_error,
                  "hamiltonian_defect": (H - H_expected).max_abs()},
        bases={"xy": (xy, H_B + fermionic_hamiltonian(xy, (d.a, d.b))), "XP": (tx, H)},
        maps={"rotation": m1, "rescale": m2, "complexify": m3, "composed": composed},
    )


# -- Pais-Uhlenbeck, scheme two ---------------------------------------------

def _exact(x):
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class PowerMonomial:
    """``coefficient * X^x * P^p`` on one bosonic pair with rational
    exponents.  Exponent arithmetic is exact; nothing is evaluated."""

    coefficient: complex
    x: Fraction
    p: Fraction
    pair: str = ""

    def __post_init__(self):
        object.__setattr__(self, "coefficient", complex(self.coefficient))
        object.__setattr__(self, "x", _exact(self.x))
        object.__setattr__(self, "p", _exact(self.p))

    @property
    def exponents(self):
        return (self.x, self.p)

    def __mul__(self, other):
        if isinstance(other, PowerMonomial):
            if other.pair != self.pair:
                raise ValueError("product across pairs leaves the single-pair sub-algebra")
            return PowerMonomial(self.coefficient * other.coefficient, self.x + other.x,
                                 self.p + other.p, self.pair)
        return PowerMonomial(self.coefficient * other, self.x, self.p, self.pair)

    __rmul__ = __mul__

    def is_integral(self):
        return all(e.denominator == 1 and e >= 0 for e in self.exponents)

    def to_superpoly(self, table: VarTable, X="X", P="P") -> SuperPolynomial:
        if not self.is_integral():
            raise ValueError("only non-negative integer exponents have a polynomial form")
        return table.monomial({X: int(self.x), P: int(self.p)}, (), self.coefficient)


def power_bracket(f: PowerMonomial, g: PowerMonomial) -> PowerMonomial:
    """``{X^a P^b, X^c P^d} = (ad - cb) X^(a+c-1) P^(b+d-1)``; zero across pairs."""
    if f.pair != g.pair:
        return PowerMonomial(0, 0, 0, f.pair)
    c = f.x * g.p - g.x * f.p
    return PowerMonomial(f.coefficient * g.coefficient * float(c), f.x + g.x - 1, f.p + g.p - 1, f.pair)


def tilde_variables(w, pair=""):
    """``X~ = sqrt(w) X^((1+1/w)/2) P^((1-1/w)/2)`` and its partner."""
    w = _exact(w)
    if w <= 0:
        raise DomainError("frequencies must be positive")
    hi, lo = (1 + 1 / w) / 2, (1 - 1 / w) / 2
    s = np.sqrt(float(w))
    return PowerMonomial(s, hi, lo, pair), PowerMonomial(s, lo, hi, pair)


@dataclass
class PUScheme2:
    a: float
    b: float
    tilde: dict  # "X1", "P1", "X2", "P2" -> PowerMonomial
    brackets: dict  # (name, name) -> PowerMonomial
    products: dict  # "P1X1", "P2X2" -> PowerMonomial
    lift: ModelInstance


def build_pu_scheme2(a, b) -> PUScheme2:
    """Fractional-power map from the anisotropic oscillator to the isotropic
    one, followed by the planar supersymmetric construction."""
    if a <= 0 or b <= 0:
        raise DomainError("scheme two needs a > 0 and b > 0")
    X1, P1 = tilde_variables(a, "1")
    X2, P2 = tilde_variables(b, "2")
    tilde = {"X1": X1, "P1": P1, "X2": X2, "P2": P2}
    names = list(tilde)
    brackets = {(u, v): power_bracket(tilde[u], tilde[v]) for u in names for v in names}
    products = {"P1X1": P1 * X1, "P2X2": P2 * X2}
    lift = build_2d()
    return PUScheme2(float(a), float(b), tilde, brackets, products,
                     ModelInstance("pu2", lift.vartable, lift.hamiltonian, lift.named_integrals,
                                   lift.supercharges, {"a": float(a), "b": float(b), "omega": 1.0},
                                   lift.bases, lift.maps))


# -- isotonic ---------------------------------------------------------------

class IsotonicReduction(NamedTuple):
    a: float
    b: float
    samples: np.ndarray  # (n, 2) of (r, p)
    max_rel_error: float


def central_force_hamiltonian(r, p, k, l, m):
    return p ** 2 / (2 * m) + l ** 2 / (2 * m * r ** 2) + k * r ** 2


def isotonic_hamiltonian(z, p, a, b, m):
    return p ** 2 / (2 * m) + a * z ** 2 + b / z ** 2


def isotonic_reduction(k, l, m, n_samples=20, seed=0) -> IsotonicReduction:
    a, b = k, l ** 2 / (2 * m)
    rng = np.random.default_rng(seed)
    pts = np.column_stack([rng.uniform(0.1, 5.0, n_samples), rng.uniform(-5.0, 5.0, n_samples)])
    lhs = central_force_hamiltonian(pts[:, 0], pts[:, 1], k, l, m)
    rhs = isotonic_hamiltonian(pts[:, 0], pts[:, 1], a, b, m)
    err = float(np.max(np.abs(lhs - rhs) / np.abs(lhs)))
    return IsotonicReduction(a, b, pts, err)


def build_isotonic(k, l, m, n_samples=20, seed=0) -> ModelInstance:
    """Central-force reduction check plus the planar supersymmetric lift at
    ``omega = sqrt(k)``."""
    if k <= 0 or m <= 0:
        raise DomainError("isotonic model needs k > 0 and m > 0")
    red = isotonic_reduction(k, l, m, n_samples, seed)
    w = float(np.sqrt(k))
    ferm = _fermions(2)
    rp = VarTable.from_pairs([("x", "px"), ("y", "py")], ferm)
    qp, tx = _planar_tables()
    sc = scale_map(rp, qp, [(("x", "px"), ("q1", "p1"), np.sqrt(w)),
                            (("y", "py"), ("q2", "p2"), np.sqrt(w))])
    cx = complexify_map(qp, tx, [(("q1", "p1"), ("X1", "P1")), (("q2", "p2"), ("X2", "P2"))])
    composed = sc.compose(cx)
    x, y, px, py = rp.vars("x", "y", "px", "py")
    H_B = 0.5 * (px * px + py * py + w * w * (x * x + y * y))
    H = composed.pullback(H_B) + fermionic_hamiltonian(tx, (w, w))
    integrals = _planar_integrals(tx, cx)
    charges = build_supercharges_2d(tx)
    for name in ("Q1", "Qbar1", "Q2", "Qbar2"):
        integrals[name] = getattr(charges, name)
    return ModelInstance(
        "isotonic", tx, H, integrals,
        supercharges={"planar": charges},
        metadata={"k": k, "l": l, "m": m, "omega": w, "a": red.a, "b": red.b,
                  "reduction": red},
        bases={"xy": (rp, H_B + fermionic_hamiltonian(rp, (w, w))), "XP": (tx, H)},
        maps={"rescale": sc, "complexify": cx, "composed": composed},
    )


# -- U(n,n) -----------------------------------------------------------------

def build_nn(n) -> ModelInstance:
    """``H = i P^T Q`` with ``n`` bosonic and ``n`` fermionic pairs and the
    4n^2 integrals of the u(n,n) generators."""
    if n < 1:
        raise DomainError("n must be a positive integer")
    idx = range(1, n + 1)
    if n == 1:
        tx = VarTable.from_pairs([("X", "P")], _fermions(1))
    else:
        tx = VarTable.from_pairs([(f"X{j}", f"P{j}") for j in idx], _fermions(n))
    pv = _phase_vectors(tx, n)
    H = pv.hamiltonian()
    gens = unn_generators(n)
    integrals = {f"L{mu}": first_integral(g, pv) for mu, g in enumerate(gens)}
    return ModelInstance(f"nn{n}", tx, H, integrals, metadata={"n": n, "generators": gens})


def check_model(model: ModelInstance, tol=DEFAULT_TOL):
    """Hamiltonian parity and conservation of every named integral."""
    defects = model.conservation_defects()
    return parity_of(model.hamiltonian) is Parity.EVEN and all(d < tol for d in defects.values())
