"""Verification suites run by the command line and assembled into reports."""
from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources

import numpy as np

from pseudomech import dynamics
from pseudomech.gbracket import BracketContext, canonical_defect, gpb, jacobi_defect
from pseudomech.models import (
    DomainError,
    ModelInstance,
    build_1d,
    build_2d,
    build_isotonic,
    build_nn,
    build_pu_scheme1,
    build_pu_scheme2,
    verify_canonical,
)
from pseudomech.nambu import (
    NambuError,
    NambuSpec,
    alternative_specs,
    defect_battery,
    hamiltonian_brackets,
    nambu_bracket_of_hamiltonians,
    nambu_defect,
    select_order,
)
from pseudomech.sampling import random_homogeneous
from pseudomech.superpoly import Parity, SuperPolynomial, parity_of
from pseudomech.supercharge import (
    PATTERN_ALPHA,
    PATTERN_BETA,
    build_supercharges_1d,
    check_pattern,
    combined_charges,
    map_boson_fermion,
    nilpotency_defects,
    pattern_2d,
    r_symmetry_check,
    supercharge_algebra_2d,
    susy_transform_table,
)
from pseudomech.symmetry import (
    PhaseVectors,
    closure_check,
    invariance_defect,
    match_up_to_scalar,
    solve_in_span,
    split_by_parity,
    u11_generators,
    u22_generators,
)

MODELS = ("1d", "2d", "pu1", "pu2", "isotonic", "nn")
SUITES = ("canonical", "integrals", "supercharges", "nambu", "dynamics")
MODEL_SUITES = {
    "1d": SUITES,
    "2d": ("canonical", "integrals", "supercharges", "dynamics"),
    "pu1": ("canonical", "integrals", "supercharges", "dynamics"),
    "pu2": ("canonical", "integrals", "supercharges", "dynamics"),
    "isotonic": ("canonical", "integrals", "supercharges", "dynamics"),
    "nn": ("canonical", "integrals", "dynamics"),
}
DEFAULTS = {
    "tol": 1e-12, "closure_tol": 1e-10, "dynamics_tol": 1e-10, "reconstruction_tol": 1e-10,
    "mu1": 5.0, "mu2": 2.0, "rho": 1.0, "a": 3.0, "b": 0.5, "k": 4.0, "l": 2.0, "m": 1.0,
    "n": 3, "seed": 0,
}
ERROR_DEFECT = -1.0  # marks a check that could not be evaluated


class UsageError(ValueError):
    pass


@dataclass
class Check:
    name: str
    status: str  # pass | fail | error
    max_abs_defect: float
    details: str = ""

    def as_dict(self):
        # JSON has no infinity; an unbounded defect is reported as the largest float
        d = self.max_abs_defect if math.isfinite(self.max_abs_defect) else sys.float_info.max
        return {"name": self.name, "status": self.status, "max_abs_defect": d, "details": self.details}


@dataclass
class Report:
    model: str
    suite: str
    checks: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    determinant_order: str = "n/a"
    timestamp: str = ""

    @property
    def ok(self):
        return bool(self.checks) and all(c.status == "pass" for c in self.checks)

    def as_dict(self):
        return {
            "model": self.model,
            "suite": self.suite,
            "checks": [c.as_dict() for c in self.checks],
            "tolerances": dict(self.tolerances),
            "determinant_order": self.determinant_order,
            "timestamp": self.timestamp,
        }


def _status(defect, tol):
    return "pass" if math.isfinite(defect) and defect < tol else "fail"


class _Runner:
    def __init__(self, report: Report):
        self.report = report

    def check(self, name, fn, tol, details=""):
        """``fn`` returns a defect, or ``(defect, details)``."""
        try:
            out = fn()
        except Exception as e:  # reported, not raised: one broken check must not hide the rest
            self.report.checks.append(Check(name, "error", ERROR_DEFECT, f"{type(e).__name__}: {e}"))
            return
        if isinstance(out, tuple):
            out, details = out
        d = float(out)
        self.report.checks.append(Check(name, _status(d, tol), d, details))


def _proportional(f, g, tol):
    """Defect of ``f ~ g`` with a non-zero constant: 0 on success, else the
    least-squares residual (or inf if the constant vanishes)."""
    c = match_up_to_scalar(f, g, tol)
    if c is None:
        _, res = solve_in_span(f, [g])
        return max(res, tol), "not proportional"
    if abs(c) < tol:
        return math.inf, "constant vanishes"
    return 0.0, f"constant {c:.6g}"


# -- model construction -----------------------------------------------------

def build_model(name, config):
    if name == "1d":
        return build_1d()
    if name == "2d":
        return build_2d()
    if name == "pu1":
        return build_pu_scheme1(config["mu1"], config["mu2"], config["rho"])
    if name == "pu2":
        return build_pu_scheme2(config["a"], config["b"])
    if name == "isotonic":
        return build_isotonic(config["k"], config["l"], config["m"], seed=int(config["seed"]))
    if name == "nn":
        return build_nn(int(config["n"]))
    raise UsageError(f"unknown model {name!r}; choose from {', '.join(MODELS)}")


# -- shared batteries -------------------------------------------------------

def _canonical_bases(r, model: ModelInstance, tol):
    for basis, (table, _) in model.bases.items():
        r.check(f"canonical_table_{basis}", lambda t=table: canonical_defect(BracketContext(t)), tol)
    for name, cmap in model.maps.items():
        r.check(f"map_{name}_canonical", lambda c=cmap: verify_canonical(c, tol).max_defect, tol)
    r.check("hamiltonian_even", lambda: (0.0 if parity_of(model.hamiltonian) is Parity.EVEN
                                         else model.hamiltonian.odd_part().max_abs()), tol)


def _conservation(r, model: ModelInstance, tol, names=None):
    ctx = model.ctx
    for name in names or model.named_integrals:
        I = model.named_integrals[name]
        r.check(f"conserved_{name}", lambda I=I: gpb(I, model.hamiltonian, ctx).max_abs(), tol)


def _dynamics(r, model: ModelInstance, config, periodic=True):
    tol, dtol = config["tol"], config["dynamics_tol"]
    L = dynamics.linearize(model.hamiltonian, model.ctx)
    r.check("evolution_matrix_diagonal", lambda: float(np.abs(L.L - np.diag(np.diag(L.L))).max()), tol)
    grid = dynamics.default_grid()
    rng = np.random.default_rng(int(config["seed"]))
    sample_t = sorted(rng.uniform(0, 2 * np.pi, 5))
    r.check("flow_canonical", lambda: max(dynamics.flow_canonical_defect(L, t) for t in sample_t), dtol,
            f"t in {[round(t, 4) for t in sample_t]}")
    r.check("flow_group_property",
            lambda: max(dynamics.group_defect(L, *rng.uniform(0, 2 * np.pi, 2)) for _ in range(5)), tol)
    if periodic:
        w = model.metadata.get("omega", 1.0)
        r.check("period_recurrence", lambda: dynamics.recurrence_defect(L, 2 * np.pi / w), dtol,
                f"period 2 pi / omega, omega = {w:.12g}")
    for name, I in model.named_integrals.items():
        r.check(f"conserved_over_time_{name}", lambda I=I: dynamics.conservation_over_time(I, L, grid), dtol)


def _planar_supercharges(r, model: ModelInstance, config):
    tol = config["tol"]
    ctx = model.ctx
    charges = model.supercharges["planar"]
    alg = supercharge_algebra_2d(charges, ctx, tol)
    r.check("algebra_QQ_zero", lambda: alg.QQ_defect, tol)
    r.check("algebra_sigma_decomposition", lambda: alg.residual, tol)
    r.check("algebra_H0_conserved", lambda: gpb(alg.H0, model.hamiltonian, ctx).max_abs(), tol)
    r.check("algebra_H1_conserved", lambda: gpb(alg.H1, model.hamiltonian, ctx).max_abs(), tol)
    r.check("algebra_H0_proportional_to_H", lambda: _proportional(alg.H0, model.hamiltonian, tol), tol)
    rng = np.random.default_rng(int(config["seed"]))

    def rsym():
        reports = [r_symmetry_check(charges, *rng.uniform(0, 2 * np.pi, 2), ctx, tol) for _ in range(10)]
        return max(max(x.QQ_defect, x.residual, x.H0_shift, x.H1_shift) for x in reports)

    r.check("r_symmetry_10_phases", rsym, tol)
    for label, sign, cross in (("Q", 1, False), ("Qprime", -1, True)):
        pair = combined_charges(charges, sign)

        def pat(pair=pair, cross=cross):
            pc = check_pattern(susy_transform_table(pair, ctx), pattern_2d(cross), ctx.vartable, tol)
            return (pc.max_zero_defect if pc.ok else math.inf), "; ".join(map(str, pc.failures))

        r.check(f"susy_pattern_{label}", pat, tol)
        r.check(f"nilpotency_{label}", lambda pair=pair: nilpotency_defects(pair, ctx, 2).operator_defect, tol)
    pair = combined_charges(charges, 1)
    t = ctx.vartable
    for src, dst in (("C1", "C13"), ("C2", "C14")):
        r.check(f"boson_fermion_map_{src}_fermionic_component",
                lambda s=src, d=dst: _fermionic_image(map_boson_fermion(model.named_integrals[s], pair, ctx),
                                                      model.named_integrals[d], t, tol), tol)


def _fermionic_image(image, target, table, tol):
    """Compare the purely fermionic monomials of ``image`` with ``target``.

    The full double bracket also returns a multiple of the bosonic source, so
    only the component in the fermionic sector is checked here."""
    # keys above the Grassmann mask carry the even exponents
    fermionic = SuperPolynomial(table, {k: c for k, c in image.items() if (k >> table.n_odd) == 0})
    d, det = _proportional(fermionic, target, tol)
    rest = image - fermionic
    return d, f"{det}; bosonic remainder max |coeff| {rest.max_abs():.3g}"


def _random_jacobi(r, table, config, n=100):
    ctx = BracketContext(table)
    rng = np.random.default_rng(int(config["seed"]))

    def run():
        worst = 0.0
        for _ in range(n):
            f, g, h = (random_homogeneous(table, rng) for _ in range(3))
            worst = max(worst, jacobi_defect(f, g, h, ctx).max_abs())
        return worst

    r.check(f"graded_jacobi_{n}_random_triples", run, config["tol"])


# -- 1D ---------------------------------------------------------------------

def _nambu_1d(r, model: ModelInstance, config, report: Report):
    tol = config["tol"]
    ctx, H = model.ctx, model.hamiltonian
    Z = [model.named_integrals[f"Z{mu}"] for mu in range(4)]
    try:
        spec = select_order(NambuSpec((Z[0], Z[3], Z[1]), Z[2]), H, ctx, tol)
    except NambuError as e:
        report.checks.append(Check("nambu_determinant_order", "error", ERROR_DEFECT, str(e)))
        return
    report.determinant_order = spec.order
    r.check("nambu_determinant_order", lambda: 0.0, tol,
            f"{spec.order}; normalization {spec.normalization.real:+.6g}; divisor multiplied on the right")
    for v in ("P", "X", "theta", "pi"):
        r.check(f"nambu_defect_{v}", lambda v=v: nambu_defect(ctx.vartable.var(v), H, spec, ctx).max_abs(), tol)
    r.check("nambu_defect_degree2_basis", lambda: defect_battery(spec, H, ctx, 2), tol)
    r.check("nambu_bracket_of_conserved_quantities",
            lambda: max(b.max_abs() for b in hamiltonian_brackets(Z, spec, ctx)), tol,
            "{Z^mu, Z0, Z3, Z1} for mu = 0..3")
    r.check("nambu_repeated_rows",
            lambda: nambu_bracket_of_hamiltonians([Z[0], Z[0], Z[1], Z[2]], spec, ctx).max_abs(), tol)

    def alternatives():
        alts = [(t, d) for t, d, _ in alternative_specs(Z, H, ctx, tol) if set(t) != {0, 1, 3}]
        return (0.0 if alts else math.inf), f"passing alternatives (triple, divisor): {alts}"

    r.check("nambu_alternative_triple", alternatives, tol)


def _suite_1d(r, model: ModelInstance, suite, config, report):
    tol = config["tol"]
    ctx = model.ctx
    t = model.vartable
    X, P, th, pi = t.vars("X", "P", "theta", "pi")
    if suite == "canonical":
        _canonical_bases(r, model, tol)
        r.check("hamiltonian_complex_form",
                lambda: (model.hamiltonian - 1j * (P * X + pi * th)).max_abs(), tol)
        _random_jacobi(r, model.bases["qp"][0], config)
    elif suite == "integrals":
        pv = PhaseVectors(t, ("P", "pi"), ("X", "theta"))
        gens = u11_generators()
        r.check("u11_eta_condition", lambda: max(g.eta_defect() for g in gens), tol)
        r.check("u11_invariance", lambda: max(invariance_defect(g, pv, model.hamiltonian).max_abs()
                                              for g in gens), tol)
        _conservation(r, model, tol)
        Z = model.named_integrals
        r.check("closure_Z1_Z2_zero", lambda: gpb(Z["Z1"], Z["Z2"], ctx).max_abs(), tol)
        r.check("closure_Z1_Z1_prop_Z0", lambda: _proportional(gpb(Z["Z1"], Z["Z1"], ctx), Z["Z0"], tol), tol)
        r.check("closure_Z2_Z2_prop_Z0", lambda: _proportional(gpb(Z["Z2"], Z["Z2"], ctx), Z["Z0"], tol), tol)
        r.check("bosonic_hamiltonian_prop_Z0_plus_Z3",
                lambda: _proportional((Z["Z0"] + Z["Z3"]) / 2, Z["H_B"], tol), tol)
        r.check("fermionic_hamiltonian_prop_Z0_minus_Z3",
                lambda: _proportional((Z["Z0"] - Z["Z3"]) / 2, Z["H_F"], tol), tol)
        Q = model.supercharges["alpha"]
        r.check("Z1_prop_Q_plus_Qbar", lambda: _proportional(Z["Z1"], Q.Q + Q.Qbar, tol), tol)
        r.check("Z2_prop_i_Qbar_minus_Q", lambda: _proportional(Z["Z2"], 1j * (Q.Qbar - Q.Q), tol), tol)
    elif suite == "supercharges":
        for label, pattern in (("alpha", PATTERN_ALPHA), ("beta", PATTERN_BETA)):
            pair = model.supercharges[label]
            nil = nilpotency_defects(pair, ctx, 3)
            r.check(f"{label}_QQ_zero", lambda nil=nil: nil.QQ.max_abs(), tol)
            r.check(f"{label}_QbarQbar_zero", lambda nil=nil: nil.QbarQbar.max_abs(), tol)
            r.check(f"{label}_half_i_QQbar_equals_H",
                    lambda pair=pair: (0.5j * gpb(pair.Q, pair.Qbar, ctx) - model.hamiltonian).max_abs(), tol)
            r.check(f"{label}_nilpotent_operators", lambda nil=nil: nil.operator_defect, tol,
                    "every monomial of degree <= 3")

            def pat(pair=pair, pattern=pattern):
                pc = check_pattern(susy_transform_table(pair, ctx), pattern, t, tol)
                return (pc.max_zero_defect if pc.ok else math.inf), "; ".join(map(str, pc.failures))

            r.check(f"{label}_susy_pattern", pat, tol)
        rng = np.random.default_rng(int(config["seed"]))

        def family():
            worst = 0.0
            for _ in range(10):
                while True:
                    a, b = (complex(*rng.normal(size=2)) for _ in range(2))
                    if abs(abs(a) ** 2 - abs(b) ** 2) > 1e-3:
                        break
                pair = build_supercharges_1d(t, a, b)
                worst = max(worst, (gpb(pair.Q, pair.Qbar, ctx)
                                    - (abs(a) ** 2 + abs(b) ** 2) * (P * X + pi * th)).max_abs())
            return worst

        r.check("random_family_QQbar", family, tol, "10 random (alpha, beta)")
        pair = model.supercharges["alpha"]
        r.check("boson_fermion_map_fermionic_component",
                lambda: _fermionic_image(map_boson_fermion(P * X, pair, ctx), pi * th, t, tol), tol)
    elif suite == "nambu":
        _nambu_1d(r, model, config, report)
    elif suite == "dynamics":
        L = dynamics.linearize(model.hamiltonian, ctx)
        r.check("evolution_matrix_1d", lambda: float(np.abs(L.L - np.diag([1j, -1j, 1j, -1j])).max()), tol)
        r.check("half_period_negation",
                lambda: float(np.abs(L.exp(np.pi) + np.eye(4)).max()), config["dynamics_tol"])
        _dynamics(r, model, config)


# -- other models -----------------------------------------------------------

def _suite_planar(r, model: ModelInstance, suite, config):
    tol = config["tol"]
    ctx = model.ctx
    if suite == "canonical":
        _canonical_bases(r, model, tol)
        pv = PhaseVectors(model.vartable, ("P1", "P2", "pi1", "pi2"), ("X1", "X2", "theta1", "theta2"))
        w = model.metadata.get("omega", 1.0)
        r.check("hamiltonian_complex_form", lambda: (model.hamiltonian - w * pv.hamiltonian()).max_abs(), tol)
    elif suite == "integrals":
        r.check("u22_eta_condition", lambda: max(g.eta_defect() for g in u22_generators()), tol)
        _conservation(r, model, tol)
        C = [model.named_integrals[f"C{mu}"] for mu in range(16)]
        even, odd = split_by_parity(C)

        def closure():
            pairs = [(i, j) for i in range(len(odd)) for j in range(len(odd))]
            rep = closure_check(odd, ctx, span=even, pairs=pairs)
            return rep.max_residual, f"{len(even)} even, {len(odd)} odd integrals"

        r.check("closure_odd_odd_in_even_span", closure, config["closure_tol"])
    elif suite == "supercharges":
        _planar_supercharges(r, model, config)
    elif suite == "dynamics":
        _dynamics(r, model, config)


def _suite_pu1(r, model: ModelInstance, suite, config):
    tol = config["tol"]
    ctx = model.ctx
    md = model.metadata
    if suite == "canonical":
        _canonical_bases(r, model, tol)
        r.check("potential_reconstruction", lambda: md["reconstruction_error"], config["reconstruction_tol"],
                f"a={md['a']:.12g}, b={md['b']:.12g}, alpha={md['alpha']:.12g}")
        r.check("hamiltonian_diagonal_form", lambda: md["hamiltonian_defect"], tol)
        r.check("frequency_order", lambda: 0.0 if md["a"] >= md["b"] else math.inf, tol)
    elif suite == "integrals":
        _conservation(r, model, tol)
    elif suite == "supercharges":
        for s, w in ((1, md["a"]), (2, md["b"])):
            pair = model.supercharges[f"sector{s}"]
            t = model.vartable
            X, P, th, pi = t.vars(f"X{s}", f"P{s}", f"theta{s}", f"pi{s}")
            H_s = 1j * w * (P * X + pi * th)
            nil = nilpotency_defects(pair, ctx, 2)
            r.check(f"sector{s}_QQ_zero", lambda nil=nil: max(nil.QQ.max_abs(), nil.QbarQbar.max_abs()), tol)
            r.check(f"sector{s}_half_i_w_QQbar_equals_H",
                    lambda pair=pair, H_s=H_s, w=w: (0.5j * w * gpb(pair.Q, pair.Qbar, ctx) - H_s).max_abs(), tol)
            r.check(f"sector{s}_supercharges_conserved",
                    lambda pair=pair: max(gpb(pair.Q, model.hamiltonian, ctx).max_abs(),
                                          gpb(pair.Qbar, model.hamiltonian, ctx).max_abs()), tol)
            r.check(f"sector{s}_nilpotent_operators", lambda nil=nil: nil.operator_defect, tol)
    elif suite == "dynamics":
        _dynamics(r, model, config, periodic=False)


def _suite_pu2(r, built, suite, config):
    tol = config["tol"]
    if suite == "canonical":
        for s in ("1", "2"):
            b = built.brackets[(f"X{s}", f"P{s}")]
            r.check(f"tilde_bracket_X{s}_P{s}",
                    lambda b=b: (abs(b.coefficient - 1) if b.exponents == (0, 0) else math.inf),
                    tol, f"exponents {b.exponents[0]}, {b.exponents[1]}")
        zero_pairs = [(u, v) for (u, v) in built.brackets if u[0] == v[0] or u[1] != v[1]]
        r.check("tilde_brackets_vanish",
                lambda: max(abs(built.brackets[p].coefficient) for p in zero_pairs), tol,
                f"{len(zero_pairs)} brackets")
        for s, w in (("1", built.a), ("2", built.b)):
            prod = built.products[f"P{s}X{s}"]
            r.check(f"tilde_product_P{s}X{s}",
                    lambda prod=prod, w=w: (abs(prod.coefficient - w) if prod.exponents == (1, 1) else math.inf),
                    tol, f"coefficient {prod.coefficient.real:.12g}, target {w}")
        _canonical_bases(r, built.lift, tol)
    else:
        _suite_planar(r, built.lift, suite, config)


def _suite_isotonic(r, model: ModelInstance, suite, config):
    tol = config["tol"]
    if suite == "canonical":
        red = model.metadata["reduction"]
        r.check("isotonic_reduction", lambda: red.max_rel_error, tol,
                f"a={red.a:.12g}, b={red.b:.12g}, {len(red.samples)} samples")
    _suite_planar(r, model, suite, config)


def _suite_nn(r, model: ModelInstance, suite, config):
    tol = config["tol"]
    if suite == "canonical":
        _canonical_bases(r, model, tol)
        r.check("canonical_table", lambda: canonical_defect(model.ctx), tol)
    elif suite == "integrals":
        gens = model.metadata["generators"]
        n = model.metadata["n"]
        r.check("generator_count", lambda: abs(len(gens) - 4 * n * n), 0.5, f"{len(gens)} generators")
        r.check("unn_eta_condition", lambda: max(g.eta_defect() for g in gens), tol)
        _conservation(r, model, tol)
    elif suite == "dynamics":
        _dynamics(r, model, config)


# -- entry point ------------------------------------------------------------

def resolve_config(config=None):
    out = dict(DEFAULTS)
    for k, v in (config or {}).items():
        if k not in DEFAULTS:
            raise UsageError(f"unknown config key {k!r}")
        out[k] = type(DEFAULTS[k])(v) if not isinstance(DEFAULTS[k], float) else float(v)
    return out


def run_suite(model_name, suite, config=None) -> Report:
    config = resolve_config(config)
    if model_name not in MODELS:
        raise UsageError(f"unknown model {model_name!r}; choose from {', '.join(MODELS)}")
    allowed = MODEL_SUITES[model_name]
    if suite != "all" and suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")
    if suite != "all" and suite not in allowed:
        raise UsageError(f"suite {suite!r} is not defined for model {model_name!r}")
    report = Report(model_name, suite, tolerances={
        "default": config["tol"], "closure": config["closure_tol"],
        "dynamics": config["dynamics_tol"], "reconstruction": config["reconstruction_tol"],
    })
    r = _Runner(report)
    try:
        built = build_model(model_name, config)
    except DomainError as e:
        report.checks.append(Check("build_model", "error", ERROR_DEFECT, str(e)))
        report.timestamp = _now()
        return report
    for s in (allowed if suite == "all" else (suite,)):
        if model_name == "1d":
            _suite_1d(r, built, s, config, report)
        elif model_name == "pu1":
            _suite_pu1(r, built, s, config)
        elif model_name == "pu2":
            _suite_pu2(r, built, s, config)
        elif model_name == "isotonic":
            _suite_isotonic(r, built, s, config)
        elif model_name == "nn":
            _suite_nn(r, built, s, config)
        else:
            _suite_planar(r, built, s, config)
    report.timestamp = _now()
    return report


def report_schema():
    return json.loads(resources.files("pseudomech").joinpath("report_schema.json").read_text())


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")
