"""Acceptance gate: fifteen criteria at their stated tolerances.

Run with pytest (a PASS/FAIL line per criterion is printed in the terminal
summary) or directly: ``python3 tests/test_acceptance.py``.
"""
import json
import math
import os
import sys
from fractions import Fraction

import jsonschema
import numpy as np
import pytest

from pseudomech import dynamics
from pseudomech.cli import main as cli_main
from pseudomech.gbracket import BracketContext, canonical_defect, gpb, jacobi_defect
from pseudomech.models import (
    build_1d,
    build_2d,
    build_isotonic,
    build_nn,
    build_pu_scheme1,
    power_bracket,
    pu_diagonalize,
    tilde_variables,
    verify_canonical,
)
from pseudomech.nambu import NambuSpec, alternative_specs, hamiltonian_brackets, nambu_defect, select_order
from pseudomech.parser import BinOp, Imag, ImagUnit, Neg, Num, PiConst, Pow, Var, parse_expr, to_source
from pseudomech.sampling import random_homogeneous
from pseudomech.supercharge import (
    PATTERN_ALPHA,
    PATTERN_BETA,
    build_supercharges_1d,
    check_pattern,
    combined_charges,
    map_boson_fermion,
    monomial_basis,
    pattern_2d,
    r_symmetry_check,
    supercharge_algebra_2d,
    susy_transform_table,
)
from pseudomech.suites import report_schema, run_suite
from pseudomech.superpoly import VarTable
from pseudomech.symmetry import closure_check, match_up_to_scalar, solve_in_span, split_by_parity

TOL = 1e-12
RESULTS = {}


def _nonzero_scalar(f, g):
    c = match_up_to_scalar(f, g, TOL)
    return c is not None and abs(c) > TOL, c


def criterion_1():
    """Canonical tables in the real and complex bases."""
    m = build_1d()
    worst = max(canonical_defect(BracketContext(t)) for t, _ in m.bases.values())
    return worst < TOL, f"max defect {worst:.1e} over bases {list(m.bases)}"


def criterion_2():
    """Graded Jacobi on 100 random homogeneous triples."""
    t = VarTable.from_pairs([("q", "p")], [("theta", "pi")])
    ctx, rng = BracketContext(t), np.random.default_rng(0)
    worst = max(jacobi_defect(*(random_homogeneous(t, rng, 3) for _ in range(3)), ctx).max_abs()
                for _ in range(100))
    return worst < TOL, f"max jacobi defect {worst:.1e}"


def criterion_3():
    """1D supercharge algebra at the two reference points and ten random pairs."""
    m = build_1d()
    ctx, t, H = m.ctx, m.vartable, m.hamiltonian
    X, P, th, pi = t.vars("X", "P", "theta", "pi")
    worst = 0.0
    for pair in m.supercharges.values():
        worst = max(worst, gpb(pair.Q, pair.Q, ctx).max_abs(), gpb(pair.Qbar, pair.Qbar, ctx).max_abs(),
                    (0.5j * gpb(pair.Q, pair.Qbar, ctx) - H).max_abs())
    rng = np.random.default_rng(1)
    n = 0
    while n < 10:
        a, b = (complex(*rng.normal(size=2)) for _ in range(2))
        if abs(abs(a) ** 2 - abs(b) ** 2) < 1e-3:
            continue
        pair = build_supercharges_1d(t, a, b)
        worst = max(worst, (gpb(pair.Q, pair.Qbar, ctx) - (abs(a) ** 2 + abs(b) ** 2) * (P * X + pi * th)).max_abs())
        n += 1
    return worst < TOL, f"max defect {worst:.1e}"


def criterion_4():
    """{{f, Q}, Q} = 0 on every monomial of degree <= 3."""
    m = build_1d()
    ctx = m.ctx
    basis = monomial_basis(m.vartable, 3)
    worst = max(gpb(gpb(f, Q, ctx), Q, ctx).max_abs()
                for pair in m.supercharges.values() for Q in (pair.Q, pair.Qbar) for f in basis)
    return worst < TOL, f"max over {len(basis)} monomials and 4 charges {worst:.1e}"


def criterion_5():
    """Transformation patterns in 1D (both charges) and 2D (Q and Q')."""
    m1, m2 = build_1d(), build_2d()
    checks = [check_pattern(susy_transform_table(m1.supercharges["alpha"], m1.ctx), PATTERN_ALPHA, m1.vartable),
              check_pattern(susy_transform_table(m1.supercharges["beta"], m1.ctx), PATTERN_BETA, m1.vartable)]
    for sign, cross in ((1, False), (-1, True)):
        pair = combined_charges(m2.supercharges["planar"], sign)
        checks.append(check_pattern(susy_transform_table(pair, m2.ctx), pattern_2d(cross), m2.vartable))
    ok = all(c.ok for c in checks) and all(abs(v) > TOL for c in checks for v in c.constants.values())
    return ok, f"{sum(c.ok for c in checks)}/4 tables, zero entries max {max(c.max_zero_defect for c in checks):.1e}"


def criterion_6():
    """4, 16 and 36 first integrals for n = 1, 2, 3."""
    parts, ok = [], True
    for n in (1, 2, 3):
        m = build_nn(n)
        d = max(m.conservation_defects().values())
        ok &= len(m.named_integrals) == 4 * n * n and d < TOL
        parts.append(f"n={n}: {len(m.named_integrals)} integrals, max {d:.1e}")
    return ok, "; ".join(parts)


def criterion_7():
    """1D closure relations and odd-odd closure in the 2D even span."""
    m = build_1d()
    ctx, Z = m.ctx, m.named_integrals
    z12 = gpb(Z["Z1"], Z["Z2"], ctx).max_abs()
    ok11, c11 = _nonzero_scalar(gpb(Z["Z1"], Z["Z1"], ctx), Z["Z0"])
    ok22, c22 = _nonzero_scalar(gpb(Z["Z2"], Z["Z2"], ctx), Z["Z0"])
    m2 = build_2d()
    even, odd = split_by_parity([m2.named_integrals[f"C{mu}"] for mu in range(16)])
    res = closure_check(odd, m2.ctx, span=even).max_residual
    return (z12 < TOL and ok11 and ok22 and res < 1e-10,
            f"{{Z1,Z2}} {z12:.1e}; {{Z1,Z1}} = {c11:.3g} Z0; {{Z2,Z2}} = {c22:.3g} Z0; 2D residual {res:.1e}")


def criterion_8():
    """Boson to fermion maps, taken literally on the full double bracket."""
    m1, m2 = build_1d(), build_2d()
    X, P, th, pi = m1.vartable.vars("X", "P", "theta", "pi")
    pair = combined_charges(m2.supercharges["planar"], 1)
    C = m2.named_integrals
    cases = [("PX", "pi theta", P * X, pi * th, m1.supercharges["alpha"], m1.ctx)]
    cases += [(s, d, C[s], C[d], pair, m2.ctx) for s, d in (("C1", "C13"), ("C2", "C14"))]
    oks, parts = [], []
    for src, dst, E, F, charges, ctx in cases:
        image = map_boson_fermion(E, charges, ctx)
        ok, c = _nonzero_scalar(image, F)
        oks.append(ok)
        if ok:
            parts.append(f"{src} -> {c:.3g} {dst}")
        else:
            # report the actual image in the span of source and target
            (a, b), res = solve_in_span(image, [E, F])
            parts.append(f"{src} -> ({a:.3g}) {src} + ({b:.3g}) {dst} [residual {res:.1e}]")
    return all(oks), "; ".join(parts)


def criterion_9():
    """Nambu dynamics of the four variables, vanishing 4-brackets of
    conserved quantities, and at least one alternative triple."""
    m = build_1d()
    ctx, H, t = m.ctx, m.hamiltonian, m.vartable
    Z = [m.named_integrals[f"Z{mu}"] for mu in range(4)]
    spec = select_order(NambuSpec((Z[0], Z[3], Z[1]), Z[2]), H, ctx, TOL)
    rates = {"P": -1j, "X": 1j, "theta": 1j, "pi": -1j}
    defect = max(nambu_defect(t.var(v), H, spec, ctx).max_abs() for v in rates)
    eom = max((gpb(t.var(v), H, ctx) - r * t.var(v)).max_abs() for v, r in rates.items())
    brackets = max(b.max_abs() for b in hamiltonian_brackets(Z, spec, ctx))
    alts = [(tr, d) for tr, d, _ in alternative_specs(Z, H, ctx, TOL) if set(tr) != {0, 1, 3}]
    ok = defect < TOL and eom < TOL and brackets < TOL and bool(alts)
    return ok, (f"defect {defect:.1e}, brackets {brackets:.1e}, {len(alts)} alternatives "
                f"({spec.order}, c = {spec.normalization.real:+.3g})")


def criterion_10():
    """2D supercharge algebra and R-symmetry over 10 random phases."""
    m = build_2d()
    ctx, H = m.ctx, m.hamiltonian
    charges = m.supercharges["planar"]
    alg = supercharge_algebra_2d(charges, ctx)
    conserved = max(gpb(alg.H0, H, ctx).max_abs(), gpb(alg.H1, H, ctx).max_abs())
    okH0, c = _nonzero_scalar(alg.H0, H)
    rng = np.random.default_rng(2)
    rsym = all(r_symmetry_check(charges, *rng.uniform(0, 2 * np.pi, 2), ctx).ok() for _ in range(10))
    ok = alg.QQ_defect < TOL and alg.residual < TOL and conserved < TOL and okH0 and rsym
    return ok, f"QQ {alg.QQ_defect:.1e}, residual {alg.residual:.1e}, H0 = {c:.3g} H, R-symmetry {rsym}"


def criterion_11():
    """PU scheme one at (5, 2, 1), and the frequencies at rho = 0."""
    m = build_pu_scheme1(5, 2, 1)
    canon = verify_canonical(m.maps["composed"]).max_defect
    cons = max(m.conservation_defects().values())
    rec = m.metadata["reconstruction_error"]
    d = pu_diagonalize(4, 1, 0)
    freq = abs(d.a - 2) < TOL and abs(d.b - 1) < TOL
    ok = canon < TOL and len(m.named_integrals) == 8 and cons < TOL and rec < 1e-10 and freq
    return ok, f"canonical {canon:.1e}, 8 integrals max {cons:.1e}, reconstruction {rec:.1e}, (a, b) = ({d.a}, {d.b})"


def criterion_12():
    """Fractional-power variables are canonical and P~X~ = a PX."""
    ok, parts = True, []
    for a in (Fraction(1, 2), 1, 3):
        X, P = tilde_variables(a)
        b = power_bracket(X, P)
        prod = P * X
        good = (b.exponents == (0, 0) and abs(b.coefficient - 1) < TOL
                and prod.exponents == (1, 1) and abs(prod.coefficient - float(a)) < TOL)
        ok &= good
        parts.append(f"a={a}: {'ok' if good else 'bad'}")
    return ok, ", ".join(parts)


def criterion_13():
    """Isotonic reduction and the planar battery at omega = sqrt(k)."""
    k, l, m_ = 4, 2, 1
    model = build_isotonic(k, l, m_)
    red = model.metadata["reduction"]
    rep = run_suite("isotonic", "all", {"k": k, "l": l, "m": m_})
    ok = (red.max_rel_error < TOL and red.a == k and red.b == l ** 2 / (2 * m_)
          and model.metadata["omega"] == math.sqrt(k) and rep.ok)
    return ok, f"rel error {red.max_rel_error:.1e}, a={red.a}, b={red.b}, battery {len(rep.checks)} checks ok={rep.ok}"


def criterion_14():
    """Canonical flows, conservation over [0, 2 pi], 2 pi recurrence."""
    grid = dynamics.default_grid()
    rng = np.random.default_rng(3)
    canon = cons = 0.0
    for m in (build_1d(), build_2d(), build_pu_scheme1(5, 2, 1), build_isotonic(4, 2, 1), build_nn(2)):
        L = dynamics.linearize(m.hamiltonian, m.ctx)
        canon = max(canon, max(dynamics.flow_canonical_defect(L, t) for t in rng.uniform(0, 2 * np.pi, 5)))
        cons = max(cons, max(dynamics.conservation_over_time(I, L, grid) for I in m.named_integrals.values()))
    m = build_1d()
    rec = dynamics.recurrence_defect(dynamics.linearize(m.hamiltonian, m.ctx))
    return max(canon, cons, rec) < 1e-10, f"canonical {canon:.1e}, conservation {cons:.1e}, recurrence {rec:.1e}"


def _random_ast(rng, depth=0):
    if depth > 3 or rng.random() < 0.3:
        kind = rng.integers(6)
        if kind == 0:
            return Num(int(rng.integers(0, 100)))
        if kind == 1:
            return Num(float(np.round(rng.uniform(0, 50), 3)))
        if kind == 2:
            return Imag(float(np.round(rng.uniform(0, 5), 2)))
        if kind == 3:
            return ImagUnit() if rng.random() < 0.5 else PiConst()
        return Var(str(rng.choice(["q", "p", "theta", "pi"])))
    kind = rng.integers(3)
    if kind == 0:
        return Neg(_random_ast(rng, depth + 1))
    if kind == 1:
        return Pow(_random_ast(rng, depth + 1), int(rng.integers(0, 4)))
    return BinOp(str(rng.choice(["+", "-", "*"])), _random_ast(rng, depth + 1), _random_ast(rng, depth + 1))


def criterion_15(tmp_dir=None):
    """Parser round trip on 500 ASTs; CLI 1D report exits 0 and validates."""
    import tempfile

    rng = np.random.default_rng(4)
    bad = 0
    for _ in range(500):
        e = _random_ast(rng)
        src = to_source(e)
        if parse_expr(src) != e or to_source(parse_expr(src)) != src:
            bad += 1
    with tempfile.TemporaryDirectory(dir=tmp_dir) as d:
        path = os.path.join(d, "report.json")
        stdout, sys.stdout = sys.stdout, open(os.devnull, "w")
        try:
            code = cli_main(["verify", "--model", "1d", "--suite", "all", "--json", path])
        finally:
            sys.stdout.close()
            sys.stdout = stdout
        with open(path) as fh:
            data = json.load(fh)
    try:
        jsonschema.validate(data, report_schema())
        valid = True
    except jsonschema.ValidationError:
        valid = False
    return bad == 0 and code == 0 and valid, f"{500 - bad}/500 round trips, exit code {code}, schema valid {valid}"


CRITERIA = [globals()[f"criterion_{n}"] for n in range(1, 16)]


def _line(n, ok, detail):
    return f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"


@pytest.mark.parametrize("n", range(1, 16))
def test_criterion(n):
    ok, detail = CRITERIA[n - 1]()
    RESULTS[n] = _line(n, ok, detail)
    print(RESULTS[n])
    assert ok, RESULTS[n]


if __name__ == "__main__":
    failed = 0
    for n, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        failed += not ok
        print(_line(n, ok, detail))
    sys.exit(1 if failed else 0)
