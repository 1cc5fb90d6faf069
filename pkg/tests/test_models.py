from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudomech.gbracket import BracketContext, gpb
from pseudomech.models import (
    DomainError,
    LinearCanonicalMap,
    PowerMonomial,
    build_1d,
    build_2d,
    build_isotonic,
    build_nn,
    build_pu_scheme1,
    build_pu_scheme2,
    central_force_hamiltonian,
    check_model,
    isotonic_hamiltonian,
    isotonic_reduction,
    power_bracket,
    pu_diagonalize,
    tilde_variables,
    verify_canonical,
)
from pseudomech.superpoly import VarTable


def test_1d_complexified_hamiltonian():
    m = build_1d()
    X, P, th, pi = m.vartable.vars("X", "P", "theta", "pi")
    assert m.hamiltonian.allclose(1j * (P * X + pi * th))
    assert verify_canonical(m.maps["complexify"]).ok


def test_complexify_pullback_of_variables():
    m = build_1d()
    cmap = m.maps["complexify"]
    qp = cmap.source
    X, P = m.vartable.vars("X", "P")
    # q = (X + i P)/sqrt2
    assert cmap.pullback(qp.var("q")).allclose((X + 1j * P) / np.sqrt(2))


@pytest.mark.parametrize("build", [build_1d, build_2d, lambda: build_pu_scheme1(5, 2, 1),
                                   lambda: build_isotonic(4, 2, 1), lambda: build_nn(3)])
def test_every_model_conserves_its_integrals(build):
    m = build()
    assert check_model(m)
    assert max(m.conservation_defects().values()) < 1e-12


def test_2d_integral_inventory():
    m = build_2d()
    assert len(m.named_integrals) == 27
    ctx = m.ctx
    C = m.named_integrals
    assert gpb(C["C0"], m.hamiltonian, ctx).max_abs() < 1e-12
    # the Fradkin component and the energy are quadratic even integrals
    assert verify_canonical(m.maps["complexify"]).ok


def test_pu_diagonalization_known_case():
    d = pu_diagonalize(4, 1, 0)
    assert (d.a, d.b, d.alpha) == (pytest.approx(2), pytest.approx(1), pytest.approx(0))


def test_pu_reconstruction():
    d = pu_diagonalize(5, 2, 1)
    assert d.a >= d.b > 0 and d.reconstruction_error < 1e-10
    w = np.linalg.eigvalsh([[5, -1], [-1, 2]])
    assert np.allclose(sorted([d.b ** 2, d.a ** 2]), w)


@pytest.mark.parametrize("args", [(1, 1, 2), (-1, 2, 0), (0, 3, 0)])
def test_pu_domain(args):
    with pytest.raises(DomainError):
        build_pu_scheme1(*args)


def test_pu_scheme1_model():
    m = build_pu_scheme1(5, 2, 1)
    assert len(m.named_integrals) == 8
    assert m.metadata["hamiltonian_defect"] < 1e-12
    for cmap in m.maps.values():
        assert verify_canonical(cmap).ok


def test_verify_canonical_negative_control(qp):
    bad = LinearCanonicalMap.from_images(qp, qp, {"q": {"q": 2}, "p": {"p": 2}})
    rep = verify_canonical(bad)
    assert not rep.ok and rep.max_defect == pytest.approx(3)


def test_map_validation(qp, tx):
    with pytest.raises(ValueError):
        LinearCanonicalMap(np.eye(3), qp, tx)
    with pytest.raises(ValueError):
        LinearCanonicalMap.from_images(qp, tx, {"X": {"q": 1}})
    with pytest.raises(ValueError, match="parities"):
        LinearCanonicalMap.from_images(qp, qp, {"q": {"theta": 1}})
    m = build_1d().maps["complexify"]
    with pytest.raises(ValueError):
        m.compose(m)
    with pytest.raises(ValueError):
        m.pullback(tx.var("X"))


@pytest.mark.parametrize("a", [Fraction(1, 2), 1, 3])
def test_pu_scheme2(a):
    X, P = tilde_variables(a)
    b = power_bracket(X, P)
    assert b.exponents == (0, 0) and abs(b.coefficient - 1) < 1e-12
    prod = P * X
    assert prod.exponents == (1, 1) and abs(prod.coefficient - float(a)) < 1e-12


def test_pu_scheme2_model():
    built = build_pu_scheme2(3, 0.5)
    assert built.brackets[("X1", "P2")].coefficient == 0
    assert built.products["P2X2"].coefficient == pytest.approx(0.5)
    with pytest.raises(DomainError):
        build_pu_scheme2(0, 1)


exps = st.integers(0, 3)


@given(exps, exps, exps, exps, st.integers(-3, 3), st.integers(-3, 3))
@settings(max_examples=50)
def test_power_bracket_agrees_with_gpb(a, b, c, d, u, v):
    t = VarTable.from_pairs([("X", "P")], [])
    ctx = BracketContext(t)
    f, g = PowerMonomial(u, a, b), PowerMonomial(v, c, d)
    br = power_bracket(f, g)
    expected = gpb(f.to_superpoly(t), g.to_superpoly(t), ctx)
    if br.coefficient == 0:
        assert expected == 0
    else:
        assert br.to_superpoly(t).allclose(expected)


def test_power_monomial_rules():
    f = PowerMonomial(1, Fraction(1, 3), 2, "1")
    assert not f.is_integral()
    with pytest.raises(ValueError):
        f.to_superpoly(VarTable.from_pairs([("X", "P")], []))
    with pytest.raises(ValueError):
        f * PowerMonomial(1, 1, 1, "2")
    assert power_bracket(f, PowerMonomial(1, 1, 1, "2")).coefficient == 0
    assert (2 * f).coefficient == 2


def test_isotonic_sample_point():
    r, p = 1.5, 0.7
    red = isotonic_reduction(1, 2, 1)
    assert red.a == 1 and red.b == 2
    assert central_force_hamiltonian(r, p, 1, 2, 1) == pytest.approx(isotonic_hamiltonian(r, p, 1, 2, 1), rel=1e-14)
    assert red.max_rel_error < 1e-12
    assert isotonic_reduction(1, 0, 1).b == 0


def test_isotonic_model():
    m = build_isotonic(4, 2, 1)
    assert m.metadata["omega"] == 2.0
    X1, P1 = m.vartable.vars("X1", "P1")
    assert m.hamiltonian.coefficient({"X1": 1, "P1": 1}, ()) == pytest.approx(2j)
    for cmap in m.maps.values():
        assert verify_canonical(cmap).ok
    with pytest.raises(DomainError):
        build_isotonic(-1, 1, 1)


def test_nn_domain():
    with pytest.raises(DomainError):
        build_nn(0)
    assert len(build_nn(2).named_integrals) == 16
