import itertools

import numpy as np
import pytest
from conftest import TABLE, WIDE, homogeneous, monomials, polys
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudomech.parser import parse
from pseudomech.superpoly import (
    Parity,
    SuperPolynomial,
    VarTable,
    homogeneous_parts,
    left_derivative,
    multiply,
    parity_of,
    right_derivative,
    substitute,
    vary,
)


def _sort_sign(seq):
    """Sign of the permutation sorting ``seq`` by explicit bubble sort; 0 on a repeat."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j] > seq[j + 1]:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
                sign = -sign
    return sign


def test_anticommutation(qp):
    th, pi = qp.vars("theta", "pi")
    assert th * pi + pi * th == 0
    assert th * th == 0
    assert pi * th == -(th * pi)


def test_even_commutes_with_everything(qp):
    q, p, th = qp.vars("q", "p", "theta")
    assert q * th == th * q
    assert q * p == p * q


def test_product_sign_matches_bubble_sort_oracle():
    rng = np.random.default_rng(7)
    t = VarTable.from_pairs([("x", "y")], [(f"a{i}", f"b{i}") for i in range(3)])
    odd = t.odd_names
    for _ in range(1000):
        fa = list(rng.choice(odd, size=rng.integers(0, 4), replace=False))
        fb = list(rng.choice(odd, size=rng.integers(0, 4), replace=False))
        a, b = t.monomial((), fa), t.monomial((), fb)
        # both factors are words in written order, so the product is the
        # concatenated word
        expected = _sort_sign([odd.index(n) for n in fa + fb])
        if expected == 0:
            assert a * b == 0
        else:
            assert (a * b).coefficient((), sorted(fa + fb, key=odd.index)) == expected


def test_monomial_encoding_sign(qp):
    assert qp.monomial((), ("pi", "theta")) == -qp.monomial((), ("theta", "pi"))
    assert qp.monomial((), ("theta", "theta")) == 0


def test_overflow_guard(qp):
    q = qp.var("q")
    with pytest.raises(OverflowError):
        q ** 200


def test_different_tables_do_not_mix(qp, tx):
    with pytest.raises(ValueError):
        qp.var("q") + tx.var("X")
    with pytest.raises(ValueError):
        multiply(qp.var("q"), tx.var("X"))


def test_table_validation():
    from pseudomech.superpoly import Variable
    with pytest.raises(ValueError):
        VarTable([Variable("q", False, "coordinate", "p")])
    with pytest.raises(ValueError):
        VarTable([Variable("q", False, "coordinate", "p"), Variable("p", True, "momentum", "q")])


def test_parity_classification(qp):
    q, p, th, pi = qp.vars("q", "p", "theta", "pi")
    assert parity_of(q * p + th * pi) is Parity.EVEN
    assert parity_of(q * th) is Parity.ODD
    assert parity_of(q + th) is Parity.MIXED
    assert parity_of(qp.zero()) is Parity.EVEN
    with pytest.raises(ValueError):
        Parity.MIXED.degree


def test_homogeneous_parts(qp):
    q, th = qp.vars("q", "theta")
    parts = dict(homogeneous_parts(q + th))
    assert parts[0] == q and parts[1] == th


def test_derivatives_on_monomial(qp):
    q, p, th, pi = qp.vars("q", "p", "theta", "pi")
    f = q * q * th * pi
    assert left_derivative(f, "theta") == q * q * pi
    assert right_derivative(f, "theta") == -(q * q * pi)
    assert left_derivative(f, "pi") == -(q * q * th)
    assert right_derivative(f, "pi") == q * q * th
    assert left_derivative(f, "q") == right_derivative(f, "q") == 2 * q * th * pi


@given(homogeneous(), st.sampled_from(TABLE.names))
def test_left_right_relation(f, v):
    # d_left = (-1)^(|v| (|v| + |f|)) d_right
    if not f:
        return
    pv = int(TABLE.is_odd(v))
    pf = parity_of(f).degree
    sign = -1 if (pv * (pv + pf)) & 1 else 1
    assert left_derivative(f, v) == sign * right_derivative(f, v)


@given(polys(), polys(), polys())
@settings(max_examples=60)
def test_ring_axioms(a, b, c):
    assert ((a * b) * c).allclose(a * (b * c))
    assert (a * (b + c)).allclose(a * b + a * c)
    assert ((a + b) * c).allclose(a * c + b * c)


@given(homogeneous(), homogeneous())
def test_supercommutativity(a, b):
    s = -1 if parity_of(a).degree * parity_of(b).degree else 1
    assert (a * b).allclose(s * (b * a))


@given(homogeneous(), homogeneous(), st.sampled_from(TABLE.odd_names))
def test_graded_leibniz_left(a, b, v):
    # left derivative past a: sign (-1)^|a|
    s = -1 if parity_of(a).degree else 1
    lhs = left_derivative(a * b, v)
    rhs = left_derivative(a, v) * b + s * (a * left_derivative(b, v))
    assert lhs.allclose(rhs)


@given(polys())
def test_string_round_trip_through_parser(f):
    assert parse(str(f), TABLE) == f


def test_substitute_identity_and_scaling(qp):
    th, pi = qp.vars("theta", "pi")
    f = th * pi + qp.var("q") ** 2
    assert substitute(f, {}) == f
    assert substitute(th * pi, {"theta": 2 * th, "pi": 3 * pi}) == 6 * (th * pi)


def test_substitute_rejects_parity_violation(qp):
    with pytest.raises(ValueError):
        substitute(qp.var("theta"), {"theta": qp.var("q")})


@given(polys(WIDE, 2), polys(WIDE, 2))
@settings(max_examples=40)
def test_substitute_is_homomorphic(f, g):
    rng = np.random.default_rng(0)
    imgs = {}
    for group in (WIDE.even_names, WIDE.odd_names):
        for n in group:
            p = WIDE.zero()
            for m in group:
                p = p + complex(*rng.normal(size=2)) * WIDE.var(m)
            imgs[n] = p
    assert substitute(f * g, imgs).allclose(substitute(f, imgs) * substitute(g, imgs), 1e-9)


def test_vary_first_order(qp):
    q, p, th, pi = qp.vars("q", "p", "theta", "pi")
    assert vary(q * q, {"q": p}) == 2 * q * p
    assert vary(th * pi, {"theta": 2 * th}) == 2 * (th * pi)
    with pytest.raises(ValueError):
        vary(th, {"theta": q})


def test_power_and_scalar_ops(qp):
    q = qp.var("q")
    assert (q + 1) ** 2 == q * q + 2 * q + 1
    assert (2 * q) / 2 == q
    assert 1 - q == -(q - 1)
    with pytest.raises(ValueError):
        q ** -1


def test_monomials_sorted_by_degree(qp):
    q, th = qp.vars("q", "theta")
    f = q ** 3 + th + 1
    assert [m.degree for m, _ in f.monomials()] == [0, 1, 3]


@given(monomials(TABLE, 3))
def test_coefficient_lookup(m):
    for mono, c in m.monomials():
        assert m.coefficient(dict(mono.even), mono.odd) == c


def test_all_orderings_of_three_odd_factors():
    t = VarTable.from_pairs([], [("a", "b"), ("c", "d")])
    odd = t.odd_names
    for perm in itertools.permutations(odd[:3]):
        prod = t.const(1)
        for n in perm:
            prod = prod * t.var(n)
        assert prod.coefficient((), odd[:3]) == _sort_sign([odd.index(n) for n in perm])


def test_zero_polynomial_behaviour(qp):
    z = qp.zero()
    assert not z and z == 0 and z.max_abs() == 0.0 and str(z) == "0"
    assert SuperPolynomial(qp, {0: 1e-20}) == 0
