import numpy as np
import pytest
from hypothesis import strategies as st

from pseudomech.gbracket import BracketContext
from pseudomech.superpoly import Parity, VarTable


@pytest.fixture
def qp():
    return VarTable.from_pairs([("q", "p")], [("theta", "pi")])


@pytest.fixture
def tx():
    return VarTable.from_pairs([("X", "P")], [("theta", "pi")])


@pytest.fixture
def ctx_qp(qp):
    return BracketContext(qp)


@pytest.fixture
def ctx_tx(tx):
    return BracketContext(tx)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# 2 even + 2 odd variables, shared by the property tests
TABLE = VarTable.from_pairs([("q", "p")], [("theta", "pi")])
WIDE = VarTable.from_pairs([("q1", "p1"), ("q2", "p2")], [("theta1", "pi1"), ("theta2", "pi2")])

coeffs = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False).map(
    lambda c: complex(round(c.real, 3), round(c.imag, 3)))


@st.composite
def monomials(draw, table=TABLE, max_degree=3, parity=None):
    odds = draw(st.lists(st.sampled_from(table.odd_names), unique=True, max_size=min(max_degree, table.n_odd)))
    if parity is not None and (len(odds) & 1) != (parity is Parity.ODD):
        if odds:
            odds = odds[1:]
        else:
            odds = [draw(st.sampled_from(table.odd_names))]
    odds = draw(st.permutations(odds))  # written order, not sorted
    budget = max_degree - len(odds)
    exps = {}
    for _ in range(draw(st.integers(0, max(budget, 0)))):
        n = draw(st.sampled_from(table.even_names))
        exps[n] = exps.get(n, 0) + 1
    return table.monomial(exps, odds, draw(coeffs))


@st.composite
def polys(draw, table=TABLE, max_degree=3, parity=None, max_terms=4):
    out = table.zero()
    for m in draw(st.lists(monomials(table, max_degree, parity), max_size=max_terms)):
        out = out + m
    return out


def homogeneous(table=TABLE, max_degree=3, max_terms=4):
    return st.sampled_from([Parity.EVEN, Parity.ODD]).flatmap(
        lambda p: polys(table, max_degree, p, max_terms))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
