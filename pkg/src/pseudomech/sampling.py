"""Random phase-space functions for property checks."""
from __future__ import annotations

import itertools

import numpy as np

from pseudomech.superpoly import Parity, SuperPolynomial, VarTable


def _monomial_shapes(table: VarTable, max_degree, parity):
    evens, odds = table.even_names, table.odd_names
    shapes = []
    for k in range(min(max_degree, len(odds)) + 1):
        if parity is not None and (k & 1) != (parity is Parity.ODD):
            continue
        for odd in itertools.combinations(odds, k):
            for d in range(max_degree - k + 1):
                for ev in itertools.combinations_with_replacement(evens, d):
                    shapes.append((ev, odd))
    return shapes


def random_poly(table: VarTable, rng: np.random.Generator, max_degree=3, parity=None,
                n_terms=4) -> SuperPolynomial:
    """Sum of ``n_terms`` random monomials with complex Gaussian
    coefficients; ``parity`` restricts to EVEN or ODD monomials."""
    shapes = _monomial_shapes(table, max_degree, parity)
    out = table.zero()
    for idx in rng.choice(len(shapes), size=min(n_terms, len(shapes)), replace=False):
        ev, odd = shapes[idx]
        exps = {}
        for n in ev:
            exps[n] = exps.get(n, 0) + 1
        c = complex(rng.normal(), rng.normal())
        out = out + table.monomial(exps, odd, c)
    return out


def random_homogeneous(table, rng, max_degree=3, n_terms=4):
    parity = Parity.ODD if rng.random() < 0.5 else Parity.EVEN
    return random_poly(table, rng, max_degree, parity, n_terms)
