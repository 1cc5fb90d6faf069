"""Graded polynomial algebra over commuting and anticommuting variables.

A :class:`SuperPolynomial` is a finite complex-linear combination of
monomials ``x1^n1 ... xk^nk * t_i1 t_i2 ...`` where the ``x`` are even
(bosonic) variables and the ``t`` odd (Grassmann) variables.  Every monomial
is stored in canonical form: even factors first, then the odd factors in
ascending global order, with the permutation sign folded into the
coefficient.
"""
from __future__ import annotations

import enum
import numbers
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

from pseudomech import kernels

PRUNE = 1e-14
DEFAULT_TOL = 1e-12

# bits per even exponent field; the top bit of each field is an overflow guard
EXP_BITS = 8


class Parity(enum.Enum):
    EVEN = 0
    ODD = 1
    MIXED = 2

    @property
    def degree(self):
        """0 for even, 1 for odd; mixed has no degree."""
        if self is Parity.MIXED:
            raise ValueError("mixed-parity element has no degree")
        return self.value


@dataclass(frozen=True)
class Variable:
    name: str
    odd: bool
    role: str  # "coordinate" or "momentum"
    partner: str


class Monomial(NamedTuple):
    """Decoded monomial: even exponents by name and odd factors in order."""

    even: tuple
    odd: tuple

    @property
    def odd_degree(self):
        return len(self.odd)

    @property
    def degree(self):
        return sum(e for _, e in self.even) + len(self.odd)


class VarTable:
    """Ordered declaration of phase-space variables.

    Even and odd variables are numbered separately in declaration order; the
    odd numbering is the global ordering used for canonical monomials.
    """

    def __init__(self, entries: Sequence[Variable]):
        self.entries = tuple(entries)
        names = [v.name for v in self.entries]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        self._by_name = {v.name: v for v in self.entries}
        for v in self.entries:
            if v.role not in ("coordinate", "momentum"):
                raise ValueError(f"{v.name}: role must be coordinate or momentum")
            w = self._by_name.get(v.partner)
            if w is None:
                raise ValueError(f"{v.name}: partner {v.partner!r} not declared")
            if w.partner != v.name or w.role == v.role or w.odd != v.odd:
                raise ValueError(f"{v.name} and {w.name} are not a conjugate pair")
        self.even_names = tuple(v.name for v in self.entries if not v.odd)
        self.odd_names = tuple(v.name for v in self.entries if v.odd)
        self.n_odd = len(self.odd_names)
        self.odd_mask = (1 << self.n_odd) - 1
        self._bit = {n: i for i, n in enumerate(self.odd_names)}
        self._shift = {n: self.n_odd + i * EXP_BITS for i, n in enumerate(self.even_names)}
        self.guard = 0
        for s in self._shift.values():
            self.guard |= 1 << (s + EXP_BITS - 1)
        self.total_bits = self.n_odd + EXP_BITS * len(self.even_names)
        self.kernel = kernels.backend_for(self.total_bits)

    @classmethod
    def from_pairs(cls, bosonic=(), fermionic=()):
        """Build a table from ``(coordinate, momentum)`` name pairs."""
        entries = []
        for odd, pairs in ((False, bosonic), (True, fermionic)):
            for c, m in pairs:
                entries.append(Variable(c, odd, "coordinate", m))
                entries.append(Variable(m, odd, "momentum", c))
        return cls(entries)

    def __eq__(self, other):
        return isinstance(other, VarTable) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __contains__(self, name):
        return name in self._by_name

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __repr__(self):
        return "VarTable(" + ", ".join(v.name for v in self.entries) + ")"

    @property
    def names(self):
        return tuple(v.name for v in self.entries)

    def variable(self, name) -> Variable:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def is_odd(self, name):
        return self.variable(name).odd

    @property
    def pairs(self):
        """(coordinate, momentum) pairs in declaration order."""
        return [(v.name, v.partner) for v in self.entries if v.role == "coordinate"]

    def key_of(self, name):
        v = self.variable(name)
        if v.odd:
            return 1 << self._bit[name]
        return 1 << self._shift[name]

    def shift_of(self, name):
        return self._shift[name]

    def bit_of(self, name):
        return self._bit[name]

    def var(self, name) -> "SuperPolynomial":
        return SuperPolynomial(self, {self.key_of(name): 1 + 0j})

    def vars(self, *names):
        return tuple(self.var(n) for n in names)

    def const(self, c) -> "SuperPolynomial":
        return SuperPolynomial(self, {0: complex(c)})

    def zero(self) -> "SuperPolynomial":
        return SuperPolynomial(self, {})

    def decode(self, key) -> Monomial:
        field = (1 << EXP_BITS) - 1
        even = tuple((n, (key >> self._shift[n]) & field)
                     for n in self.even_names if (key >> self._shift[n]) & field)
        odd = tuple(n for n in self.odd_names if key & (1 << self._bit[n]))
        return Monomial(even, odd)

    def encode(self, even: Mapping[str, int] | Iterable = (), odd: Sequence[str] = ()):
        """Pack a monomial given odd factors in arbitrary order.

        Returns ``(key, sign)`` with ``sign`` in {-1, 0, +1}; zero when an odd
        factor repeats.
        """
        key = 0
        for n, e in dict(even).items():
            if self.is_odd(n):
                raise ValueError(f"{n} is odd; list it among the odd factors")
            if e < 0 or e >= 1 << (EXP_BITS - 1):
                raise OverflowError(f"exponent {e} out of range")
            key += e << self._shift[n]
        bits = []
        for n in odd:
            if not self.is_odd(n):
                raise ValueError(f"{n} is even")
            bits.append(self._bit[n])
        if len(set(bits)) != len(bits):
            return 0, 0
        inversions = sum(1 for i in range(len(bits)) for j in range(i + 1, len(bits))
                         if bits[i] > bits[j])
        for b in bits:
            key |= 1 << b
        return key, (-1 if inversions & 1 else 1)

    def monomial(self, even=(), odd=(), coeff=1.0) -> "SuperPolynomial":
        key, sign = self.encode(even, odd)
        if sign == 0:
            return self.zero()
        return SuperPolynomial(self, {key: complex(coeff) * sign})


def _as_complex(x):
    if isinstance(x, numbers.Number):
        return complex(x)
    return None


class SuperPolynomial:
    """Immutable sparse polynomial in even and odd variables."""

    __slots__ = ("table", "_terms")

    def __init__(self, table: VarTable, terms: Mapping[int, complex] | None = None,
                 prune: float = PRUNE):
        self.table = table
        self._terms = {k: complex(v) for k, v in (terms or {}).items() if abs(v) >= prune}

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def _coerce(self, other):
        if isinstance(other, SuperPolynomial):
            if other.table is not self.table and other.table != self.table:
                raise ValueError("operands are defined over different variable tables")
            return other
        c = _as_complex(other)
        if c is None:
            return NotImplemented
        return self.table.const(c)

    def _raw(self, terms):
        # already pruned by a kernel
        out = SuperPolynomial.__new__(SuperPolynomial)
        out.table = self.table
        out._terms = terms
        return out

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._raw(self.table.kernel.add_terms(self._terms, other._terms, 1 + 0j, PRUNE))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._raw(self.table.kernel.add_terms(self._terms, other._terms, -1 + 0j, PRUNE))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self._raw({k: -v for k, v in self._terms.items()})

    def scale(self, c):
        c = complex(c)
        return SuperPolynomial(self.table, {k: c * v for k, v in self._terms.items()})

    def __mul__(self, other):
        c = _as_complex(other)
        if c is not None:
            return self.scale(c)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t = self.table
        return self._raw(t.kernel.mul_terms(self._terms, other._terms, t.odd_mask, t.guard, PRUNE))

    def __rmul__(self, other):
        c = _as_complex(other)
        if c is None:
            return NotImplemented
        return self.scale(c)

    def __truediv__(self, other):
        c = _as_complex(other)
        if c is None:
            return NotImplemented
        return self.scale(1 / c)

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = self.table.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, SuperPolynomial):
            return self.table == other.table and self._terms == other._terms
        c = _as_complex(other)
        if c is None:
            return NotImplemented
        if c == 0:
            return not self._terms
        return self._terms == {0: c}

    __hash__ = None

    def max_abs(self):
        """Largest coefficient magnitude (0 for the zero polynomial)."""
        return max((abs(v) for v in self._terms.values()), default=0.0)

    def is_zero(self, tol=DEFAULT_TOL):
        return self.max_abs() < tol

    def allclose(self, other, tol=DEFAULT_TOL):
        return (self - other).max_abs() < tol

    def coefficient(self, even=(), odd=()):
        key, sign = self.table.encode(even, odd)
        return sign * self._terms.get(key, 0j) if sign else 0j

    def monomials(self):
        """Yield ``(Monomial, coefficient)`` in a deterministic order."""
        for k in sorted(self._terms, key=self._sort_key):
            yield self.table.decode(k), self._terms[k]

    def _sort_key(self, k):
        m = self.table.decode(k)
        return (m.degree, k)

    def parity(self) -> Parity:
        return parity_of(self)

    def even_part(self):
        return self._raw({k: v for k, v in self._terms.items()
                          if not (k & self.table.odd_mask).bit_count() & 1})

    def odd_part(self):
        return self._raw({k: v for k, v in self._terms.items()
                          if (k & self.table.odd_mask).bit_count() & 1})

    def degree(self):
        return max((m.degree for m, _ in self.monomials()), default=0)

    def conj_coefficients(self):
        return self._raw({k: v.conjugate() for k, v in self._terms.items()})

    def __repr__(self):
        return f"SuperPolynomial({self})"

    def __str__(self):
        return format_poly(self)


def _fmt_coeff(c):
    if c.imag == 0:
        return repr(c.real)
    if c.real == 0:
        return f"{c.imag!r}*i"
    return f"({c.real!r} + {c.imag!r}*i)"


def format_poly(f: SuperPolynomial):
    """Render in the expression syntax accepted by :mod:`pseudomech.parser`."""
    parts = []
    for mono, c in f.monomials():
        factors = [n if e == 1 else f"{n}^{e}" for n, e in mono.even] + list(mono.odd)
        if not factors:
            parts.append(_fmt_coeff(c))
        elif c == 1:
            parts.append("*".join(factors))
        else:
            parts.append(_fmt_coeff(c) + "*" + "*".join(factors))
    return " + ".join(parts) if parts else "0"


def multiply(a: SuperPolynomial, b: SuperPolynomial) -> SuperPolynomial:
    if a.table != b.table:
        raise ValueError("operands are defined over different variable tables")
    return a * b


def parity_of(f: SuperPolynomial) -> Parity:
    """Even if every monomial has even odd-degree, odd if all are odd.

    The zero polynomial is reported as even.
    """
    mask = f.table.odd_mask
    seen = {(k & mask).bit_count() & 1 for k, _ in f.items()}
    if seen <= {0}:
        return Parity.EVEN
    if seen == {1}:
        return Parity.ODD
    return Parity.MIXED


def homogeneous_parts(f: SuperPolynomial):
    """``[(degree, part), ...]`` for the non-zero even and odd parts."""
    return [(d, p) for d, p in ((0, f.even_part()), (1, f.odd_part())) if p]


def _derivative(f, v, left):
    t = f.table
    var = t.variable(v)
    if not var.odd:
        return f._raw(t.kernel.deriv_even(f._terms, t.shift_of(v), EXP_BITS))
    return f._raw(t.kernel.deriv_odd(f._terms, t.bit_of(v), left, t.odd_mask))


def right_derivative(f: SuperPolynomial, v: str) -> SuperPolynomial:
    """Derivative with ``v`` commuted to the right end of each monomial."""
    return _derivative(f, v, False)


def left_derivative(f: SuperPolynomial, v: str) -> SuperPolynomial:
    """Derivative with ``v`` commuted to the left end of each monomial."""
    return _derivative(f, v, True)


def _ordered_factors(table, key):
    """Canonical factor list of a monomial: even (with repeats) then odd."""
    m = table.decode(key)
    factors = []
    for n, e in m.even:
        factors.extend([n] * e)
    factors.extend(m.odd)
    return factors


def substitute(f: SuperPolynomial, images: Mapping[str, SuperPolynomial],
               target: VarTable | None = None) -> SuperPolynomial:
    """Replace variables by polynomials, preserving factor order.

    Variables missing from ``images`` map to the same-named variable of
    ``target``.  Each image must be parity-homogeneous with the parity of the
    variable it replaces.
    """
    src = f.table
    target = target or src
    resolved = {}
    for v in src.entries:
        img = images.get(v.name)
        if img is None:
            img = target.var(v.name)
        elif not isinstance(img, SuperPolynomial):
            img = target.const(img)
        if img.table != target:
            raise ValueError(f"image of {v.name} lives on a different table")
        p = parity_of(img)
        if img and (p is Parity.MIXED or (p is Parity.ODD) != v.odd):
            raise ValueError(f"image of {v.name} has parity {p.name}, "
                             f"expected {'ODD' if v.odd else 'EVEN'}")
        resolved[v.name] = img
    power_cache = {}

    def power(name, e):
        key = (name, e)
        if key not in power_cache:
            power_cache[key] = resolved[name] ** e
        return power_cache[key]

    out = target.zero()
    for key, c in f.items():
        m = src.decode(key)
        term = target.const(c)
        for n, e in m.even:
            term = term * power(n, e)
        for n in m.odd:
            term = term * resolved[n]
        out = out + term
    return out


def vary(f: SuperPolynomial, deltas: Mapping[str, SuperPolynomial]) -> SuperPolynomial:
    """First-order change of ``f`` under ``v -> v + eps*deltas[v]``.

    ``eps`` is a formal commuting scalar and each replaced factor keeps its
    position in the canonical product.  Variations must preserve parity:
    a parity-changing substitution with a commuting parameter depends on
    the factor order and is rejected.
    """
    t = f.table
    for n, d in deltas.items():
        p = parity_of(d)
        if d and (p is Parity.MIXED or (p is Parity.ODD) != t.is_odd(n)):
            raise ValueError(f"variation of {n} changes parity")
    out = t.zero()
    for key, c in f.items():
        factors = _ordered_factors(t, key)
        for i, n in enumerate(factors):
            d = deltas.get(n)
            if d is None or not d:
                continue
            term = t.const(c)
            for j, m in enumerate(factors):
                term = term * (d if j == i else t.var(m))
            out = out + term
    return out
