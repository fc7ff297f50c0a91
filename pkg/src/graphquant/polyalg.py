"""Exact algebra of polynomials, polyvector fields and polydifferential operators.

Polynomials live in sympy's sparse rings over QQ (gmpy2 backed when
available). Everything here is exact; there are no floats.

Index conventions: coordinates are 0-based internally and printed as
``x1..xd`` / ``d1..dd``. A polyvector field of degree ``k`` stores one
coefficient per strictly increasing index tuple of length ``k + 1``:

    xi = sum_{I increasing} C_I  d_{I0} ^ ... ^ d_{Ik}

The fully antisymmetric tensor components are ``sgn * C_sorted / (k+1)!``.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Iterator, Mapping, Sequence, Tuple

from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement, ring

__all__ = [
    "DimensionMismatch",
    "ArityMismatch",
    "IndexOutOfRange",
    "poly_ring",
    "Poly",
    "PolyVectorField",
    "PolyDiffOperator",
    "sort_sign",
    "nr_bullet",
    "nr_bullet_r",
    "schouten",
    "nr_bullet_right",
    "gerst_circ_i",
    "gerst_circ",
    "gerst_bracket",
    "hochschild_d",
    "hochschild_d_explicit",
    "cup",
    "evaluate",
]


class DimensionMismatch(ValueError):
    pass


class ArityMismatch(ValueError):
    pass


class IndexOutOfRange(IndexError):
    pass


@lru_cache(maxsize=None)
def poly_ring(d: int):
    """The ring QQ[x1..xd]; cached so equal dimensions share one ring."""
    if d < 1:
        raise DimensionMismatch(f"ambient dimension must be >= 1, got {d}")
    names = ",".join(f"x{i + 1}" for i in range(d))
    return ring(names, QQ)[0]


def to_qq(c) -> object:
    if isinstance(c, Fraction):
        return QQ(c.numerator, c.denominator)
    return QQ.convert(c)


def to_fraction(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


def sort_sign(idx: Sequence[int]) -> Tuple[int, Tuple[int, ...]]:
    """Sign of the sorting permutation and the sorted tuple; sign 0 on repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, tuple(sorted(idx))
    sign = 1
    # insertion sort, counting transpositions
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(idx)


def _diff_multi(p: PolyElement, alpha: Sequence[int]) -> PolyElement:
    gens = p.ring.gens
    for i, a in enumerate(alpha):
        for _ in range(a):
            if not p:
                return p
            p = p.diff(gens[i])
    return p


def _splits(alpha: Tuple[int, ...], r: int) -> Iterator[Tuple[int, Tuple[Tuple[int, ...], ...]]]:
    """Leibniz splittings of the multi-index alpha over r factors.

    Yields (multinomial coefficient, (beta_1, ..., beta_r)).
    """
    per_coord = []
    for a in alpha:
        opts = []
        for comp in _compositions(a, r):
            c = math.factorial(a)
            for b in comp:
                c //= math.factorial(b)
            opts.append((c, comp))
        per_coord.append(opts)
    for choice in itertools.product(*per_coord):
        coeff = 1
        for c, _ in choice:
            coeff *= c
        betas = tuple(tuple(comp[j] for _, comp in choice) for j in range(r))
        yield coeff, betas


@lru_cache(maxsize=None)
def _compositions(a: int, r: int) -> Tuple[Tuple[int, ...], ...]:
    if r == 1:
        return ((a,),)
    out = []
    for first in range(a + 1):
        for rest in _compositions(a - first, r - 1):
            out.append((first,) + rest)
    return tuple(out)


def _add_multi(a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


class Poly:
    """A polynomial with rational coefficients in d variables."""

    __slots__ = ("d", "p")

    def __init__(self, d: int, p=None):
        R = poly_ring(d)
        self.d = d
        if p is None:
            self.p = R.zero
        elif isinstance(p, PolyElement):
            if p.ring is not R:
                raise DimensionMismatch("polynomial belongs to a different ring")
            self.p = p
        elif isinstance(p, Poly):
            if p.d != d:
                raise DimensionMismatch(f"dimension {p.d} != {d}")
            self.p = p.p
        else:
            self.p = R(to_qq(p))

    @classmethod
    def from_terms(cls, d: int, terms: Mapping[Tuple[int, ...], object]) -> "Poly":
        R = poly_ring(d)
        clean = {}
        for exp, c in terms.items():
            if len(exp) != d:
                raise DimensionMismatch(f"exponent {exp} has length != {d}")
            c = to_qq(c)
            if c:
                clean[tuple(exp)] = clean.get(tuple(exp), QQ(0)) + c
        return cls(d, R.from_dict({k: v for k, v in clean.items() if v}))

    @classmethod
    def var(cls, i: int, d: int) -> "Poly":
        return cls(d, poly_ring(d).gens[i])

    @classmethod
    def const(cls, c, d: int) -> "Poly":
        return cls(d, c)

    def terms(self) -> Dict[Tuple[int, ...], Fraction]:
        return {k: to_fraction(v) for k, v in self.p.items()}

    def diff(self, i: int) -> "Poly":
        return Poly(self.d, self.p.diff(self.p.ring.gens[i]))

    def diff_multi(self, alpha: Sequence[int]) -> "Poly":
        return Poly(self.d, _diff_multi(self.p, alpha))

    def is_zero(self) -> bool:
        return not self.p

    def is_constant(self) -> bool:
        return all(not any(k) for k in self.p.keys())

    def total_degree(self) -> int:
        return max((sum(k) for k in self.p.keys()), default=-1)

    def _coerce(self, other) -> PolyElement:
        if isinstance(other, Poly):
            if other.d != self.d:
                raise DimensionMismatch(f"dimension {other.d} != {self.d}")
            return other.p
        return self.p.ring(to_qq(other))

    def __add__(self, other):
        return Poly(self.d, self.p + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Poly(self.d, self.p - self._coerce(other))

    def __rsub__(self, other):
        return Poly(self.d, self._coerce(other) - self.p)

    def __mul__(self, other):
        return Poly(self.d, self.p * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Poly(self.d, -self.p)

    def __pow__(self, k: int):
        return Poly(self.d, self.p ** k)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.d == other.d and self.p == other.p
        if isinstance(other, (int, Fraction)):
            return self.p == self.p.ring(to_qq(other))
        return NotImplemented

    def __hash__(self):
        return hash((self.d, frozenset(self.p.items())))

    def __bool__(self):
        return bool(self.p)

    def __repr__(self):
        return f"Poly({self.d}, {self})"

    def __str__(self):
        return format_poly(self.p)


def _format_rational(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _format_monomial(exp: Tuple[int, ...]) -> str:
    parts = []
    for i, a in enumerate(exp):
        if a == 1:
            parts.append(f"x{i + 1}")
        elif a > 1:
            parts.append(f"x{i + 1}^{a}")
    return "*".join(parts)


def format_poly(p: PolyElement) -> str:
    """Print in the package grammar, terms in descending lex order."""
    if not p:
        return "0"
    out = []
    for exp in sorted(p.keys(), reverse=True):
        c = to_fraction(p[exp])
        mono = _format_monomial(exp)
        neg = c < 0
        a = -c if neg else c
        if mono and a == 1:
            body = mono
        elif mono:
            body = f"{_format_rational(a)}*{mono}"
        else:
            body = _format_rational(a)
        if not out:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


class PolyVectorField:
    """A homogeneous polyvector field of degree k (k = -1 for functions)."""

    __slots__ = ("d", "k", "coeffs")

    def __init__(self, d: int, k: int, coeffs: Mapping[Tuple[int, ...], object] | None = None):
        if k < -1 or k + 1 > d:
            if k < -1:
                raise ValueError(f"degree must be >= -1, got {k}")
        self.d = d
        self.k = k
        R = poly_ring(d)
        acc: Dict[Tuple[int, ...], PolyElement] = {}
        for idx, c in (coeffs or {}).items():
            idx = tuple(idx)
            if len(idx) != k + 1:
                raise ValueError(f"index {idx} does not match degree {k}")
            if any(not 0 <= i < d for i in idx):
                raise DimensionMismatch(f"index {idx} outside dimension {d}")
            sign, key = sort_sign(idx)
            if sign == 0:
                continue
            c = _as_element(c, d)
            acc[key] = acc.get(key, R.zero) + sign * c
        self.coeffs = {key: c for key, c in acc.items() if c}

    @classmethod
    def function(cls, f) -> "PolyVectorField":
        f = f if isinstance(f, Poly) else Poly(f.ring.ngens, f)
        return cls(f.d, -1, {(): f.p})

    @classmethod
    def zero(cls, d: int, k: int) -> "PolyVectorField":
        return cls(d, k)

    def as_poly(self) -> Poly:
        if self.k != -1:
            raise ValueError("only degree -1 polyvectors are functions")
        return Poly(self.d, self.coeffs.get((), poly_ring(self.d).zero))

    def component(self, idx: Sequence[int]) -> PolyElement:
        """sgn * C_sorted for an arbitrary index tuple (0 on repeats)."""
        sign, key = sort_sign(idx)
        if sign == 0:
            return poly_ring(self.d).zero
        c = self.coeffs.get(key)
        if c is None:
            return poly_ring(self.d).zero
        return c if sign > 0 else -c

    def tensor_component(self, idx: Sequence[int]) -> PolyElement:
        return self.component(idx) / math.factorial(self.k + 1)

    def partial(self, a: int) -> "PolyVectorField":
        g = poly_ring(self.d).gens[a]
        return PolyVectorField(self.d, self.k, {I: c.diff(g) for I, c in self.coeffs.items()})

    def wedge(self, other: "PolyVectorField") -> "PolyVectorField":
        _check_dim(self, other)
        out: Dict[Tuple[int, ...], PolyElement] = {}
        for I, a in self.coeffs.items():
            for J, b in other.coeffs.items():
                sign, key = sort_sign(I + J)
                if sign == 0:
                    continue
                out[key] = out.get(key, poly_ring(self.d).zero) + sign * a * b
        return PolyVectorField(self.d, self.k + other.k + 1, out)

    def is_zero(self) -> bool:
        return not self.coeffs

    def _same(self, other: "PolyVectorField"):
        _check_dim(self, other)
        if self.k != other.k and self.coeffs and other.coeffs:
            raise ValueError(f"degree mismatch {self.k} != {other.k}")

    def __add__(self, other: "PolyVectorField") -> "PolyVectorField":
        self._same(other)
        out = dict(self.coeffs)
        R = poly_ring(self.d)
        for I, c in other.coeffs.items():
            out[I] = out.get(I, R.zero) + c
        k = self.k if self.coeffs else other.k
        return PolyVectorField(self.d, k, out)

    def __neg__(self):
        return PolyVectorField(self.d, self.k, {I: -c for I, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "PolyVectorField":
        c = _as_element(c, self.d)
        return PolyVectorField(self.d, self.k, {I: c * v for I, v in self.coeffs.items()})

    __mul__ = scale
    __rmul__ = scale

    def __eq__(self, other):
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        if self.d != other.d:
            return False
        if not self.coeffs and not other.coeffs:
            return True
        return self.k == other.k and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.d, self.k, frozenset(self.coeffs.items())))

    def __repr__(self):
        return f"PolyVectorField(d={self.d}, k={self.k}, {self})"

    def __str__(self):
        return format_polyvector(self)


def format_polyvector(xi: PolyVectorField) -> str:
    if xi.k == -1:
        return format_poly(xi.coeffs.get((), poly_ring(xi.d).zero))
    if not xi.coeffs:
        return "0"
    parts = []
    for I in sorted(xi.coeffs):
        basis = "^".join(f"d{i + 1}" for i in I)
        parts.append(f"({format_poly(xi.coeffs[I])})*{basis}")
    return " + ".join(parts)


def _as_element(c, d: int) -> PolyElement:
    R = poly_ring(d)
    if isinstance(c, Poly):
        if c.d != d:
            raise DimensionMismatch(f"dimension {c.d} != {d}")
        return c.p
    if isinstance(c, PolyElement):
        if c.ring is not R:
            raise DimensionMismatch("coefficient belongs to a different ring")
        return c
    return R(to_qq(c))


def _check_dim(a, b):
    if a.d != b.d:
        raise DimensionMismatch(f"dimension {a.d} != {b.d}")


# Nijenhuis-Richardson pre-Lie product and Schouten bracket

def _nr_core(xi: PolyVectorField, eta: PolyVectorField) -> PolyVectorField:
    """sum_I C_I sum_p (-1)^p  d_{I without p} ^ (d_{I_p} eta)."""
    _check_dim(xi, eta)
    k, l, d = xi.k, eta.k, xi.d
    R = poly_ring(d)
    out: Dict[Tuple[int, ...], PolyElement] = {}
    partials = {}
    for I, c in xi.coeffs.items():
        for p, a in enumerate(I):
            if a not in partials:
                partials[a] = eta.partial(a)
            deta = partials[a]
            rest = I[:p] + I[p + 1:]
            for J, b in deta.coeffs.items():
                sign, key = sort_sign(rest + J)
                if sign == 0:
                    continue
                if p % 2:
                    sign = -sign
                out[key] = out.get(key, R.zero) + sign * c * b
    return PolyVectorField(d, k + l, out)


def nr_bullet_r(xi: PolyVectorField, eta: PolyVectorField, r: int) -> PolyVectorField:
    """Elementary product: differentiate eta along the r-th slot of xi (0 <= r <= k).

    Written with tensor components summed over all indices, the slot-r
    term equals (-1)^r / (k+1) times the slot-independent core sum.
    """
    if not 0 <= r <= xi.k:
        raise IndexOutOfRange(f"slot {r} outside 0..{xi.k}")
    core = _nr_core(xi, eta)
    return core.scale(Fraction((-1) ** r, xi.k + 1))


def nr_bullet(xi: PolyVectorField, eta: PolyVectorField) -> PolyVectorField:
    """Nijenhuis-Richardson product: alternating sum of the elementary products
    over all k+1 slots of xi. Functions act trivially on the left."""
    _check_dim(xi, eta)
    if xi.k < 0:
        return PolyVectorField(xi.d, xi.k + eta.k)
    return _nr_core(xi, eta)


def nr_bullet_right(xi: PolyVectorField, eta: PolyVectorField) -> PolyVectorField:
    """The same contraction counted from the last slot of xi: (-1)^k xi . eta.

    This is the graded pre-Lie product whose commutator is a Lie bracket;
    the left-slot version above does not satisfy Jacobi after
    antisymmetrization once k + l is odd.
    """
    out = nr_bullet(xi, eta)
    return out.scale(-1) if xi.k % 2 else out


def schouten(xi: PolyVectorField, eta: PolyVectorField) -> PolyVectorField:
    """Graded commutator of the right-slot product, [xi, eta] = xi .' eta - (-1)^{kl} eta .' xi."""
    if xi.k + eta.k < -1:
        raise ValueError("bracket of two functions has no polyvector degree")
    sign = -1 if (xi.k * eta.k) % 2 else 1
    return nr_bullet_right(xi, eta) - nr_bullet_right(eta, xi).scale(sign)


# Polydifferential operators

MultiIndex = Tuple[int, ...]


class PolyDiffOperator:
    """sum C^{I_0..I_k} (d_{I_0} f_0) ... (d_{I_k} f_k), I_j multi-indices.

    ``terms`` maps the tuple of multi-indices (one per argument) to the
    coefficient polynomial. Arity 0 operators are plain functions.
    """

    __slots__ = ("d", "arity", "terms")

    def __init__(self, d: int, arity: int, terms: Mapping[Tuple[MultiIndex, ...], object] | None = None):
        self.d = d
        self.arity = arity
        R = poly_ring(d)
        acc: Dict[Tuple[MultiIndex, ...], PolyElement] = {}
        for key, c in (terms or {}).items():
            key = tuple(tuple(a) for a in key)
            if len(key) != arity or any(len(a) != d for a in key):
                raise ArityMismatch(f"term {key} does not fit arity {arity}, dimension {d}")
            acc[key] = acc.get(key, R.zero) + _as_element(c, d)
        self.terms = {k: v for k, v in acc.items() if v}

    @property
    def degree(self) -> int:
        return self.arity - 1

    @classmethod
    def multiplication(cls, d: int, arity: int = 2) -> "PolyDiffOperator":
        z = (0,) * d
        return cls(d, arity, {(z,) * arity: 1})

    @classmethod
    def identity(cls, d: int) -> "PolyDiffOperator":
        return cls.multiplication(d, 1)

    @classmethod
    def function(cls, f: Poly) -> "PolyDiffOperator":
        return cls(f.d, 0, {(): f.p})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "PolyDiffOperator") -> "PolyDiffOperator":
        _check_dim(self, other)
        if self.arity != other.arity:
            if not self.terms:
                return other
            if not other.terms:
                return self
            raise ArityMismatch(f"arity {self.arity} != {other.arity}")
        out = dict(self.terms)
        R = poly_ring(self.d)
        for k, c in other.terms.items():
            out[k] = out.get(k, R.zero) + c
        return PolyDiffOperator(self.d, self.arity, out)

    def __neg__(self):
        return PolyDiffOperator(self.d, self.arity, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "PolyDiffOperator":
        c = _as_element(c, self.d)
        return PolyDiffOperator(self.d, self.arity, {k: c * v for k, v in self.terms.items()})

    __mul__ = scale
    __rmul__ = scale

    def __eq__(self, other):
        if not isinstance(other, PolyDiffOperator):
            return NotImplemented
        if self.d != other.d:
            return False
        if not self.terms and not other.terms:
            return True
        return self.arity == other.arity and self.terms == other.terms

    def __hash__(self):
        return hash((self.d, self.arity, frozenset(self.terms.items())))

    def __repr__(self):
        return f"PolyDiffOperator(d={self.d}, arity={self.arity}, terms={len(self.terms)})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for key in sorted(self.terms):
            slots = []
            for a in key:
                ds = "".join(f"d{i + 1}" * e for i, e in enumerate(a))
                slots.append(ds or "1")
            parts.append(f"({format_poly(self.terms[key])})*[{' x '.join(slots)}]")
        return " + ".join(parts)

    def __call__(self, *fs: Poly) -> Poly:
        return evaluate(self, list(fs))


def evaluate(op: PolyDiffOperator, fs: Sequence[Poly]) -> Poly:
    if len(fs) != op.arity:
        raise ArityMismatch(f"operator of arity {op.arity} applied to {len(fs)} arguments")
    R = poly_ring(op.d)
    for f in fs:
        if f.d != op.d:
            raise DimensionMismatch(f"dimension {f.d} != {op.d}")
    cache: Dict[Tuple[int, MultiIndex], PolyElement] = {}
    total = R.zero
    for key, c in op.terms.items():
        term = c
        for j, a in enumerate(key):
            if (j, a) not in cache:
                cache[(j, a)] = _diff_multi(fs[j].p, a)
            term = term * cache[(j, a)]
            if not term:
                break
        total += term
    return Poly(op.d, total)


def gerst_circ_i(phi: PolyDiffOperator, psi: PolyDiffOperator, i: int) -> PolyDiffOperator:
    """Substitute psi into argument i (0-based) of phi."""
    _check_dim(phi, psi)
    if not 0 <= i < phi.arity:
        raise IndexOutOfRange(f"slot {i} outside 0..{phi.arity - 1}")
    d = phi.d
    R = poly_ring(d)
    out: Dict[Tuple[MultiIndex, ...], PolyElement] = {}
    nargs = psi.arity
    for fkey, fc in phi.terms.items():
        alpha = fkey[i]
        for pkey, pc in psi.terms.items():
            for coeff, betas in _splits(alpha, nargs + 1):
                dc = _diff_multi(pc, betas[0])
                if not dc:
                    continue
                mid = tuple(_add_multi(pkey[j], betas[j + 1]) for j in range(nargs))
                key = fkey[:i] + mid + fkey[i + 1:]
                out[key] = out.get(key, R.zero) + coeff * fc * dc
    return PolyDiffOperator(d, phi.arity + psi.arity - 1, out)


def gerst_circ(phi: PolyDiffOperator, psi: PolyDiffOperator) -> PolyDiffOperator:
    """phi o psi = sum_i (-1)^(i*l) phi o_i psi, l = deg psi."""
    l = psi.degree
    out = PolyDiffOperator(phi.d, phi.arity + psi.arity - 1)
    for i in range(phi.arity):
        term = gerst_circ_i(phi, psi, i)
        out = out + (term if (i * l) % 2 == 0 else -term)
    return out


def gerst_bracket(phi: PolyDiffOperator, psi: PolyDiffOperator) -> PolyDiffOperator:
    k, l = phi.degree, psi.degree
    a = gerst_circ(phi, psi)
    b = gerst_circ(psi, phi)
    return a - b if (k * l) % 2 == 0 else a + b


def hochschild_d(phi: PolyDiffOperator) -> PolyDiffOperator:
    """d_Hoch = [mu, .]_G."""
    return gerst_bracket(PolyDiffOperator.multiplication(phi.d), phi)


def hochschild_d_explicit(phi: PolyDiffOperator) -> PolyDiffOperator:
    """The textbook coboundary, built without the bracket.

    f0 phi(f1..) - sum_i (-1)^i phi(.. f_i f_{i+1} ..) + (-1)^k phi(..) f_{k+1},
    multiplied by (-1)^k so that it matches [mu, phi]_G.
    """
    d, k = phi.d, phi.degree
    z = (0,) * d
    R = poly_ring(d)
    out: Dict[Tuple[MultiIndex, ...], PolyElement] = {}

    def add(key, c):
        out[key] = out.get(key, R.zero) + c

    for key, c in phi.terms.items():
        add((z,) + key, c)
        for i in range(k + 1):
            for coeff, (b1, b2) in _splits(key[i], 2):
                add(key[:i] + (b1, b2) + key[i + 1:], (-1) ** (i + 1) * coeff * c)
        add(key + (z,), c if k % 2 == 0 else -c)
    res = PolyDiffOperator(d, phi.arity + 1, out)
    return res if k % 2 == 0 else -res


def cup(a: PolyDiffOperator, b: PolyDiffOperator) -> PolyDiffOperator:
    """(a u b)(f_0..f_{k+l+1}) = a(f_0..f_k) * b(f_{k+1}..)."""
    _check_dim(a, b)
    out = {}
    R = poly_ring(a.d)
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            key = ka + kb
            out[key] = out.get(key, R.zero) + ca * cb
    return PolyDiffOperator(a.d, a.arity + b.arity, out)
