"""Star products assembled from graphs and weights, and the checks around them.

The order-n coefficient of f * g sums, over labelled graphs with n internal
vertices of out-degree two and two boundary vertices, the weight times the
operator obtained by decorating every internal vertex with the Poisson
bivector, divided by n!. A labelled graph and its canonical representative
differ by the same sign in weight and operator, so the sum runs over
representatives counted with multiplicity.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import sympy

from .calculus import U_as_operator
from .graph_dgla import canonical_form, cobracket, d2_star
from .graphs import AdmissibleGraph, canonical_key, enumerate_graphs
from .polyalg import (
    Poly,
    PolyDiffOperator,
    PolyVectorField,
    evaluate,
    poly_ring,
    schouten,
    to_fraction,
)
from .weights import (
    TableEntry,
    Vanishes,
    WeightTable,
    boundary_faces,
    classify_boundary_face,
    face_sign,
)

__all__ = [
    "MissingWeight",
    "NonConstantAlpha",
    "NotPoisson",
    "FormalSeries",
    "PoissonStructure",
    "star_graphs",
    "star_operators",
    "star",
    "star_series",
    "moyal_oracle",
    "derive_exact_table",
    "assoc_residual",
    "propagated_errors",
    "cocycle_graphs",
    "cocycle_residual",
    "ck_convolution_residual",
]


class MissingWeight(KeyError):
    def __init__(self, keys: Iterable[str]):
        self.keys = sorted(set(keys))
        super().__init__("missing weights: " + ", ".join(self.keys))


class NonConstantAlpha(ValueError):
    pass


class NotPoisson(ValueError):
    pass


# ---------------------------------------------------------------- series

class FormalSeries:
    """c_0 + c_1 h + ... + c_N h^N with Poly (or operator) coefficients."""

    def __init__(self, order: int, coeffs: Sequence, zero=None):
        if order < 0:
            raise ValueError("truncation order must be >= 0")
        coeffs = list(coeffs)[:order + 1]
        if zero is None:
            if not coeffs:
                raise ValueError("pass zero= for an empty series")
            zero = coeffs[0] - coeffs[0]
        self.order = order
        self.zero = zero
        self.coeffs = coeffs + [zero] * (order + 1 - len(coeffs))

    def __getitem__(self, k: int):
        return self.coeffs[k]

    def _check(self, other: "FormalSeries"):
        if self.order != other.order:
            raise ValueError(f"truncation orders differ: {self.order} != {other.order}")

    def __add__(self, other: "FormalSeries") -> "FormalSeries":
        self._check(other)
        return FormalSeries(self.order, [a + b for a, b in zip(self.coeffs, other.coeffs)], self.zero)

    def __sub__(self, other: "FormalSeries") -> "FormalSeries":
        self._check(other)
        return FormalSeries(self.order, [a - b for a, b in zip(self.coeffs, other.coeffs)], self.zero)

    def __neg__(self):
        return FormalSeries(self.order, [-a for a in self.coeffs], self.zero)

    def __mul__(self, other):
        """Cauchy product for series, scaling otherwise."""
        if isinstance(other, FormalSeries):
            self._check(other)
            out = []
            for k in range(self.order + 1):
                acc = self.zero
                for i in range(k + 1):
                    acc = acc + self.coeffs[i] * other.coeffs[k - i]
                out.append(acc)
            return FormalSeries(self.order, out, self.zero)
        return FormalSeries(self.order, [a * other for a in self.coeffs], self.zero)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, FormalSeries):
            return NotImplemented
        return self.order == other.order and all(a == b for a, b in zip(self.coeffs, other.coeffs))

    def is_zero(self) -> bool:
        return all(not c for c in self.coeffs)

    def __repr__(self):
        return f"FormalSeries(order={self.order}, {self})"

    def __str__(self):
        parts = []
        for k, c in enumerate(self.coeffs):
            if c:
                parts.append(f"({c})" + ("" if k == 0 else f"*h^{k}"))
        return " + ".join(parts) or "0"


@dataclass(frozen=True)
class PoissonStructure:
    alpha: PolyVectorField
    check: bool = True

    def __post_init__(self):
        if self.alpha.k != 1:
            raise ValueError(f"a Poisson structure is a bivector, got degree {self.alpha.k}")
        if self.check and not schouten(self.alpha, self.alpha).is_zero():
            raise NotPoisson("[alpha, alpha] != 0")

    @property
    def d(self) -> int:
        return self.alpha.d

    def is_constant(self) -> bool:
        return all(all(not any(e) for e in c.keys()) for c in self.alpha.coeffs.values())

    def tensor(self) -> List[List[Fraction]]:
        """Full antisymmetric coefficient matrix of a constant structure."""
        if not self.is_constant():
            raise NonConstantAlpha("alpha has non-constant coefficients")
        A = [[Fraction(0)] * self.d for _ in range(self.d)]
        for (i, j), c in self.alpha.coeffs.items():
            v = to_fraction(c.coeff(1)) if c else Fraction(0)
            A[i][j], A[j][i] = v, -v
        return A

    def bracket(self, f: Poly, g: Poly) -> Poly:
        """{f,g} = alpha^{ij} d_i f d_j g."""
        out = Poly(self.d)
        for (i, j), c in self.alpha.coeffs.items():
            out = out + Poly(self.d, c) * (f.diff(i) * g.diff(j) - f.diff(j) * g.diff(i))
        return out


def _alpha(alpha) -> PoissonStructure:
    return alpha if isinstance(alpha, PoissonStructure) else PoissonStructure(alpha)


# ---------------------------------------------------------------- assembly

@lru_cache(maxsize=None)
def star_graphs(n: int) -> Tuple[Tuple[AdmissibleGraph, int], ...]:
    """(canonical representative, number of labelled graphs) at order n."""
    counts: Dict[AdmissibleGraph, int] = {}
    for g in enumerate_graphs(n, 2, [2] * n):
        sign, rep = canonical_form(g)
        if sign:
            counts[rep] = counts.get(rep, 0) + 1
    return tuple(sorted(counts.items(), key=lambda kv: canonical_key(kv[0])))


def _weight(table: WeightTable, g: AdmissibleGraph) -> Optional[Fraction]:
    exact = table.exact(g)
    if exact is not None:
        return exact
    try:
        value, _ = table.lookup(g)
    except KeyError:
        return None
    return Fraction(value)


def star_operators(alpha, N: int, table: WeightTable) -> List[PolyDiffOperator]:
    """The bidifferential operators P_0..P_N with f * g = sum h^n P_n(f, g)."""
    alpha = _alpha(alpha)
    d = alpha.d
    ops = []
    missing = []
    for n in range(N + 1):
        total = PolyDiffOperator(d, 2)
        for rep, count in star_graphs(n):
            B = U_as_operator(rep, [alpha.alpha] * n, d)
            if B.is_zero():
                continue
            w = _weight(table, rep)
            if w is None:
                missing.append(canonical_key(rep))
                continue
            if w:
                total = total + B.scale(w * count / math.factorial(n))
        ops.append(total)
    if missing:
        raise MissingWeight(missing)
    return ops


def _apply(ops: Sequence[PolyDiffOperator], F: FormalSeries, G: FormalSeries) -> FormalSeries:
    out = [F.zero] * (F.order + 1)
    for n, P in enumerate(ops):
        for a in range(F.order + 1 - n):
            for b in range(F.order + 1 - n - a):
                if F[a] and G[b]:
                    out[n + a + b] = out[n + a + b] + evaluate(P, [F[a], G[b]])
    return FormalSeries(F.order, out, F.zero)


def _series(f, N: int) -> FormalSeries:
    if isinstance(f, FormalSeries):
        return f
    return FormalSeries(N, [f], Poly(f.d))


def star_series(F, G, alpha, N: int, table: WeightTable) -> FormalSeries:
    """Bilinear extension of the star product to truncated series."""
    ops = star_operators(alpha, N, table)
    return _apply(ops, _series(F, N), _series(G, N))


def star(f: Poly, g: Poly, alpha, N: int, table: WeightTable) -> FormalSeries:
    return star_series(f, g, alpha, N, table)


def moyal_oracle(f: Poly, g: Poly, alpha, N: int) -> FormalSeries:
    """(1/n!) A^{i1 j1}..A^{in jn} (d_{i1..in} f)(d_{j1..jn} g), straight from the definition."""
    alpha = _alpha(alpha)
    A = alpha.tensor()
    d = alpha.d
    state: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], Fraction] = {((0,) * d, (0,) * d): Fraction(1)}
    out = []
    for n in range(N + 1):
        acc = Poly(d)
        for (a, b), c in state.items():
            acc = acc + f.diff_multi(a) * g.diff_multi(b) * c
        out.append(acc * Fraction(1, math.factorial(n)))
        nxt: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], Fraction] = {}
        for (a, b), c in state.items():
            for i in range(d):
                for j in range(d):
                    if A[i][j]:
                        a2 = a[:i] + (a[i] + 1,) + a[i + 1:]
                        b2 = b[:j] + (b[j] + 1,) + b[j + 1:]
                        nxt[(a2, b2)] = nxt.get((a2, b2), Fraction(0)) + c * A[i][j]
        state = nxt
    return FormalSeries(N, out, Poly(d))


def _random_poly(rng: random.Random, d: int, degree: int) -> Poly:
    terms = {}
    for exp in itertools.product(range(degree + 1), repeat=d):
        if sum(exp) <= degree:
            terms[exp] = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
    return Poly.from_terms(d, terms)


def derive_exact_table(N: int = 2, d: int = 2, seed: int = 0) -> WeightTable:
    """Exact weights forcing star = Moyal for constant structures through order N.

    Unknowns are the representatives whose operator is nonzero for constant
    coefficients; each order gives linear equations from the coefficients of
    random test polynomials. Only uniquely determined weights are stored; an
    inconsistent system raises ValueError.
    """
    rng = random.Random(seed)
    table = WeightTable()
    for n in range(N + 1):
        unknowns = []
        eqs = []
        for trial in range(3):
            A = {(i, j): Fraction(rng.randint(1, 7), rng.randint(1, 3))
                 for i in range(d) for j in range(i + 1, d)}
            alpha = PoissonStructure(PolyVectorField(d, 1, A))
            f, g = _random_poly(rng, d, n + 1), _random_poly(rng, d, n + 1)
            target = moyal_oracle(f, g, alpha, n)[n]
            cols = []
            for rep, count in star_graphs(n):
                B = U_as_operator(rep, [alpha.alpha] * n, d)
                if B.is_zero():
                    continue
                if rep not in unknowns:
                    unknowns.append(rep)
                cols.append((rep, evaluate(B, [f, g]) * Fraction(count, math.factorial(n))))
            monos = set(target.terms())
            for _, v in cols:
                monos |= set(v.terms())
            for mono in sorted(monos):
                row = {rep: v.terms().get(mono, Fraction(0)) for rep, v in cols}
                eqs.append((row, target.terms().get(mono, Fraction(0))))
        if not unknowns:
            continue
        M = sympy.Matrix([[sympy.Rational(row.get(u, 0)) for u in unknowns] for row, _ in eqs])
        b = sympy.Matrix([sympy.Rational(rhs) for _, rhs in eqs])
        try:
            sol, params = M.gauss_jordan_solve(b)
        except ValueError:
            raise ValueError(f"no weights reproduce the constant-coefficient product at order {n}") from None
        for u, val in zip(unknowns, sol):
            if not val.free_symbols:
                table.set_exact(u, Fraction(int(val.p), int(val.q)))
    return table


# ---------------------------------------------------------------- error propagation

def _mc_keys(table: WeightTable) -> List[str]:
    return sorted(k for k, e in table.entries.items() if e.exact is None and e.stderr > 0)


def propagated_errors(fn: Callable[[WeightTable], FormalSeries], table: WeightTable,
                      keys: Optional[Sequence[str]] = None) -> List[Dict[Tuple[int, ...], float]]:
    """First-order standard error of every monomial coefficient of fn(table).

    fn must be at most quadratic in the weights, so central differences
    with unit steps give the exact partial derivatives.
    """
    keys = _mc_keys(table) if keys is None else keys
    base = fn(table)
    var: List[Dict[Tuple[int, ...], float]] = [dict() for _ in range(base.order + 1)]
    for key in keys:
        entry = table.entries[key]
        shifted = []
        for step in (1, -1):
            t = table.copy()
            t.entries[key] = TableEntry(float(Fraction(entry.estimate) + step), entry.stderr,
                                        entry.samples, entry.seed)
            shifted.append(fn(t))
        for k in range(base.order + 1):
            diff = (shifted[0][k] - shifted[1][k]).terms()
            for mono, c in diff.items():
                var[k][mono] = var[k].get(mono, 0.0) + (float(c) / 2 * entry.stderr) ** 2
    return [{m: math.sqrt(v) for m, v in level.items()} for level in var]


def assoc_residual(f: Poly, g: Poly, h: Poly, alpha, N: int, table: WeightTable) -> FormalSeries:
    """(f*g)*h - f*(g*h) truncated at order N."""
    ops = star_operators(alpha, N, table)
    F, G, H = (_series(x, N) for x in (f, g, h))
    return _apply(ops, _apply(ops, F, G), H) - _apply(ops, F, _apply(ops, G, H))


# ---------------------------------------------------------------- cocycle

def _fraction_weight(table: WeightTable, g: AdmissibleGraph, missing: List[str]) -> Tuple[Fraction, float]:
    if g.total_degree != 1:
        return Fraction(0), 0.0
    sign, rep = canonical_form(g)
    if not sign:
        return Fraction(0), 0.0
    exact = table.exact(rep)
    if exact is not None:
        return sign * exact, 0.0
    try:
        value, err = table.lookup(rep)
    except KeyError:
        missing.append(canonical_key(rep))
        return Fraction(0), 0.0
    return sign * Fraction(value), err


class _Linearized:
    """A value plus its first-order sensitivity to each Monte Carlo table entry."""

    def __init__(self):
        self.value = Fraction(0)
        self.grad: Dict[str, float] = {}
        self.err: Dict[str, float] = {}

    def add_product(self, c, factors):
        """Add c * prod(w); each factor is (signed weight, stderr, key, sign)."""
        prod = Fraction(c)
        for w, _, _, _ in factors:
            prod *= w
        self.value += prod
        for k, (_, e, key, sign) in enumerate(factors):
            if not e:
                continue
            rest = Fraction(c) * sign
            for j, (w2, _, _, _) in enumerate(factors):
                if j != k:
                    rest *= w2
            self.grad[key] = self.grad.get(key, 0.0) + float(rest)
            self.err[key] = e

    def result(self) -> Tuple[Fraction, float]:
        return self.value, math.sqrt(sum((self.grad[k] * self.err[k]) ** 2 for k in self.grad))


def _factor(table: WeightTable, g: AdmissibleGraph, missing: List[str]):
    w, e = _fraction_weight(table, g, missing)
    sign, rep = canonical_form(g)
    return w, e, canonical_key(rep), sign


def cocycle_graphs(phi: AdmissibleGraph, faces: bool = True) -> List[AdmissibleGraph]:
    """Degree-1 graphs whose weights the residuals of phi read.

    With ``faces`` the factors of every contributing face are included,
    which the face-by-face form needs even where the algebraic terms cancel.
    """
    out = set()
    for h in d2_star(phi).graphs():
        out.add(h)
    for a, b in cobracket(phi):
        out.update((a, b))
    if faces:
        for face in boundary_faces(phi):
            if isinstance(classify_boundary_face(phi, face), Vanishes):
                continue
            _, inner, outer = face_sign(phi, face)
            out.add(canonical_form(outer)[1])
            if face.kind != "internal":
                out.add(canonical_form(inner)[1])
    return sorted((g for g in out if g.total_degree == 1), key=canonical_key)


def cocycle_residual(phi: AdmissibleGraph, table: WeightTable) -> Tuple[Fraction, float]:
    """W(d2* phi) + 1/2 W(x)W(cobracket phi), with first-order propagated error."""
    sign, phi = canonical_form(phi)
    if phi.total_degree != 2:
        raise ValueError(f"{canonical_key(phi)} has total degree {phi.total_degree}, not 2")
    acc = _Linearized()
    missing: List[str] = []
    if sign:
        for h, c in d2_star(phi).items():
            if h.total_degree == 1:
                acc.add_product(c, [_factor(table, h, missing)])
        for (a, b), c in cobracket(phi).items():
            if a.total_degree == 1 and b.total_degree == 1:
                acc.add_product(Fraction(c, 2), [_factor(table, a, missing), _factor(table, b, missing)])
    if missing:
        raise MissingWeight(missing)
    return acc.result()


def ck_convolution_residual(phi: AdmissibleGraph, table: WeightTable) -> Tuple[Fraction, float]:
    """Sum over proper subgraphs of W(subgraph) W(quotient), face by face.

    Collapsed pairs of internal vertices carry the closed two-point weight
    (1 for a single edge, 0 otherwise); larger collisions, bad edges and
    factors of the wrong degree contribute 0.
    """
    sign, phi = canonical_form(phi)
    if phi.total_degree != 2:
        raise ValueError(f"{canonical_key(phi)} has total degree {phi.total_degree}, not 2")
    acc = _Linearized()
    missing: List[str] = []
    if sign:
        for face in boundary_faces(phi):
            if isinstance(classify_boundary_face(phi, face), Vanishes):
                continue
            c, inner, outer = face_sign(phi, face)
            if face.kind == "internal":
                acc.add_product(c, [_factor(table, outer, missing)])
            else:
                acc.add_product(c, [_factor(table, inner, missing), _factor(table, outer, missing)])
    if missing:
        raise MissingWeight(missing)
    return acc.result()
