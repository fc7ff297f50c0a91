"""Independent hand-expanded oracles.

Everything here works on plain sympy expressions and full antisymmetric
tensor components, so it shares no code path with the package beyond the
constructors used to hand inputs over.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import sympy as sp

from graphquant.polyalg import Poly, PolyVectorField, poly_ring


def xs(d):
    return tuple(sp.symbols(f"x1:{d + 1}"))


def D(expr, d, i):
    return sp.diff(expr, xs(d)[i])


def poly(expr, d) -> Poly:
    return Poly(d, poly_ring(d).from_expr(sp.sympify(expr)))


def expr(p) -> sp.Expr:
    """sympy expression of a Poly (or a raw ring element)."""
    el = p.p if isinstance(p, Poly) else p
    return sp.expand(el.as_expr())


def perm_sign(idx):
    s = 1
    idx = list(idx)
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            if idx[a] == idx[b]:
                return 0
            if idx[a] > idx[b]:
                s = -s
    return s


class Tensor:
    """Full antisymmetric components T^{i_0..i_k} built from independent
    sorted components; the polyvector is sum over all ordered indices."""

    def __init__(self, d, k, sorted_components):
        self.d, self.k = d, k
        self.sorted = {tuple(i): sp.sympify(c) for i, c in sorted_components.items()}

    def __getitem__(self, idx):
        s = perm_sign(idx)
        if s == 0:
            return sp.Integer(0)
        return s * self.sorted.get(tuple(sorted(idx)), sp.Integer(0))

    def field(self) -> PolyVectorField:
        # sum over all orderings of T^{I} d_I collapses to (k+1)! T^{sorted}
        R = poly_ring(self.d)
        f = math.factorial(self.k + 1)
        return PolyVectorField(self.d, self.k, {i: R.from_expr(f * c) for i, c in self.sorted.items()})


def field_from_wedge_sum(d, k, terms) -> PolyVectorField:
    """terms: iterable of (ordered index tuple, expr) meaning sum expr * d_I."""
    acc = {}
    for idx, c in terms:
        s = perm_sign(idx)
        if s:
            key = tuple(sorted(idx))
            acc[key] = acc.get(key, 0) + s * c
    R = poly_ring(d)
    return PolyVectorField(d, k, {i: R.from_expr(sp.expand(c)) for i, c in acc.items() if sp.expand(c) != 0})


def rng_idx(d, r):
    return itertools.product(range(d), repeat=r)


def chained_wedges(x1: Tensor, x2: Tensor, f, g, h, d):
    """4 xi1^{i1 i2} (d_{i1} xi2^{i3 i4}) d_{i3} f d_{i4} g d_{i2} h."""
    total = 0
    for i1, i2, i3, i4 in rng_idx(d, 4):
        total += 4 * x1[i1, i2] * D(x2[i3, i4], d, i1) * D(f, d, i3) * D(g, d, i4) * D(h, d, i2)
    return sp.expand(total)


def circ_three_terms(x1: Tensor, x2: Tensor, f, g, h, d):
    """The three-term expansion of <U_b12(xi1) o_1 U_b12(xi2) | f g h>."""
    t1 = t2 = t3 = 0
    for i1, i2, i3, i4 in rng_idx(d, 4):
        a, b = x1[i1, i2], x2[i3, i4]
        if a == 0:
            continue
        t1 += 4 * a * D(b, d, i1) * D(f, d, i3) * D(g, d, i4) * D(h, d, i2)
        t2 += 4 * a * b * D(D(f, d, i1), d, i3) * D(g, d, i4) * D(h, d, i2)
        t3 += 4 * a * b * D(f, d, i3) * D(D(g, d, i1), d, i4) * D(h, d, i2)
    return sp.expand(t1), sp.expand(t2), sp.expand(t3)


def split_bivector_vector(x1: Tensor, x2: Tensor, f, g, d):
    """2 xi1^{i1 i2} (d_{i1} xi2^{i3}) [d_{i2} f d_{i3} g - d_{i3} f d_{i2} g]."""
    total = 0
    for i1, i2, i3 in rng_idx(d, 3):
        c = 2 * x1[i1, i2] * D(x2[(i3,)], d, i1)
        total += c * (D(f, d, i2) * D(g, d, i3) - D(f, d, i3) * D(g, d, i2))
    return sp.expand(total)


def split_trivector_function(x1: Tensor, h, f, g, d):
    """6 xi1^{i1 i2 i3} (d_{i1} h) d_{i2} f d_{i3} g."""
    total = 0
    for i1, i2, i3 in rng_idx(d, 3):
        total += 6 * x1[i1, i2, i3] * D(h, d, i1) * D(f, d, i2) * D(g, d, i3)
    return sp.expand(total)


def bullet_bivector_vector(a: Tensor, x: Tensor, d) -> PolyVectorField:
    """a.x = a^{i1i2}(d_{i1} x^{i3}) d_{i2}^d_{i3} - a^{i1i2}(d_{i2} x^{i3}) d_{i1}^d_{i3}."""
    terms = []
    for i1, i2, i3 in rng_idx(d, 3):
        terms.append(((i2, i3), a[i1, i2] * D(x[(i3,)], d, i1)))
        terms.append(((i1, i3), -a[i1, i2] * D(x[(i3,)], d, i2)))
    return field_from_wedge_sum(d, 1, terms)


def bullet_vector_bivector(x: Tensor, a: Tensor, d) -> PolyVectorField:
    """x.a = x^{i1}(d_{i1} a^{i2i3}) d_{i2}^d_{i3}."""
    terms = [((i2, i3), x[(i1,)] * D(a[i2, i3], d, i1)) for i1, i2, i3 in rng_idx(d, 3)]
    return field_from_wedge_sum(d, 1, terms)


def bullet_trivector_function(eta: Tensor, h, d) -> PolyVectorField:
    """eta.h = 3 eta^{i1i2i3}(d_{i1} h) d_{i2}^d_{i3}."""
    terms = [((i2, i3), 3 * eta[i1, i2, i3] * D(h, d, i1)) for i1, i2, i3 in rng_idx(d, 3)]
    return field_from_wedge_sum(d, 1, terms)


def poisson(C, f, g, d):
    """sum_{i,j} C^{ij} d_i f d_j g, with C^{ij} = -C^{ji} the stored coefficients."""
    total = 0
    for i, j in rng_idx(d, 2):
        if i < j:
            c = C.get((i, j), 0)
        elif j < i:
            c = -C.get((j, i), 0)
        else:
            c = 0
        total += c * D(f, d, i) * D(g, d, j)
    return sp.expand(total)


def moyal_by_hand(f, g, c, N):
    """Constant bivector c d1^d2 on R^2: sum_n h^n/n! c^n sum_k C(n,k)(-1)^k
    (d1^{n-k} d2^k f)(d2^{n-k} d1^k g), built from the binomial expansion of
    the bidifferential exponential."""
    x1, x2 = xs(2)
    out = []
    for n in range(N + 1):
        s = 0
        for k in range(n + 1):
            df = sp.diff(f, x1, n - k, x2, k) if n else f
            dg = sp.diff(g, x2, n - k, x1, k) if n else g
            s += sp.binomial(n, k) * (-1) ** k * df * dg
        out.append(sp.expand(sp.Rational(1, math.factorial(n)) * c ** n * s))
    return out


# Frozen oracle values, computed by hand or by the functions above and
# pasted here so later refactors cannot drift silently.
FROZEN = {
    # x1^2 * x2^2 with c = 1, coefficients of h^0..h^2
    "moyal_x1sq_x2sq": ["x1**2*x2**2", "4*x1*x2", "2"],
    # number of admissible graphs by (n, m, out-degree profile)
    "enumerate_1_2_[2]": 2,
    "enumerate_2_2_[2,2]": 36,
    # wedge-type weights with exact values
    "W_b02": Fraction(1),
    "W_b12": Fraction(1, 2),
    "W_b13": Fraction(1, 6),
    "W_b11": Fraction(-1),
    # second-order constant-coefficient weights solved from Moyal
    "W_wedge_pair": Fraction(1, 4),
    # the unsigned Leibniz form fails on this many of 144 pool pairs
    "unsigned_leibniz_failures": 48,
}
