"""The graphical calculus U: admissible graphs decorated by polyvector fields
become polydifferential operators, plus the Chevalley-Eilenberg side needed
to state the morphism property.

Vertex values follow the state-sum rule: an internal vertex with out-edges
coloured (c_1..c_k) and in-edges coloured J contributes
``k! * d_J xi^{c_1..c_k}`` (tensor components), which in stored coefficients
is ``sgn * d_J C_sorted``. A boundary vertex contributes ``d_J f``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Sequence, Tuple

from sympy.polys.rings import PolyElement

from . import graph_dgla as gd
from .graphs import AdmissibleGraph
from .polyalg import (
    DimensionMismatch,
    Poly,
    PolyDiffOperator,
    PolyVectorField,
    _diff_multi,
    evaluate,
    gerst_bracket,
    gerst_circ_i,
    hochschild_d,
    nr_bullet,
    poly_ring,
    schouten,
    sort_sign,
    to_qq,
)

__all__ = [
    "DecoratedGraph",
    "U_as_operator",
    "evaluate_U",
    "U_of_sum",
    "morphism_check_circ",
    "morphism_check_d1",
    "morphism_check_d2",
    "CEMap",
    "CEElement",
    "koszul_sign",
    "F0",
    "ce_bracket",
    "ce_d1",
    "ce_d2",
    "shifted_bracket",
    "ce_bracket_map",
    "ce_d1_map",
    "ce_d2_map",
]


@dataclass(frozen=True)
class DecoratedGraph:
    graph: AdmissibleGraph
    xis: Tuple[PolyVectorField, ...]
    fs: Tuple[Poly, ...]

    def __post_init__(self):
        if len(self.xis) != self.graph.n or len(self.fs) != self.graph.m:
            raise ValueError("decoration counts do not match vertex counts")

    def value(self) -> Poly:
        return evaluate_U(self.graph, self.xis, self.fs)


def _dimension(xis: Sequence[PolyVectorField], d: int | None) -> int:
    dims = {x.d for x in xis}
    if d is not None:
        dims.add(d)
    if len(dims) > 1:
        raise DimensionMismatch(f"mixed dimensions {sorted(dims)}")
    if not dims:
        raise DimensionMismatch("dimension cannot be inferred; pass d")
    return dims.pop()


def U_as_operator(g: AdmissibleGraph, xis: Sequence[PolyVectorField], d: int | None = None) -> PolyDiffOperator:
    """The operator U_g(xi_1 x ... x xi_n) of arity m.

    Zero unless every decoration has degree out-degree - 1.
    """
    if len(xis) != g.n:
        raise ValueError(f"graph has {g.n} internal vertices, got {len(xis)} decorations")
    d = _dimension(xis, d)
    R = poly_ring(d)
    if any(xi.k != g.nu(r + 1) for r, xi in enumerate(xis)):
        return PolyDiffOperator(d, g.m)

    edges = g.edges
    # in-edge positions per vertex
    into: Dict[int, List[int]] = {}
    for pos, (_, t) in enumerate(edges):
        into.setdefault(t, []).append(pos)
    # for each internal vertex, admissible colourings of its out-edges
    starts = []
    pos = 0
    choices = []
    for r, xi in enumerate(xis):
        k = g.outdeg(r + 1)
        starts.append(pos)
        opts = []
        for cols in itertools.permutations(range(d), k):
            sign, key = sort_sign(cols)
            c = xi.coeffs.get(key)
            if c is not None:
                opts.append((cols, sign, key))
        pos += k
        if not opts:
            return PolyDiffOperator(d, g.m)
        choices.append(opts)

    cache: Dict[Tuple[int, Tuple[int, ...], Tuple[int, ...]], PolyElement] = {}
    terms: Dict[Tuple[Tuple[int, ...], ...], PolyElement] = {}
    zero_multi = (0,) * d
    for combo in itertools.product(*choices):
        colour = []
        for cols, _, _ in combo:
            colour.extend(cols)
        coeff = R.one
        for r, (cols, sign, key) in enumerate(combo):
            alpha = [0] * d
            for e in into.get(r + 1, ()):
                alpha[colour[e]] += 1
            alpha = tuple(alpha)
            ck = (r, key, alpha)
            if ck not in cache:
                cache[ck] = _diff_multi(xis[r].coeffs[key], alpha)
            val = cache[ck]
            if not val:
                coeff = None
                break
            coeff = coeff * val if sign > 0 else -(coeff * val)
        if coeff is None:
            continue
        slots = []
        for j in range(1, g.m + 1):
            alpha = [0] * d
            for e in into.get(-j, ()):
                alpha[colour[e]] += 1
            slots.append(tuple(alpha))
        key = tuple(slots)
        terms[key] = terms.get(key, R.zero) + coeff
    return PolyDiffOperator(d, g.m, terms)


def evaluate_U(g: AdmissibleGraph, xis: Sequence[PolyVectorField], fs: Sequence[Poly], d: int | None = None) -> Poly:
    d = _dimension(xis, d if d is not None else (fs[0].d if fs else None))
    return evaluate(U_as_operator(g, xis, d), list(fs))


def U_of_sum(x: "gd.GraphSum", xis: Sequence[PolyVectorField], d: int | None = None,
             arity: int = 0) -> PolyDiffOperator:
    """Linear extension of U to a graph sum; graphs with the wrong vertex count are skipped."""
    d = _dimension(xis, d)
    total = None
    for g, c in x.items():
        if g.n != len(xis):
            continue
        op = U_as_operator(g, xis, d).scale(c)
        total = op if total is None else total + op
    if total is None:
        return PolyDiffOperator(d, arity)
    return total


def morphism_check_circ(g1: AdmissibleGraph, g2: AdmissibleGraph, i: int,
                        xis: Sequence[PolyVectorField], fs: Sequence[Poly], d: int | None = None) -> bool:
    """U_{g1}(xi') o_{i-1} U_{g2}(xi'') == U_{g1 o_i g2}(xi' x xi'')."""
    d = _dimension(xis, d if d is not None else (fs[0].d if fs else None))
    left = gerst_circ_i(U_as_operator(g1, xis[:g1.n], d), U_as_operator(g2, xis[g1.n:], d), i - 1)
    right = U_of_sum(gd.circ_i(g1, g2, i), xis, d, g1.m + g2.m - 1)
    return evaluate(left, list(fs)) == evaluate(right, list(fs))


def morphism_check_d1(g: AdmissibleGraph, xis: Sequence[PolyVectorField], fs: Sequence[Poly], d: int | None = None) -> bool:
    """d_Hoch U_g(xis) == U_{d1 g}(xis)."""
    d = _dimension(xis, d if d is not None else (fs[0].d if fs else None))
    left = hochschild_d(U_as_operator(g, xis, d))
    right = U_of_sum(gd.d1(gd.GraphSum.of(g), reduce=False), xis, d, g.m + 1)
    return evaluate(left, list(fs)) == evaluate(right, list(fs))


def morphism_check_d2(g: AdmissibleGraph, i: int, xis: Sequence[PolyVectorField], fs: Sequence[Poly], d: int | None = None) -> bool:
    """U_{d2_i g}(.., xi_i, xi_{i+1}, ..) == U_g(.., xi_i . xi_{i+1}, ..)."""
    d = _dimension(xis, d if d is not None else (fs[0].d if fs else None))
    xis = list(xis)
    left = U_of_sum(gd.d2_i(g, i), xis, d, g.m)
    merged = xis[:i - 1] + [nr_bullet(xis[i - 1], xis[i])] + xis[i + 1:]
    right = U_as_operator(g, merged, d)
    return evaluate(left, list(fs)) == evaluate(right, list(fs))


# ---------------------------------------------------------------- CE side
#
# Multilinear maps on polyvector fields are taken graded-symmetric in the
# shifted degree k + 1 of T^k, which is the symmetry the edge-order sign gives
# the state sum. This is the wedge convention after the usual shift
# isomorphism, under which the Lie bracket of polyvectors becomes
# l2(a, b) = (-1)^{k_a} [a, b]_SN.

def koszul_sign(perm: Sequence[int], degrees: Sequence[int]) -> int:
    """Sign of reordering graded-symmetric factors of the given degrees so
    that item perm[k] lands in slot k."""
    sign = 1
    for a in range(len(perm)):
        for b in range(a + 1, len(perm)):
            if perm[a] > perm[b] and degrees[perm[a]] % 2 and degrees[perm[b]] % 2:
                sign = -sign
    return sign


def _shifted(gammas: Sequence[PolyVectorField]) -> List[int]:
    return [g.k + 1 for g in gammas]


class CEMap:
    """A multilinear map from q polyvector fields to operators of fixed arity."""

    def __init__(self, fn: Callable[[Sequence[PolyVectorField]], PolyDiffOperator],
                 q: int, arity: int, d: int, degree: int):
        self._fn = fn
        self.q = q
        self.arity = arity
        self.d = d
        self.degree = degree

    def __call__(self, gammas: Sequence[PolyVectorField]) -> PolyDiffOperator:
        if len(gammas) != self.q:
            raise ValueError(f"expected {self.q} polyvector fields, got {len(gammas)}")
        return self._fn(gammas)


class CEElement(CEMap):
    """A graph sum read as the map sum_g c_g U_g, symmetrized over input orderings.

    Relabeled graphs and their canonical representatives give the same map.
    Graphs in the sum must share n, m and the parity of p + q.
    """

    def __init__(self, graphs: "gd.GraphSum", d: int, q: int | None = None, arity: int | None = None):
        self.graphs = graphs
        ns = {g.n for g, _ in graphs.items()}
        ms = {g.m for g, _ in graphs.items()}
        ds = {g.total_degree % 2 for g, _ in graphs.items()}
        if len(ns) > 1 or len(ms) > 1 or len(ds) > 1:
            raise ValueError("graph sum is not homogeneous in (n, m, parity)")
        super().__init__(self._evaluate,
                         ns.pop() if ns else (q or 0),
                         ms.pop() if ms else (arity or 0),
                         d, ds.pop() if ds else 0)

    def _evaluate(self, gammas: Sequence[PolyVectorField]) -> PolyDiffOperator:
        degs = _shifted(gammas)
        total = PolyDiffOperator(self.d, self.arity)
        for perm in itertools.permutations(range(len(gammas))):
            op = U_of_sum(self.graphs, [gammas[k] for k in perm], self.d, self.arity)
            total = total + (op if koszul_sign(perm, degs) > 0 else -op)
        return total


def F0(d: int) -> CEElement:
    """The element 1 -> mu."""
    return CEElement(gd.GraphSum.of(gd.b02()), d)


def _shuffles(n: int, k: int):
    for first in itertools.combinations(range(n), k):
        yield first + tuple(i for i in range(n) if i not in first)


def ce_bracket(F: CEMap, H: CEMap, gammas: Sequence[PolyVectorField]) -> PolyDiffOperator:
    """[F, H]_CE: Gerstenhaber bracket of the two evaluations averaged over
    all orderings of the inputs.

    Evaluations are already symmetric, so the average over all (q1+q2)!
    orderings with weight 1/(q1! q2!) is a plain sum over shuffles. H picks
    up the Koszul sign of moving past the inputs of F.
    """
    q1, q2 = F.q, H.q
    if len(gammas) != q1 + q2:
        raise ValueError(f"expected {q1 + q2} polyvector fields, got {len(gammas)}")
    degs = _shifted(gammas)
    total = PolyDiffOperator(F.d, F.arity + H.arity - 1)
    for perm in _shuffles(len(gammas), q1):
        sign = koszul_sign(perm, degs)
        if H.degree % 2 and sum(degs[k] for k in perm[:q1]) % 2:
            sign = -sign
        term = gerst_bracket(F([gammas[k] for k in perm[:q1]]), H([gammas[k] for k in perm[q1:]]))
        total = total + (term if sign > 0 else -term)
    return total


def ce_d1(F: CEMap, gammas: Sequence[PolyVectorField]) -> PolyDiffOperator:
    """Horizontal differential [F0, F]_CE, i.e. d_Hoch after evaluation."""
    return hochschild_d(F(gammas))


def shifted_bracket(a: PolyVectorField, b: PolyVectorField) -> PolyVectorField:
    """(-1)^{k_a} [a, b]_SN, graded-symmetric in the shifted degrees."""
    br = schouten(a, b)
    return br.scale(-1) if a.k % 2 else br


def ce_d2(F: CEMap, gammas: Sequence[PolyVectorField]) -> PolyDiffOperator:
    """Vertical differential: sum over pairs i < j of F(l2(g_i, g_j), rest).

    Acts on inputs only, so it commutes with ce_d1.
    """
    if len(gammas) != F.q + 1:
        raise ValueError(f"expected {F.q + 1} polyvector fields, got {len(gammas)}")
    degs = _shifted(gammas)
    total = PolyDiffOperator(F.d, F.arity)
    for i, j in itertools.combinations(range(len(gammas)), 2):
        if gammas[i].k + gammas[j].k < -1:
            continue  # two functions
        perm = (i, j) + tuple(k for k in range(len(gammas)) if k not in (i, j))
        op = F([shifted_bracket(gammas[i], gammas[j])] + [gammas[k] for k in perm[2:]])
        total = total + (op if koszul_sign(perm, degs) > 0 else -op)
    return total


def ce_bracket_map(F: CEMap, H: CEMap) -> CEMap:
    return CEMap(lambda gs: ce_bracket(F, H, gs), F.q + H.q, F.arity + H.arity - 1, F.d,
                 F.degree + H.degree)


def ce_d1_map(F: CEMap) -> CEMap:
    return CEMap(lambda gs: ce_d1(F, gs), F.q, F.arity + 1, F.d, F.degree + 1)


def ce_d2_map(F: CEMap) -> CEMap:
    return CEMap(lambda gs: ce_d2(F, gs), F.q + 1, F.arity, F.d, F.degree + 1)
