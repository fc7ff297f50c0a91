"""Graph sums and the differential graded Lie algebra structure on admissible graphs.

Elementary insertions (``circ_i``, ``bullet_i``, ``d2_i``) act on labelled
graphs and carry exactly the sign of the corresponding operator identity, so
U intertwines them term by term. The composite operations (``circ``,
``bracket``, ``d1``, ``d2``) add the alternating signs and then reduce the
result modulo relabelling of internal vertices and reordering of out-edges.
In that quotient a graph is identified with its relabelled copies up to
the sign of the induced permutation of the total edge order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

from .graphs import (
    AdmissibleGraph,
    SubgraphSelector,
    boundary_only,
    canonical_key,
    normal_subgraphs,
    parse_key,
    quotient,
    subgraph,
)
from .polyalg import IndexOutOfRange, sort_sign

__all__ = [
    "GraphSum",
    "Conventions",
    "conventions",
    "canonical_form",
    "b02",
    "edge_graph",
    "circ_i",
    "circ",
    "bullet_i",
    "bullet",
    "bracket",
    "d1",
    "d2_i",
    "d2",
    "d_total",
    "d2_star",
    "cobracket",
    "pairing",
    "pair_pairing",
]


class GraphSum:
    """Finite rational combination of admissible graphs."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[AdmissibleGraph, object]] = None):
        acc: Dict[AdmissibleGraph, Fraction] = {}
        for g, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                acc[g] = acc.get(g, Fraction(0)) + c
        self.terms = {g: c for g, c in acc.items() if c}

    @classmethod
    def of(cls, g: AdmissibleGraph, c=1) -> "GraphSum":
        return cls({g: c})

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[AdmissibleGraph, object]]) -> "GraphSum":
        acc: Dict[AdmissibleGraph, Fraction] = {}
        for g, c in pairs:
            acc[g] = acc.get(g, Fraction(0)) + Fraction(c)
        return cls(acc)

    def items(self):
        return self.terms.items()

    def graphs(self):
        return self.terms.keys()

    def coefficient(self, g: AdmissibleGraph) -> Fraction:
        return self.terms.get(g, Fraction(0))

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __add__(self, other: "GraphSum") -> "GraphSum":
        acc = dict(self.terms)
        for g, c in other.terms.items():
            acc[g] = acc.get(g, Fraction(0)) + c
        return GraphSum(acc)

    def __neg__(self):
        return GraphSum({g: -c for g, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "GraphSum":
        c = Fraction(c)
        return GraphSum({g: c * v for g, v in self.terms.items()})

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, GraphSum):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def reduce(self) -> "GraphSum":
        """Rewrite every term in its canonical representative."""
        acc: Dict[AdmissibleGraph, Fraction] = {}
        for g, c in self.terms.items():
            sign, h = canonical_form(g)
            if sign:
                acc[h] = acc.get(h, Fraction(0)) + sign * c
        return GraphSum(acc)

    def homogeneous(self, p: int, q: int) -> "GraphSum":
        return GraphSum({g: c for g, c in self.terms.items() if g.bidegree == (p, q)})

    def bidegrees(self):
        return {g.bidegree for g in self.terms}

    def to_text(self) -> str:
        lines = []
        for g in sorted(self.terms, key=canonical_key):
            c = self.terms[g]
            lines.append(f"{c} * {canonical_key(g)}")
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str) -> "GraphSum":
        acc = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            coeff, _, key = line.partition("*")
            acc.append((parse_key(key.strip()), Fraction(coeff.strip())))
        return cls.from_pairs(acc)

    def __repr__(self):
        return f"GraphSum({len(self.terms)} terms)"

    def __str__(self):
        return self.to_text() or "0"


def _as_sum(x) -> GraphSum:
    return x if isinstance(x, GraphSum) else GraphSum.of(x)


# ---------------------------------------------------------------- conventions

def _tdeg(g: AdmissibleGraph) -> int:
    return g.total_degree


@dataclass(frozen=True)
class Conventions:
    """Sign choices left open by the text; fixed by the identity suite.

    swap(ku, kv): sign for exchanging two adjacent internal vertices with
    out-degrees ku, kv (combined with the sort sign of out-edges).
    circ_eps(psi, phi): global factor of psi o phi.
    d2_eps(g, i): factor of the i-th vertex splitting inside d2.
    bullet_eps(psi, phi, i): factor of psi .(i) phi inside psi . phi.
    d2_twist(g): per-graph sign multiplying d2 (the plain vertex splitting
    commutes with d1; the twist makes them anticommute).
    dtotal_sign: d = d1 + dtotal_sign * d2.
    """
    swap: Callable[[int, int], int]
    circ_eps: Callable[[AdmissibleGraph, AdmissibleGraph], int]
    d2_eps: Callable[[AdmissibleGraph, int], int]
    bullet_eps: Callable[[AdmissibleGraph, AdmissibleGraph, int], int]
    d2_twist: Callable[[AdmissibleGraph], int] = lambda g: -1 if g.total_degree % 2 else 1
    dtotal_sign: int = 1


def _edges_before(g: AdmissibleGraph, i: int) -> int:
    return sum(len(g.out[r]) for r in range(i - 1))


def _edge_swap(ku: int, kv: int) -> int:
    return -1 if (ku * kv) % 2 else 1


def _default_circ_eps(psi: AdmissibleGraph, phi: AdmissibleGraph) -> int:
    return -1 if (psi.e * _tdeg(phi)) % 2 else 1


def _default_bullet_eps(psi: AdmissibleGraph, phi: AdmissibleGraph, i: int) -> int:
    return -1 if (_edges_before(psi, i) * phi.e) % 2 else 1


def _default_d2_eps(g: AdmissibleGraph, i: int) -> int:
    return -1 if _edges_before(g, i) % 2 else 1


_CONV = Conventions(
    swap=_edge_swap,
    circ_eps=_default_circ_eps,
    d2_eps=_default_d2_eps,
    bullet_eps=_default_bullet_eps,
)


def conventions() -> Conventions:
    return _CONV


def set_conventions(conv: Conventions) -> None:
    """Swap the sign conventions (used by the convention search tests)."""
    global _CONV
    _CONV = conv
    for f in (canonical_form, _circ_raw, _bullet_raw, _bracket_raw, _bracket_reduced, _d2_raw, _d2_reduced):
        f.cache_clear()


# ---------------------------------------------------------------- canonical form

def _target_order(t: int) -> Tuple[int, int]:
    return (0, t) if t > 0 else (1, -t)


def _vertex_classes(g: AdmissibleGraph) -> List[List[int]]:
    """Vertices grouped by an isomorphism-invariant colour, groups in colour order."""
    n = g.n
    preds: List[List[int]] = [[] for _ in range(n + 1)]
    for s, t in g.edges:
        if t > 0:
            preds[t].append(s)
    colour = {v: (len(g.out[v - 1]), len(preds[v]), tuple(sorted(-t for t in g.out[v - 1] if t < 0)))
              for v in range(1, n + 1)}
    for _ in range(2):
        colour = {
            v: (colour[v],
                tuple(sorted(colour[t] for t in g.out[v - 1] if t > 0)),
                tuple(sorted(colour[s] for s in preds[v])))
            for v in range(1, n + 1)
        }
    groups: Dict[object, List[int]] = {}
    for v in range(1, n + 1):
        groups.setdefault(colour[v], []).append(v)
    return [groups[c] for c in sorted(groups)]


def _candidate_orders(classes: List[List[int]]) -> Iterator[Tuple[int, ...]]:
    for parts in itertools.product(*(itertools.permutations(c) for c in classes)):
        yield tuple(v for part in parts for v in part)


@lru_cache(maxsize=None)
def canonical_form(g: AdmissibleGraph) -> Tuple[int, AdmissibleGraph]:
    """(sign, representative) of g modulo relabelling and out-edge reordering.

    Only relabellings compatible with an invariant vertex colouring are
    tried; automorphisms preserve the colouring, so none is missed. The sign
    is 0 when an odd symmetry identifies g with -g.
    """
    n = g.n
    if n == 0:
        return 1, g
    degs = g.profile()
    best = None
    best_signs = set()
    for perm in _candidate_orders(_vertex_classes(g)):
        # perm[new-1] = old vertex placed at position new
        sign = 1
        for a in range(n):
            for b in range(a + 1, n):
                if perm[a] > perm[b]:
                    sign *= _CONV.swap(degs[perm[a] - 1], degs[perm[b] - 1])
        newlabel = {old: new + 1 for new, old in enumerate(perm)}
        out = []
        cand = []
        for old in perm:
            ts = [newlabel[t] if t > 0 else t for t in g.out[old - 1]]
            keys = [_target_order(t) for t in ts]
            order = sorted(range(len(ts)), key=keys.__getitem__)
            s, _ = sort_sign(order)
            sign *= s
            out.append(tuple(ts[k] for k in order))
            cand.append(tuple(keys[k] for k in order))
        cand = tuple(cand)
        if best is None or cand < best[0]:
            best = (cand, tuple(out))
            best_signs = {sign}
        elif cand == best[0]:
            best_signs.add(sign)
    rep = AdmissibleGraph(n, g.m, best[1])
    if len(best_signs) > 1:
        return 0, rep
    return best_signs.pop(), rep


# ---------------------------------------------------------------- distinguished elements

def b02() -> AdmissibleGraph:
    return boundary_only(2)


def edge_graph() -> AdmissibleGraph:
    """The element e: two internal vertices joined by one edge, no boundary."""
    return AdmissibleGraph(2, 0, ((2,), ()))


# ---------------------------------------------------------------- insertions

def circ_i(psi: AdmissibleGraph, phi: AdmissibleGraph, i: int) -> GraphSum:
    """Insert phi into boundary vertex i of psi (1-based), every term with sign +.

    Labels: internal vertices of psi, then those of phi; boundary vertices of
    phi take the slots i..i+m(phi)-1. Each edge of psi ending at Bi lands on
    any vertex of phi independently.
    """
    if not 1 <= i <= psi.m:
        raise IndexOutOfRange(f"boundary index {i} outside 1..{psi.m}")
    shift = psi.n
    mphi = phi.m

    def psi_ref(t: int) -> int:
        if t > 0:
            return t
        j = -t
        return t if j < i else -(j + mphi - 1)

    phi_vertices = [v + shift for v in range(1, phi.n + 1)] + [-(i - 1 + b) for b in range(1, mphi + 1)]
    base = [[psi_ref(t) if t != -i else None for t in ts] for ts in psi.out]
    slots = [(r, k) for r, ts in enumerate(base) for k, t in enumerate(ts) if t is None]
    phi_out = [tuple(t + shift if t > 0 else -(i - 1 - t) for t in ts) for ts in phi.out]
    acc = []
    for choice in itertools.product(phi_vertices, repeat=len(slots)):
        out = [list(ts) for ts in base]
        for (r, k), tgt in zip(slots, choice):
            out[r][k] = tgt
        g = _maybe_graph(psi.n + phi.n, psi.m + mphi - 1, [tuple(ts) for ts in out] + phi_out)
        if g is not None:
            acc.append((g, 1))
    return GraphSum.from_pairs(acc)


def _maybe_graph(n: int, m: int, out) -> Optional[AdmissibleGraph]:
    for s, ts in enumerate(out, start=1):
        if len(set(ts)) != len(ts) or s in ts:
            return None
    return AdmissibleGraph(n, m, tuple(out))


def _shuffle_assignments(targets: Tuple[int, ...], k: int) -> Iterator[Tuple[int, List[List[int]]]]:
    """Distribute a sequence over k ordered blocks keeping relative order.

    Yields (sign of the block concatenation relative to the original, blocks).
    """
    for labels in itertools.product(range(k), repeat=len(targets)):
        blocks: List[List[int]] = [[] for _ in range(k)]
        order: List[int] = []
        for b in range(k):
            for pos, lab in enumerate(labels):
                if lab == b:
                    blocks[b].append(targets[pos])
                    order.append(pos)
        sign, _ = sort_sign(order)
        yield sign, blocks


def bullet_i(psi: AdmissibleGraph, phi: AdmissibleGraph, i: int) -> GraphSum:
    """Insert phi (no boundary vertices) into internal vertex i of psi.

    Phi's vertices take labels i..i+n(phi)-1. In-edges of i land on any vertex
    of phi; out-edges of i are shuffled over phi's vertices (sign of the
    shuffle), appended after phi's own out-edges.
    """
    if not 1 <= i <= psi.n:
        raise IndexOutOfRange(f"internal index {i} outside 1..{psi.n}")
    if phi.m != 0:
        raise ValueError("the internal insertion needs a graph without boundary vertices")
    k = phi.n
    if k == 0:
        return GraphSum()

    def ref(t: int) -> int:
        if t < 0 or t < i:
            return t
        return t + k - 1

    new_vertices = list(range(i, i + k))
    phi_out = [[t + i - 1 for t in ts] for ts in phi.out]
    own = psi.out[i - 1]
    own_targets = tuple(ref(t) for t in own)
    base = []
    for r, ts in enumerate(psi.out, start=1):
        if r == i:
            continue
        base.append((r, [None if t == i else ref(t) for t in ts]))
    slots = [(idx, kk) for idx, (_, ts) in enumerate(base) for kk, t in enumerate(ts) if t is None]
    acc = []
    for sign, blocks in _shuffle_assignments(own_targets, k):
        for choice in itertools.product(new_vertices, repeat=len(slots)):
            rows = [list(ts) for _, ts in base]
            for (idx, kk), tgt in zip(slots, choice):
                rows[idx][kk] = tgt
            out: List[Tuple[int, ...]] = []
            before = [tuple(row) for (r, _), row in zip(base, rows) if r < i]
            after = [tuple(row) for (r, _), row in zip(base, rows) if r > i]
            middle = [tuple(phi_out[b]) + tuple(blocks[b]) for b in range(k)]
            out = before + middle + after
            g = _maybe_graph(psi.n + k - 1, psi.m, out)
            if g is not None:
                acc.append((g, sign))
    return GraphSum.from_pairs(acc)


def d2_i(g: AdmissibleGraph, i: int) -> GraphSum:
    """Split internal vertex i by inserting the edge i -> i+1."""
    return bullet_i(g, edge_graph(), i)


# ---------------------------------------------------------------- composites

def _accumulate(parts: Iterable[Tuple[GraphSum, Fraction]]) -> GraphSum:
    acc: Dict[AdmissibleGraph, Fraction] = {}
    for x, c in parts:
        for g, v in x.items():
            acc[g] = acc.get(g, Fraction(0)) + c * v
    return GraphSum(acc)


@lru_cache(maxsize=None)
def _circ_raw(psi: AdmissibleGraph, phi: AdmissibleGraph) -> GraphSum:
    eps = _CONV.circ_eps(psi, phi)
    l = phi.m - 1
    return _accumulate(
        (circ_i(psi, phi, j), Fraction(eps * (-1 if ((j - 1) * l) % 2 else 1)))
        for j in range(1, psi.m + 1)
    )


def _bilinear(x, y, op) -> GraphSum:
    x, y = _as_sum(x), _as_sum(y)
    return _accumulate((op(g, h), a * b) for g, a in x.items() for h, b in y.items())


def circ(psi, phi, reduce: bool = True) -> GraphSum:
    out = _bilinear(psi, phi, _circ_raw)
    return out.reduce() if reduce else out


@lru_cache(maxsize=None)
def _bullet_raw(psi: AdmissibleGraph, phi: AdmissibleGraph) -> GraphSum:
    return _accumulate(
        (bullet_i(psi, phi, i), Fraction(_CONV.bullet_eps(psi, phi, i)))
        for i in range(1, psi.n + 1)
    )


def bullet(psi, phi, reduce: bool = True) -> GraphSum:
    out = _bilinear(psi, phi, _bullet_raw)
    return out.reduce() if reduce else out


@lru_cache(maxsize=None)
def _bracket_raw(x: AdmissibleGraph, y: AdmissibleGraph) -> GraphSum:
    sign = -1 if (_tdeg(x) * _tdeg(y)) % 2 else 1
    return _accumulate(((_circ_raw(x, y), Fraction(1)), (_circ_raw(y, x), Fraction(-sign))))


@lru_cache(maxsize=None)
def _bracket_reduced(x: AdmissibleGraph, y: AdmissibleGraph) -> GraphSum:
    return _bracket_raw(x, y).reduce()


def bracket(x, y, reduce: bool = True) -> GraphSum:
    """Graded commutator of circ, Koszul sign on total degree p+q."""
    if reduce:
        return _bilinear(x, y, _bracket_reduced)
    return _bilinear(x, y, _bracket_raw)


def d1(x, reduce: bool = True) -> GraphSum:
    return bracket(GraphSum.of(b02()), x, reduce=reduce)


@lru_cache(maxsize=None)
def _d2_raw(g: AdmissibleGraph) -> GraphSum:
    tw = _CONV.d2_twist(g)
    return _accumulate(
        (d2_i(g, i), Fraction(tw * _CONV.d2_eps(g, i))) for i in range(1, g.n + 1)
    )


@lru_cache(maxsize=None)
def _d2_reduced(g: AdmissibleGraph) -> GraphSum:
    return _d2_raw(g).reduce()


def d2(x, reduce: bool = True) -> GraphSum:
    x = _as_sum(x)
    op = _d2_reduced if reduce else _d2_raw
    return _accumulate((op(g), c) for g, c in x.items())


def d_total(x) -> GraphSum:
    return d1(x) + d2(x).scale(_CONV.dtotal_sign)


# ---------------------------------------------------------------- duals

def pairing(x, y) -> Fraction:
    """Canonical representatives form an orthonormal basis."""
    x, y = _as_sum(x).reduce(), _as_sum(y).reduce()
    if len(x) > len(y):
        x, y = y, x
    return sum((c * y.coefficient(g) for g, c in x.items()), Fraction(0))


def d2_star(phi) -> GraphSum:
    """Adjoint of d2: a combination of single internal-edge contractions."""
    phi = _as_sum(phi).reduce()
    acc = GraphSum()
    for g, c in phi.items():
        cands = set()
        for s, t in g.edges:
            if t <= 0:
                continue
            sel = SubgraphSelector(frozenset({s, t}))
            try:
                h = quotient(g, sel)
            except ValueError:
                continue
            sign, h = canonical_form(h)
            if sign:
                cands.add(h)
        for h in sorted(cands, key=canonical_key):
            coeff = d2(h).coefficient(g)
            if coeff:
                acc = acc + GraphSum.of(h, c * coeff)
    return acc


def _add_boundary(g: AdmissibleGraph, j: int) -> AdmissibleGraph:
    """g with a new isolated boundary vertex at position j."""
    shift = lambda t: t if t > 0 or -t < j else t - 1
    return AdmissibleGraph(g.n, g.m + 1, tuple(tuple(shift(t) for t in ts) for ts in g.out))


PairSum = Dict[Tuple[AdmissibleGraph, AdmissibleGraph], Fraction]


def cobracket(phi) -> PairSum:
    """Adjoint of the bracket: pairs (outer, inner) read off normal boundary subgraphs."""
    phi = _as_sum(phi).reduce()
    out: PairSum = {}
    for g, c in phi.items():
        cands = set()
        for sel in normal_subgraphs(g, "boundary", include_trivial=True):
            inner = subgraph(g, sel)
            outer = quotient(g, sel)
            si, inner = canonical_form(inner)
            so, outer = canonical_form(outer)
            if si and so:
                cands.add((outer, inner))
                cands.add((inner, outer))
        # the empty graph inserted at an isolated boundary vertex deletes it
        empty = AdmissibleGraph(0, 0, ())
        for j in range(1, g.m + 2):
            sw, wider = canonical_form(_add_boundary(g, j))
            if sw:
                cands.add((wider, empty))
                cands.add((empty, wider))
        for a, b in sorted(cands, key=lambda ab: (canonical_key(ab[0]), canonical_key(ab[1]))):
            coeff = bracket(a, b).coefficient(g)
            if coeff:
                out[(a, b)] = out.get((a, b), Fraction(0)) + c * coeff
    return {k: v for k, v in out.items() if v}


def pair_pairing(pairs: PairSum, a: AdmissibleGraph, b: AdmissibleGraph) -> Fraction:
    sa, a = canonical_form(a)
    sb, b = canonical_form(b)
    return sa * sb * pairs.get((a, b), Fraction(0))
