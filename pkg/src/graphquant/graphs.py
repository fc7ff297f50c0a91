"""Admissible graphs: validation, text keys, enumeration, subgraphs and quotients.

Vertex references are plain ints: ``k > 0`` is internal vertex k, ``-j`` is
boundary vertex Bj. Out-edges are stored per internal vertex in their local
order, so the total edge order is (source, local rank).
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

__all__ = [
    "GraphError",
    "LoopEdge",
    "MultipleEdge",
    "BoundarySource",
    "BadNumbering",
    "ParseError",
    "NotContractible",
    "NotAdmissibleQuotient",
    "AdmissibleGraph",
    "ClosedGraph",
    "SubgraphSelector",
    "validate",
    "parse_key",
    "canonical_key",
    "target_str",
    "enumerate_graphs",
    "subgraph",
    "quotient",
    "is_normal",
    "normal_subgraphs",
    "is_forest",
    "corolla",
    "boundary_only",
]


class GraphError(ValueError):
    pass


class LoopEdge(GraphError):
    pass


class MultipleEdge(GraphError):
    pass


class BoundarySource(GraphError):
    pass


class BadNumbering(GraphError):
    pass


class ParseError(GraphError):
    pass


class NotContractible(GraphError):
    pass


class NotAdmissibleQuotient(GraphError):
    pass


def target_str(t: int) -> str:
    return str(t) if t > 0 else f"B{-t}"


@dataclass(frozen=True)
class AdmissibleGraph:
    n: int
    m: int
    out: Tuple[Tuple[int, ...], ...]

    @property
    def edges(self) -> List[Tuple[int, int]]:
        return [(s + 1, t) for s, ts in enumerate(self.out) for t in ts]

    @property
    def e(self) -> int:
        return sum(len(ts) for ts in self.out)

    @property
    def v(self) -> int:
        return self.n + self.m

    @property
    def p(self) -> int:
        return self.v - self.e - 1

    @property
    def q(self) -> int:
        return self.n

    @property
    def bidegree(self) -> Tuple[int, int]:
        return self.p, self.q

    @property
    def total_degree(self) -> int:
        return self.p + self.q

    def outdeg(self, r: int) -> int:
        return len(self.out[r - 1])

    def nu(self, r: int) -> int:
        """Degree of the polyvector field a decoration of vertex r must have."""
        return len(self.out[r - 1]) - 1

    def profile(self) -> Tuple[int, ...]:
        return tuple(len(ts) for ts in self.out)

    def in_edges(self, target: int) -> List[int]:
        """Positions (in total order) of the edges ending at ``target``."""
        return [k for k, (_, t) in enumerate(self.edges) if t == target]

    @property
    def key(self) -> str:
        return canonical_key(self)

    def __str__(self):
        return canonical_key(self)


class ClosedGraph(AdmissibleGraph):
    """A graph with no boundary vertices, living on the sphere rather than the disk."""

    def __init__(self, n: int, out: Tuple[Tuple[int, ...], ...]):
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", 0)
        object.__setattr__(self, "out", out)

    @classmethod
    def from_graph(cls, g: AdmissibleGraph) -> "ClosedGraph":
        if g.m != 0:
            raise BadNumbering("a closed graph has no boundary vertices")
        return cls(g.n, g.out)

    def __str__(self):
        return "S:" + canonical_key(self)


def _parse_ref(x) -> int:
    if isinstance(x, int):
        return x
    s = str(x).strip()
    if s.upper().startswith("B"):
        return -int(s[1:])
    return int(s)


def validate(n: int, m: int, edges: Iterable[Tuple[object, object]]) -> AdmissibleGraph:
    """Check the admissibility conditions and return the graph.

    Edges are (source, target) pairs with targets given as ints (negative for
    boundary) or strings like ``"B2"``. Sources are grouped stably, so the
    local order at each vertex is the order of appearance.
    """
    if n < 0 or m < 0:
        raise BadNumbering(f"vertex counts must be >= 0, got n={n}, m={m}")
    out: List[List[int]] = [[] for _ in range(n)]
    for raw_s, raw_t in edges:
        s, t = _parse_ref(raw_s), _parse_ref(raw_t)
        if s < 0:
            raise BoundarySource(f"edge ({target_str(s)},{target_str(t)}) starts at a boundary vertex")
        if not 1 <= s <= n:
            raise BadNumbering(f"source {s} outside 1..{n}")
        if t == 0 or t > n or -t > m:
            raise BadNumbering(f"target {target_str(t) if t else t} does not exist")
        if s == t:
            raise LoopEdge(f"edge ({s},{s}) is a loop")
        if t in out[s - 1]:
            raise MultipleEdge(f"edge ({s},{target_str(t)}) occurs twice")
        out[s - 1].append(t)
    return AdmissibleGraph(n, m, tuple(tuple(ts) for ts in out))


def canonical_key(g: AdmissibleGraph) -> str:
    es = ",".join(f"({s},{target_str(t)})" for s, t in g.edges)
    return f"n={g.n};m={g.m};E=[{es}]"


_KEY_RE = re.compile(r"^\s*n\s*=\s*(\d+)\s*;\s*m\s*=\s*(\d+)\s*;\s*E\s*=\s*\[(.*)\]\s*$")
_EDGE_RE = re.compile(r"\(\s*(\d+)\s*,\s*(B?\d+)\s*\)")


def parse_key(text: str) -> AdmissibleGraph:
    """Inverse of canonical_key; also the accepted textual input format."""
    mt = _KEY_RE.match(text)
    if not mt:
        raise ParseError(f"not a graph key: {text!r}")
    n, m, body = int(mt.group(1)), int(mt.group(2)), mt.group(3)
    edges = _EDGE_RE.findall(body)
    rest = _EDGE_RE.sub("", body).replace(",", "").strip()
    if rest:
        raise ParseError(f"unexpected text in edge list: {rest!r}")
    return validate(n, m, edges)


def corolla(n_out: int) -> AdmissibleGraph:
    """One internal vertex pointing at n_out boundary vertices in order."""
    return AdmissibleGraph(1, n_out, (tuple(-j for j in range(1, n_out + 1)),))


def boundary_only(m: int) -> AdmissibleGraph:
    return AdmissibleGraph(0, m, ())


def enumerate_graphs(n: int, m: int, out_degree_profile: Optional[Sequence[int]] = None,
                     max_edges: Optional[int] = None) -> List[AdmissibleGraph]:
    """All admissible graphs with the given counts, sorted by key.

    Without a profile every out-degree is allowed (including 0).
    """
    if n < 0 or m < 0:
        return []
    if out_degree_profile is not None and len(out_degree_profile) != n:
        return []
    per_vertex = []
    for r in range(1, n + 1):
        cands = [t for t in range(1, n + 1) if t != r] + [-j for j in range(1, m + 1)]
        if out_degree_profile is not None:
            lengths = [out_degree_profile[r - 1]]
        else:
            lengths = range(len(cands) + 1)
        opts = [perm for k in lengths for perm in itertools.permutations(cands, k)]
        per_vertex.append(opts)
    graphs = []
    for choice in itertools.product(*per_vertex):
        g = AdmissibleGraph(n, m, tuple(choice))
        if max_edges is not None and g.e > max_edges:
            continue
        graphs.append(g)
    graphs.sort(key=canonical_key)
    return graphs


@dataclass(frozen=True)
class SubgraphSelector:
    """Internal vertices S and boundary vertices Sp spanning a full subgraph.

    ``boundary`` says whether the collapsed vertex is a boundary vertex. It
    defaults to ``bool(Sp)``; a boundary collapse with empty Sp needs ``slot``,
    the boundary label the collapsed vertex takes.
    """
    S: FrozenSet[int] = field(default_factory=frozenset)
    Sp: FrozenSet[int] = field(default_factory=frozenset)
    boundary: Optional[bool] = None
    slot: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "S", frozenset(self.S))
        object.__setattr__(self, "Sp", frozenset(self.Sp))
        if self.boundary is None:
            object.__setattr__(self, "boundary", bool(self.Sp))

    @property
    def kind(self) -> str:
        return "boundary" if self.boundary else "internal"

    def contains(self, ref: int) -> bool:
        return ref in self.S if ref > 0 else -ref in self.Sp


def subgraph(g: AdmissibleGraph, sel: SubgraphSelector) -> AdmissibleGraph:
    """The induced full subgraph, relabelled in increasing order."""
    S = sorted(sel.S)
    Sp = sorted(sel.Sp)
    imap = {v: i + 1 for i, v in enumerate(S)}
    bmap = {-b: -(i + 1) for i, b in enumerate(Sp)}
    out = []
    for v in S:
        ts = []
        for t in g.out[v - 1]:
            if t > 0 and t in imap:
                ts.append(imap[t])
            elif t < 0 and t in bmap:
                ts.append(bmap[t])
        out.append(tuple(ts))
    return AdmissibleGraph(len(S), len(Sp), tuple(out))


def _check_selector(g: AdmissibleGraph, sel: SubgraphSelector):
    if any(not 1 <= v <= g.n for v in sel.S) or any(not 1 <= b <= g.m for b in sel.Sp):
        raise NotContractible("selector refers to missing vertices")
    if not sel.S and not sel.Sp:
        raise NotContractible("empty selection")
    if sel.Sp:
        lo, hi = min(sel.Sp), max(sel.Sp)
        if len(sel.Sp) != hi - lo + 1:
            raise NotContractible(f"boundary vertices {sorted(sel.Sp)} are not consecutive")
    elif not sel.boundary and not sel.S:
        raise NotContractible("internal collapse needs internal vertices")
    if sel.boundary and not sel.Sp:
        if sel.slot is None or not 1 <= sel.slot <= g.m + 1:
            raise NotContractible("boundary collapse without boundary vertices needs a slot")


def quotient(g: AdmissibleGraph, sel: SubgraphSelector) -> AdmissibleGraph:
    """Collapse the selected full subgraph to one vertex.

    An internal collapsed vertex takes the smallest label of S; a boundary one
    takes the first label of Sp (or ``slot``). Surviving edges keep their
    relative total order.
    """
    _check_selector(g, sel)
    S, Sp = sel.S, sel.Sp
    keep_int = [v for v in range(1, g.n + 1) if v not in S]
    if sel.boundary:
        new_n = len(keep_int)
        imap = {v: i + 1 for i, v in enumerate(keep_int)}
        if Sp:
            lo = min(Sp)
        else:
            lo = sel.slot
        bmap = {}
        for b in range(1, g.m + 1):
            if b in Sp:
                bmap[b] = lo
            elif b < lo:
                bmap[b] = b
            else:
                bmap[b] = b - len(Sp) + 1
        new_m = g.m - len(Sp) + 1
        vphi = -lo
    else:
        anchor = min(S)
        labels = sorted(keep_int + [anchor])
        imap = {v: labels.index(v) + 1 for v in keep_int}
        vphi = labels.index(anchor) + 1
        for v in S:
            imap[v] = vphi
        bmap = {b: b for b in range(1, g.m + 1)}
        new_n, new_m = len(labels), g.m

    def ref(t: int) -> int:
        if t > 0:
            return vphi if t in S else imap[t]
        return -bmap[-t]

    out: List[List[int]] = [[] for _ in range(new_n)]
    for s, t in g.edges:
        if sel.contains(s) and sel.contains(t):
            continue
        if s in S:
            if sel.boundary:
                raise NotAdmissibleQuotient(f"edge ({s},{target_str(t)}) would leave a boundary vertex")
            src = vphi
        else:
            src = imap[s]
        tgt = ref(t)
        if tgt == src:
            raise NotAdmissibleQuotient("collapse creates a loop")
        if tgt in out[src - 1]:
            raise NotAdmissibleQuotient(f"collapse creates a double edge ({src},{target_str(tgt)})")
        out[src - 1].append(tgt)
    return AdmissibleGraph(new_n, new_m, tuple(tuple(ts) for ts in out))


def is_normal(g: AdmissibleGraph, sel: SubgraphSelector) -> bool:
    try:
        quotient(g, sel)
    except (NotAdmissibleQuotient, NotContractible):
        return False
    return True


def _is_proper(g: AdmissibleGraph, sel: SubgraphSelector) -> bool:
    whole = len(sel.S) == g.n and len(sel.Sp) == g.m
    return bool(sel.S or sel.Sp) and not whole


def normal_subgraphs(g: AdmissibleGraph, kind: str = "internal",
                     include_trivial: bool = False) -> List[SubgraphSelector]:
    """Normal selectors of the requested kind.

    Internal selectors have |S| >= 2. Boundary selectors have a consecutive
    nonempty run Sp and any S; with ``include_trivial`` the whole graph and
    single boundary vertices are kept too, and for graphs whose selection has
    no boundary vertex the collapsed vertex may sit in any boundary slot.
    """
    out = []
    internal = range(1, g.n + 1)
    subsets = [frozenset(c) for k in range(g.n + 1) for c in itertools.combinations(internal, k)]
    if kind == "internal":
        for S in subsets:
            if len(S) < 2:
                continue
            sel = SubgraphSelector(S, frozenset())
            if _is_proper(g, sel) and is_normal(g, sel):
                out.append(sel)
        return out
    if kind != "boundary":
        raise ValueError(f"unknown kind {kind!r}")
    runs = [frozenset(range(a, b + 1)) for a in range(1, g.m + 1) for b in range(a, g.m + 1)]
    for Sp in runs:
        for S in subsets:
            sel = SubgraphSelector(S, Sp)
            trivial = not S and len(Sp) == 1
            if not include_trivial and (trivial or not _is_proper(g, sel)):
                continue
            if 2 * len(S) + len(Sp) < 2 and not include_trivial:
                continue
            if is_normal(g, sel):
                out.append(sel)
    if include_trivial:
        for S in subsets:
            if not S:
                continue
            for slot in range(1, g.m + 2):
                sel = SubgraphSelector(S, frozenset(), boundary=True, slot=slot)
                if is_normal(g, sel):
                    out.append(sel)
    return out


def is_forest(g: AdmissibleGraph) -> bool:
    """True iff the undirected graph on internal vertices (internal edges only) is acyclic.

    A 2-cycle u->v, v->u counts as a cycle.
    """
    parent = list(range(g.n + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for s, t in g.edges:
        if t <= 0:
            continue
        a, b = find(s), find(t)
        if a == b:
            return False
        parent[a] = b
    return True
