"""Configuration-space weights of admissible graphs.

Points live in the upper half-plane; boundary points on the real line. The
angle of an edge p -> q is the harmonic angle arg((q - p)/(q - conj p)),
which vanishes when q sits on the vertical geodesic from p towards infinity
and winds once when q circles p. A total-degree-1 graph has as many edges as
its configuration space has dimensions, and its weight is the integral of
the wedge of the normalized edge-angle forms.

Integration runs over the open configuration space, gauge-fixed by
translations and dilations, with importance sampling from a mixture that
resolves the collision singularities. Batches are seeded from
(seed, batch index) and reduced in batch order, so results do not depend on
the worker count.

The module also classifies the codimension-one faces of a total-degree-2
graph and computes the sign with which each face enters the boundary sum;
``face_terms`` rebuilds the edge contractions and the cobracket from faces.
"""
from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .graph_dgla import (
    GraphSum,
    PairSum,
    canonical_form,
    circ_i,
    cobracket,
    conventions,
    d2_i,
    d2_star,
)
from .graphs import (
    AdmissibleGraph,
    NotAdmissibleQuotient,
    NotContractible,
    SubgraphSelector,
    canonical_key,
    parse_key,
    quotient,
    subgraph,
)

try:
    from ._density import jacobian_det
    KERNEL = "cython"
except ImportError:  # pragma: no cover - exercised when the extension is not built
    from ._density_py import jacobian_det
    KERNEL = "numpy"

__all__ = [
    "KERNEL",
    "CoincidentPoints",
    "DimensionMismatch",
    "ParseError",
    "IoError",
    "Configuration",
    "angle",
    "winding",
    "omega_density",
    "integrate_weight",
    "WeightEstimate",
    "build_table",
    "closed_edge_integral",
    "exact_weight",
    "ORIENTATION",
    "BoundaryFace",
    "ContributesEdgeContraction",
    "ContributesProductOfWeights",
    "Vanishes",
    "boundary_faces",
    "classify_boundary_face",
    "face_sign",
    "face_terms",
    "face_classification_matches",
    "TableEntry",
    "WeightTable",
    "load_table",
    "store_table",
]


class CoincidentPoints(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class ParseError(ValueError):
    pass


class IoError(OSError):
    pass


# Orientation of each configuration space C_{n,m} relative to the coordinate
# order (x1, y1, ..., xn, yn, free t's); unlisted spaces take +1. C_{1,2}
# is fixed by the first-order star term being the Poisson bracket, C_{2,2}
# by agreement with the Moyal product, the rest by the cocycle equation on
# graphs with n, m <= 2. The weights on C_{2,1} vanish, so its sign is moot.
ORIENTATION: Dict[Tuple[int, int], int] = {(1, 0): -1, (1, 3): -1}


def _orientation(n: int, m: int) -> int:
    return ORIENTATION.get((n, m), 1)


# ---------------------------------------------------------------- configurations

@dataclass(frozen=True)
class Configuration:
    internal: Tuple[complex, ...]
    boundary: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "internal", tuple(complex(z) for z in self.internal))
        object.__setattr__(self, "boundary", tuple(float(t) for t in self.boundary))
        if any(z.imag <= 0 for z in self.internal):
            raise ValueError("internal points must lie in the upper half-plane")
        if any(a >= b for a, b in zip(self.boundary, self.boundary[1:])):
            raise ValueError("boundary points must be strictly increasing")
        if len(set(self.internal)) != len(self.internal):
            raise CoincidentPoints("two internal points coincide")


def angle(p: complex, q: complex) -> float:
    """Harmonic angle of the edge p -> q, in [0, 2*pi)."""
    p, q = complex(p), complex(q)
    if p.imag <= 0:
        raise ValueError("the source of an edge must be an internal point")
    if p == q:
        raise CoincidentPoints(f"p = q = {p}")
    return math.atan2(((q - p) / (q - p.conjugate())).imag,
                      ((q - p) / (q - p.conjugate())).real) % (2 * math.pi)


def winding(p: complex, loop, samples: int = 4096) -> float:
    """Total change of angle(p, q) as q runs once around ``loop(s)``, s in [0, 1)."""
    s = np.arange(samples + 1) / samples
    qs = np.array([loop(x) for x in s], dtype=complex)
    ph = np.angle((qs - p) / (qs - np.conj(p)))
    return float(np.sum(np.angle(np.exp(1j * np.diff(ph)))))


# ---------------------------------------------------------------- gauge and density

@dataclass(frozen=True)
class _Layout:
    n: int
    m: int
    colx: np.ndarray
    coly: np.ndarray
    colt: np.ndarray
    dim: int
    t_lo: float
    t_hi: float


def _layout(n: int, m: int, gauge: str = "unit") -> _Layout:
    """Free-coordinate columns. Gauges: m >= 2 fixes t1, tm; m = 1 fixes t1 = 0
    and y1 = 1; m = 0 fixes z1 = i."""
    lo, hi = {"unit": (0.0, 1.0), "shifted": (-1.0, 0.0)}[gauge]
    colx = -np.ones(n, dtype=np.int64)
    coly = -np.ones(n, dtype=np.int64)
    colt = -np.ones(m, dtype=np.int64)
    col = 0
    for k in range(n):
        fix_x = m == 0 and k == 0
        fix_y = m <= 1 and k == 0
        if not fix_x:
            colx[k] = col
            col += 1
        if not fix_y:
            coly[k] = col
            col += 1
    for j in range(1, m - 1):
        colt[j] = col
        col += 1
    return _Layout(n, m, colx, coly, colt, col, lo, hi)


def _edge_arrays(g: AdmissibleGraph):
    src = np.array([s for s, _ in g.edges], dtype=np.int64)
    tgt = np.array([t for _, t in g.edges], dtype=np.int64)
    return src, tgt


def _check_dimension(g: AdmissibleGraph, lay: _Layout):
    if g.e != lay.dim:
        raise DimensionMismatch(
            f"{canonical_key(g)} has {g.e} edges but its configuration space has dimension {lay.dim}")


def omega_density(g: AdmissibleGraph, c: Configuration) -> float:
    """Density of the normalized angle form against the free coordinates."""
    if len(c.internal) != g.n or len(c.boundary) != g.m:
        raise ValueError("configuration does not match the graph")
    lay = _layout(g.n, g.m)
    _check_dimension(g, lay)
    for z in c.internal:
        if any(z == t for t in c.boundary):
            raise CoincidentPoints(f"internal point {z} on a boundary point")
    zx = np.array([[z.real for z in c.internal]], dtype=float).reshape(1, g.n)
    zy = np.array([[z.imag for z in c.internal]], dtype=float).reshape(1, g.n)
    t = np.array([c.boundary], dtype=float).reshape(1, g.m)
    src, tgt = _edge_arrays(g)
    det = jacobian_det(zx, zy, t, src, tgt, lay.colx, lay.coly, lay.colt)[0]
    return _orientation(g.n, g.m) * det / (2 * math.pi) ** g.e


# ---------------------------------------------------------------- sampling

_LOGISTIC_SCALE = 2.0


def _cauchy_pdf(x, loc, scale):
    u = (x - loc) / scale
    return 1.0 / (math.pi * scale * (1.0 + u * u))


def _broad_pdf(x, y, loc, scale):
    # x Cauchy, log y logistic
    u = (np.log(y) - math.log(scale)) / _LOGISTIC_SCALE
    lg = np.exp(-np.abs(u)) / (_LOGISTIC_SCALE * (1.0 + np.exp(-np.abs(u))) ** 2)
    return _cauchy_pdf(x, loc, scale) * lg / y


def _sample_batch(lay: _Layout, rng: np.random.Generator, N: int):
    """Points, boundary parameters and proposal density for N samples."""
    n, m = lay.n, lay.m
    q = np.ones(N)
    t = np.zeros((N, m))
    if m >= 2:
        L = lay.t_hi - lay.t_lo
        t[:, 0], t[:, m - 1] = lay.t_lo, lay.t_hi
        if m > 2:
            t[:, 1:m - 1] = np.sort(lay.t_lo + L * rng.random((N, m - 2)), axis=1)
            q *= math.factorial(m - 2) / L ** (m - 2)
        loc, scale = (lay.t_lo + lay.t_hi) / 2, L
    else:
        loc, scale = 0.0, 1.0
    zx = np.zeros((N, n))
    zy = np.zeros((N, n))
    for k in range(n):
        if m == 0 and k == 0:
            zy[:, 0] = 1.0
            continue
        if m == 1 and k == 0:
            zx[:, 0] = loc + scale * rng.standard_cauchy(N)
            zy[:, 0] = scale
            q *= _cauchy_pdf(zx[:, 0], loc, scale)
            continue
        # local components: half-discs at boundary points, discs at earlier points
        cx = [t[:, j] for j in range(m)] + [zx[:, l] for l in range(k)]
        cy = [np.zeros(N)] * m + [zy[:, l] for l in range(k)]
        R = [np.full(N, 0.5 * scale)] * m + [zy[:, l] for l in range(k)]
        arc = [math.pi] * m + [2 * math.pi] * k
        nloc = len(cx)
        w0 = 0.5 if nloc else 1.0
        wl = (1.0 - w0) / nloc if nloc else 0.0
        pick = rng.random(N)
        comp = np.minimum(((pick - w0) / wl).astype(np.int64), nloc - 1) if nloc else None
        bx = loc + scale * rng.standard_cauchy(N)
        by = scale * np.exp(rng.logistic(0.0, _LOGISTIC_SCALE, N))
        x, y = bx, by
        if nloc:
            local = pick >= w0
            r = rng.random(N)
            th = rng.random(N)
            CX, CY, RR, AR = (np.stack(a) for a in (cx, cy, R, [np.full(N, a) for a in arc]))
            idx = (comp.clip(0), np.arange(N))
            rad = RR[idx] * r
            ang = AR[idx] * th
            x = np.where(local, CX[idx] + rad * np.cos(ang), bx)
            y = np.where(local, CY[idx] + rad * np.sin(ang), by)
        y = np.where(y > 0, y, np.nan)
        dens = w0 * _broad_pdf(x, y, loc, scale)
        for j in range(nloc):
            dist = np.hypot(x - cx[j], y - cy[j])
            inside = dist < R[j]
            with np.errstate(divide="ignore", invalid="ignore"):
                dens = dens + np.where(inside, wl / (arc[j] * R[j] * dist), 0.0)
        zx[:, k], zy[:, k] = x, y
        q *= dens
    return zx, zy, t, q


def _batch_sums(g: AdmissibleGraph, lay: _Layout, seed: int, batch: int, N: int):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, batch])))
    zx, zy, t, q = _sample_batch(lay, rng, N)
    ok = np.isfinite(q) & (q > 0) & np.all(np.isfinite(zy), axis=1)
    zx = np.ascontiguousarray(np.where(ok[:, None], zx, 0.0))
    zy = np.ascontiguousarray(np.where(ok[:, None], zy, 1.0))
    src, tgt = _edge_arrays(g)
    det = jacobian_det(zx, zy, np.ascontiguousarray(t), src, tgt, lay.colx, lay.coly, lay.colt)
    val = np.where(ok, det / np.where(ok, q, 1.0), 0.0)
    val = np.where(np.isfinite(val), val, 0.0)
    return float(np.sum(val)), float(np.sum(val * val))


class WeightEstimate(NamedTuple):
    estimate: float
    stderr: float


def _degree_one(g: AdmissibleGraph) -> bool:
    return g.total_degree == 1


def exact_weight(g: AdmissibleGraph) -> Optional[Fraction]:
    """Weights known without integration: zero off degree 1 and zero-dimensional spaces."""
    if not _degree_one(g):
        return Fraction(0)
    sign, rep = canonical_form(g)
    if sign == 0:
        return Fraction(0)
    if _layout(rep.n, rep.m).dim == 0:
        return Fraction(sign * _orientation(rep.n, rep.m))
    return None


def integrate_weight(g: AdmissibleGraph, samples: int = 10 ** 6, seed: int = 0,
                     batch_size: int = 1 << 16, workers: int = 1,
                     gauge: str = "unit") -> WeightEstimate:
    """Monte Carlo estimate of the weight of a total-degree-1 graph."""
    if not _degree_one(g):
        raise DimensionMismatch(f"{canonical_key(g)} has total degree {g.total_degree}, not 1")
    sign, rep = canonical_form(g)
    if sign == 0:
        return WeightEstimate(0.0, 0.0)
    lay = _layout(rep.n, rep.m, gauge)
    _check_dimension(rep, lay)
    if lay.dim == 0:
        return WeightEstimate(float(sign * _orientation(rep.n, rep.m)), 0.0)
    sizes = [batch_size] * (samples // batch_size)
    if samples % batch_size:
        sizes.append(samples % batch_size)
    jobs = [(rep, lay, seed, b, N) for b, N in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda a: _batch_sums(*a), jobs))
    else:
        parts = [_batch_sums(*a) for a in jobs]
    s1 = float(np.sum([p[0] for p in parts]))
    s2 = float(np.sum([p[1] for p in parts]))
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0)
    scale = sign * _orientation(rep.n, rep.m) / (2 * math.pi) ** rep.e
    return WeightEstimate(scale * mean, abs(scale) * math.sqrt(var / samples))


def build_table(graphs, samples: int = 10 ** 6, seed: int = 0, workers: int = 1,
                table: Optional["WeightTable"] = None) -> "WeightTable":
    """Monte Carlo entries for every degree-1 representative not already known."""
    table = WeightTable() if table is None else table
    for g in graphs:
        sign, rep = canonical_form(g)
        if not sign or exact_weight(rep) is not None or canonical_key(rep) in table.entries:
            continue
        est = integrate_weight(rep, samples, seed, workers=workers)
        table.set_estimate(rep, est, samples, seed)
    return table


def closed_edge_integral(points: int = 4096) -> float:
    """Integral of the normalized angle form of one edge over the circle of
    two-point configurations in the plane, along a wobbly loop."""
    th = 2 * math.pi * np.arange(points) / points
    z = np.exp(1j * th) * (1 + 0.3 * np.cos(3 * th))
    dz = 1j * np.exp(1j * th) * (1 + 0.3 * np.cos(3 * th)) - np.exp(1j * th) * 0.9 * np.sin(3 * th)
    dphi = (dz / z).imag
    return float(np.sum(dphi) * (2 * math.pi / points) / (2 * math.pi))


# ---------------------------------------------------------------- boundary faces

@dataclass(frozen=True)
class ContributesEdgeContraction:
    pass


@dataclass(frozen=True)
class ContributesProductOfWeights:
    pass


@dataclass(frozen=True)
class Vanishes:
    reason: str


@dataclass(frozen=True)
class BoundaryFace:
    selector: SubgraphSelector

    @property
    def kind(self) -> str:
        return self.selector.kind


def boundary_faces(g: AdmissibleGraph) -> List[BoundaryFace]:
    """All codimension-one faces: internal collisions of |S| >= 2 points and
    collapses of S with a consecutive run S' onto the boundary."""
    faces = []
    verts = range(1, g.n + 1)
    for k in range(2, g.n + 1):
        for S in itertools.combinations(verts, k):
            faces.append(BoundaryFace(SubgraphSelector(frozenset(S))))
    subsets = [frozenset(c) for k in range(g.n + 1) for c in itertools.combinations(verts, k)]
    for a in range(1, g.m + 1):
        for b in range(a, g.m + 1):
            Sp = frozenset(range(a, b + 1))
            for S in subsets:
                if 2 * len(S) + len(Sp) < 2 or (len(S) == g.n and len(Sp) == g.m):
                    continue
                faces.append(BoundaryFace(SubgraphSelector(S, Sp)))
    for S in subsets:
        if not S or (len(S) == g.n and g.m == 0):
            continue
        for slot in range(1, g.m + 2):
            faces.append(BoundaryFace(SubgraphSelector(S, frozenset(), boundary=True, slot=slot)))
    return faces


def _try_quotient(g: AdmissibleGraph, sel: SubgraphSelector) -> Optional[AdmissibleGraph]:
    try:
        return quotient(g, sel)
    except (NotAdmissibleQuotient, NotContractible):
        return None


def classify_boundary_face(g: AdmissibleGraph, face: BoundaryFace):
    sel = face.selector
    if face.kind == "internal":
        if len(sel.S) >= 3:
            return Vanishes("|S|≥3")
        if len(sel.S) < 2:
            raise ValueError("an internal face needs |S| ≥ 2")
        inner = subgraph(g, sel)
        if inner.e != 1:
            return Vanishes("collapsed pair is not a single internal edge")
        if _try_quotient(g, sel) is None:
            return Vanishes("quotient is not admissible")
        return ContributesEdgeContraction()
    outer = _try_quotient(g, sel)
    if outer is None:
        return Vanishes("bad edges")
    inner = subgraph(g, sel)
    if inner.total_degree != 1 or outer.total_degree != 1:
        return Vanishes(f"factor degrees ({inner.total_degree}, {outer.total_degree})")
    return ContributesProductOfWeights()


def _relabel(g: AdmissibleGraph, newlabel: Dict[int, int]) -> Tuple[int, AdmissibleGraph]:
    """g with internal vertex v renamed newlabel[v]; sign of the edge permutation."""
    swap = conventions().swap
    perm = sorted(newlabel, key=newlabel.get)
    sign = 1
    for a in range(len(perm)):
        for b in range(a + 1, len(perm)):
            if perm[a] > perm[b]:
                sign *= swap(g.outdeg(perm[a]), g.outdeg(perm[b]))
    out = tuple(tuple(newlabel[t] if t > 0 else t for t in g.out[v - 1]) for v in perm)
    return sign, AdmissibleGraph(g.n, g.m, out)


def face_sign(g: AdmissibleGraph, face: BoundaryFace) -> Tuple[int, AdmissibleGraph, AdmissibleGraph]:
    """(sign, collapsed graph, quotient) for a contributing face.

    The sign is the coefficient with which g occurs in the insertion of the
    collapsed graph into the quotient at the collapsed vertex: the elementary
    insertion term that rebuilds g, times the global factors of circ or d2.
    """
    sel = face.selector
    conv = conventions()
    inner = subgraph(g, sel)
    outer = quotient(g, sel)
    keep = [v for v in range(1, g.n + 1) if v not in sel.S]
    if face.kind == "internal":
        (s, t), = [(a, b) for a, b in g.edges if a in sel.S and b in sel.S]
        anchor = min(sel.S)
        labels = sorted(keep + [anchor])
        i = labels.index(anchor) + 1
        newlabel = {}
        for v in keep:
            pos = labels.index(v) + 1
            newlabel[v] = pos if pos < i else pos + 1
        newlabel[s], newlabel[t] = i, i + 1
        sign, T = _relabel(g, newlabel)
        row = list(T.out[i - 1])
        k = row.index(i + 1)
        sign *= -1 if k % 2 else 1
        row.insert(0, row.pop(k))
        T = AdmissibleGraph(T.n, T.m, T.out[:i - 1] + (tuple(row),) + T.out[i:])
        coeff = d2_i(outer, i).coefficient(T) * conv.d2_twist(outer) * conv.d2_eps(outer, i)
        inner = AdmissibleGraph(2, 0, ((2,), ()))
    else:
        j = min(sel.Sp) if sel.Sp else sel.slot
        newlabel = {v: r + 1 for r, v in enumerate(keep)}
        newlabel.update({v: len(keep) + r + 1 for r, v in enumerate(sorted(sel.S))})
        sign, T = _relabel(g, newlabel)
        alt = -1 if ((j - 1) * (inner.m - 1)) % 2 else 1
        coeff = circ_i(outer, inner, j).coefficient(T) * conv.circ_eps(outer, inner) * alt
    if not coeff:
        raise AssertionError(f"face {sel} of {canonical_key(g)} is not an insertion term")
    return int(coeff) * sign, inner, outer


def face_terms(g: AdmissibleGraph) -> Tuple[GraphSum, PairSum]:
    """Edge-contraction quotients and (quotient, collapsed) pairs from contributing faces.

    Every term is written in canonical representatives with its face sign.
    """
    internal: Dict[AdmissibleGraph, Fraction] = {}
    pairs: PairSum = {}
    for face in boundary_faces(g):
        cls = classify_boundary_face(g, face)
        if isinstance(cls, Vanishes):
            continue
        c, inner, outer = face_sign(g, face)
        so, outer = canonical_form(outer)
        if face.kind == "internal":
            if so:
                internal[outer] = internal.get(outer, Fraction(0)) + c * so
            continue
        si, inner = canonical_form(inner)
        if so and si:
            pairs[(outer, inner)] = pairs.get((outer, inner), Fraction(0)) + c * so * si
    return GraphSum(internal), {k: v for k, v in pairs.items() if v}


def face_classification_matches(g: AdmissibleGraph) -> bool:
    """Contributing faces reproduce the edge contractions and the degree-(1,1)
    part of the cobracket exactly."""
    sign, g = canonical_form(g)
    if not sign:
        return True
    internal, pairs = face_terms(g)
    if internal != d2_star(g):
        return False
    delta = {k: v for k, v in cobracket(g).items()
             if k[0].total_degree == 1 and k[1].total_degree == 1}
    sym: PairSum = {}
    for (a, b), c in pairs.items():
        for key in ((a, b), (b, a)):
            sym[key] = sym.get(key, Fraction(0)) + c
    return {k: v for k, v in sym.items() if v} == delta


# ---------------------------------------------------------------- tables

@dataclass
class TableEntry:
    estimate: float
    stderr: float
    samples: int = 0
    seed: int = 0
    exact: Optional[Fraction] = None

    @property
    def value(self) -> float:
        return float(self.exact) if self.exact is not None else self.estimate

    @property
    def error(self) -> float:
        return 0.0 if self.exact is not None else self.stderr

    def to_record(self, key: str) -> dict:
        rec = {"key": key, "estimate": self.estimate, "stderr": self.stderr,
               "samples": self.samples, "seed": self.seed}
        if self.exact is not None:
            rec["exact"] = f"{self.exact.numerator}/{self.exact.denominator}"
        return rec


@dataclass
class WeightTable:
    """Weights keyed by canonical graph key; lookups apply the relabelling sign."""
    entries: Dict[str, TableEntry] = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, g) -> bool:
        return self._key(g) in self.entries or self._known(g) is not None

    def __eq__(self, other):
        return isinstance(other, WeightTable) and self.entries == other.entries

    @staticmethod
    def _key(g) -> str:
        if isinstance(g, str):
            g = parse_key(g)
        return canonical_key(canonical_form(g)[1])

    @staticmethod
    def _known(g) -> Optional[Fraction]:
        if isinstance(g, str):
            g = parse_key(g)
        return exact_weight(g)

    def set_exact(self, g, value) -> None:
        sign, rep = canonical_form(g)
        if not sign:
            raise ValueError(f"{canonical_key(g)} vanishes by symmetry")
        v = Fraction(value) * sign
        self.entries[canonical_key(rep)] = TableEntry(float(v), 0.0, 0, 0, v)

    def set_estimate(self, g, est: WeightEstimate, samples: int, seed: int) -> None:
        sign, rep = canonical_form(g)
        if not sign:
            raise ValueError(f"{canonical_key(g)} vanishes by symmetry")
        self.entries[canonical_key(rep)] = TableEntry(sign * est.estimate, est.stderr, samples, seed)

    def lookup(self, g) -> Tuple[float, float]:
        """(value, stderr) of a labelled graph; raises KeyError if unknown."""
        if isinstance(g, str):
            g = parse_key(g)
        sign, rep = canonical_form(g)
        if not sign:
            return 0.0, 0.0
        entry = self.entries.get(canonical_key(rep))
        if entry is not None:
            return sign * entry.value, entry.error
        known = exact_weight(rep)
        if known is not None:
            return sign * float(known), 0.0
        raise KeyError(canonical_key(rep))

    def exact(self, g) -> Optional[Fraction]:
        """Exact weight of a labelled graph if one is known."""
        sign, rep = canonical_form(g)
        if not sign:
            return Fraction(0)
        entry = self.entries.get(canonical_key(rep))
        if entry is not None:
            return None if entry.exact is None else sign * entry.exact
        known = exact_weight(rep)
        return None if known is None else sign * known

    def merge(self, other: "WeightTable") -> "WeightTable":
        """Union of both tables; exact entries win, then larger sample counts."""
        out = dict(self.entries)
        for k, e in other.entries.items():
            mine = out.get(k)
            if mine is None or (e.exact is not None and mine.exact is None) or (
                    mine.exact is None and e.exact is None and e.samples > mine.samples):
                out[k] = e
        return WeightTable(out)

    def copy(self) -> "WeightTable":
        return WeightTable(dict(self.entries))


def _parse_record(rec: dict, lineno: int) -> Tuple[str, TableEntry]:
    try:
        key = canonical_key(canonical_form(parse_key(rec["key"]))[1])
        if key != rec["key"]:
            raise ValueError(f"key {rec['key']!r} is not canonical")
        exact = rec.get("exact")
        if exact is not None:
            exact = Fraction(exact)
        entry = TableEntry(float(rec["estimate"]), float(rec["stderr"]),
                           int(rec["samples"]), int(rec["seed"]), exact)
        if exact is None and not entry.stderr > 0:
            raise ValueError("Monte Carlo entries need stderr > 0")
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"line {lineno}: {exc}") from None
    return key, entry


def load_table(path) -> WeightTable:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise IoError(f"cannot read weight table {path}: {exc}") from exc
    entries = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {lineno}: {exc.msg}") from None
        if not isinstance(rec, dict):
            raise ParseError(f"line {lineno}: expected an object")
        key, entry = _parse_record(rec, lineno)
        entries[key] = entry
    return WeightTable(entries)


def store_table(table: WeightTable, path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for key in sorted(table.entries):
                fh.write(json.dumps(table.entries[key].to_record(key)) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write weight table {path}: {exc}") from exc
