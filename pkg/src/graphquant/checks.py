"""Identity suites shared by the command line and the test-suite.

Every suite returns ``CheckResult`` records: a name, the number of cases
tried and the failing cases, so reports stay uniform.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence

from . import graph_dgla as gd
from .calculus import morphism_check_circ, morphism_check_d1, morphism_check_d2
from .graphs import AdmissibleGraph, canonical_key, enumerate_graphs, is_forest, parse_key
from .polyalg import Poly, PolyVectorField
from .weights import face_classification_matches


@dataclass
class CheckResult:
    name: str
    cases: int = 0
    failures: List[str] = field(default_factory=list)
    note: str = ""

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, ok: bool, label: Callable[[], str]) -> None:
        self.cases += 1
        if not ok:
            self.failures.append(label())

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name}: {self.cases - len(self.failures)}/{self.cases}"
        if self.note:
            text += f" ({self.note})"
        return text


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


# ---------------------------------------------------------------- pools

POOL_KEYS = (
    "n=0;m=1;E=[]",
    "n=0;m=2;E=[]",
    "n=1;m=0;E=[]",
    "n=1;m=1;E=[]",
    "n=1;m=1;E=[(1,B1)]",
    "n=1;m=2;E=[(1,B2)]",
    "n=1;m=2;E=[(1,B1),(1,B2)]",
    "n=2;m=0;E=[(1,2)]",
    "n=2;m=1;E=[(1,2),(2,B1)]",
    "n=2;m=2;E=[(1,B1),(2,B2)]",
    "n=2;m=2;E=[(1,B1),(1,B2),(2,B1)]",
    "n=2;m=2;E=[(1,2),(1,B2),(2,B1),(2,B2)]",
)


def identity_pool() -> List[AdmissibleGraph]:
    """Twelve fixed graphs with n, m <= 2 and e <= 4, mixing both degree parities."""
    return [parse_key(k) for k in POOL_KEYS]


def small_graphs(nmax: int = 2, mmax: int = 2, emax: Optional[int] = 4) -> List[AdmissibleGraph]:
    return [g for n in range(nmax + 1) for m in range(mmax + 1)
            for g in enumerate_graphs(n, m, max_edges=emax) if g.v > 0]


def canonical_graphs(nmax: int = 2, mmax: int = 2) -> List[AdmissibleGraph]:
    reps = set()
    for n in range(nmax + 1):
        for m in range(mmax + 1):
            for g in enumerate_graphs(n, m):
                sign, rep = gd.canonical_form(g)
                if sign:
                    reps.add(rep)
    return sorted(reps, key=canonical_key)


# ---------------------------------------------------------------- DGLA

def dgla_suite(graphs: Optional[Sequence[AdmissibleGraph]] = None,
               pool: Optional[Sequence[AdmissibleGraph]] = None) -> List[CheckResult]:
    graphs = small_graphs() if graphs is None else graphs
    pool = identity_pool() if pool is None else pool
    out = []
    for name, fn in (("d1^2 = 0", lambda g: gd.d1(gd.d1(g)).is_zero()),
                     ("d2^2 = 0", lambda g: gd.d2(gd.d2(g)).is_zero()),
                     ("d1 d2 + d2 d1 = 0", lambda g: (gd.d1(gd.d2(g)) + gd.d2(gd.d1(g))).is_zero())):
        res = CheckResult(name)
        for g in graphs:
            res.record(fn(g), lambda g=g: canonical_key(g))
        out.append(res)
    anti = CheckResult("graded antisymmetry")
    for x, y in itertools.product(pool, repeat=2):
        s = _sign(x.total_degree * y.total_degree)
        anti.record((gd.bracket(x, y) + gd.bracket(y, x).scale(s)).is_zero(),
                    lambda x=x, y=y: f"{x} | {y}")
    out.append(anti)
    jac = CheckResult("graded Jacobi")
    for x, y, z in itertools.product(pool, repeat=3):
        a, b, c = x.total_degree, y.total_degree, z.total_degree
        total = (gd.bracket(x, gd.bracket(y, z)).scale(_sign(a * c))
                 + gd.bracket(y, gd.bracket(z, x)).scale(_sign(b * a))
                 + gd.bracket(z, gd.bracket(x, y)).scale(_sign(c * b)))
        jac.record(total.is_zero(), lambda x=x, y=y, z=z: f"{x} | {y} | {z}")
    out.append(jac)
    e = gd.edge_graph()
    leib = CheckResult("Leibniz (Psi o Phi).e = (-1)^|Phi| (Psi.e) o Phi + Psi o (Phi.e)")
    for x, y in itertools.product(pool, repeat=2):
        lhs = gd.bullet(gd.circ(x, y, reduce=False), e)
        rhs = (gd.circ(gd.bullet(x, e, reduce=False), y).scale(_sign(y.total_degree))
               + gd.circ(x, gd.bullet(y, e, reduce=False)))
        leib.record(lhs == rhs, lambda x=x, y=y: f"{x} | {y}")
    out.append(leib)
    for name, dop in (("d1 derivation of the bracket", gd.d1), ("d2 derivation of the bracket", gd.d2)):
        res = CheckResult(name)
        for x, y in itertools.product(pool, repeat=2):
            lhs = dop(gd.bracket(x, y))
            rhs = gd.bracket(dop(x), y) + gd.bracket(x, dop(y)).scale(_sign(x.total_degree))
            res.record(lhs == rhs, lambda x=x, y=y: f"{x} | {y}")
        out.append(res)
    return out


def unsigned_leibniz_failures(pool: Optional[Sequence[AdmissibleGraph]] = None) -> List[str]:
    """Pairs where (Psi o Phi).e = (Psi.e) o Phi + Psi o (Phi.e) fails without the sign."""
    pool = identity_pool() if pool is None else pool
    e = gd.edge_graph()
    bad = []
    for x, y in itertools.product(pool, repeat=2):
        lhs = gd.bullet(gd.circ(x, y, reduce=False), e)
        rhs = gd.circ(gd.bullet(x, e, reduce=False), y) + gd.circ(x, gd.bullet(y, e, reduce=False))
        if lhs != rhs:
            bad.append(f"{x} | {y}")
    return bad


def adjointness_suite(nmax: int = 2, mmax: int = 2) -> List[CheckResult]:
    reps = canonical_graphs(nmax, mmax)
    contraction = CheckResult("<d2* Phi|G> = <Phi|d2 G>")
    co = CheckResult("<delta Phi|G x Psi> = <Phi|[G, Psi]>")
    for phi in reps:
        ds = gd.d2_star(phi)
        cb = gd.cobracket(phi)
        for g in reps:
            if g.n == phi.n - 1 and g.m == phi.m:
                contraction.record(gd.pairing(ds, g) == gd.pairing(phi, gd.d2(g)),
                                   lambda phi=phi, g=g: f"{phi} | {g}")
        for a, b in itertools.product(reps, repeat=2):
            if a.n + b.n == phi.n and a.m + b.m - 1 == phi.m:
                co.record(gd.pair_pairing(cb, a, b) == gd.pairing(phi, gd.bracket(a, b)),
                          lambda phi=phi, a=a, b=b: f"{phi} | {a} | {b}")
    return [contraction, co]


# ---------------------------------------------------------------- morphism

def random_poly(rng: random.Random, d: int, degree: int = 2, terms: int = 3) -> Poly:
    out = {}
    for _ in range(terms):
        e = [0] * d
        for _ in range(rng.randint(0, degree)):
            e[rng.randrange(d)] += 1
        out[tuple(e)] = out.get(tuple(e), 0) + rng.randint(-3, 3)
    return Poly.from_terms(d, out)


def random_polyvector(rng: random.Random, d: int, k: int, degree: int = 2) -> PolyVectorField:
    if k + 1 > d:
        return PolyVectorField(d, k)
    if k == -1:
        return PolyVectorField.function(random_poly(rng, d, degree))
    return PolyVectorField(d, k, {I: random_poly(rng, d, degree).p
                                  for I in itertools.combinations(range(d), k + 1)})


def morphism_suite(pool: Optional[Sequence[AdmissibleGraph]] = None, decorations: int = 20,
                   seed: int = 0, dmax: int = 3) -> List[CheckResult]:
    """U intertwines circ, d1 and d2 on random degree-matched decorations."""
    pool = identity_pool() if pool is None else pool
    rng = random.Random(seed)
    dims = list(range(2, dmax + 1))
    circ_res = CheckResult("U(g1 o_i g2) = U(g1) o U(g2)")
    d1_res = CheckResult("U(d1 g) = d_Hoch U(g)")
    d2_res = CheckResult("U(d2_i g) = U(g) with xi_i . xi_(i+1)")
    for g1, g2 in itertools.product(pool, repeat=2):
        for i in range(1, g1.m + 1):
            for _ in range(decorations):
                d = rng.choice(dims)
                xis = [random_polyvector(rng, d, g.nu(r + 1)) for g in (g1, g2) for r in range(g.n)]
                fs = [random_poly(rng, d) for _ in range(g1.m + g2.m - 1)]
                circ_res.record(morphism_check_circ(g1, g2, i, xis, fs, d),
                                lambda g1=g1, g2=g2, i=i: f"{g1} o_{i} {g2}")
    for g in pool:
        for _ in range(decorations):
            d = rng.choice(dims)
            xis = [random_polyvector(rng, d, g.nu(r + 1)) for r in range(g.n)]
            fs = [random_poly(rng, d) for _ in range(g.m + 1)]
            d1_res.record(morphism_check_d1(g, xis, fs, d), lambda g=g: str(g))
        for i in range(1, g.n + 1):
            for _ in range(decorations):
                d = rng.choice(dims)
                k1 = rng.randint(-1, max(-1, g.nu(i) + 1))
                k2 = g.nu(i) - k1
                xis = [random_polyvector(rng, d, g.nu(r + 1)) for r in range(g.n)]
                xis = xis[:i - 1] + [random_polyvector(rng, d, k1), random_polyvector(rng, d, k2)] + xis[i:]
                fs = [random_poly(rng, d) for _ in range(g.m)]
                d2_res.record(morphism_check_d2(g, i, xis, fs, d),
                              lambda g=g, i=i, k1=k1: f"{g} at {i}, split degree {k1}")
    return [circ_res, d1_res, d2_res]


# ---------------------------------------------------------------- forests

def has_internal_cycle(g: AdmissibleGraph) -> bool:
    """Depth-first search for a cycle among internal vertices, parallel edges included."""
    adj = {v: [] for v in range(1, g.n + 1)}
    for k, (s, t) in enumerate(g.edges):
        if t > 0:
            adj[s].append((t, k))
            adj[t].append((s, k))
    seen = set()
    for root in adj:
        if root in seen:
            continue
        stack = [(root, None)]
        while stack:
            v, via = stack.pop()
            if v in seen:
                return True
            seen.add(v)
            for w, k in adj[v]:
                if k == via:
                    continue
                if w in seen:
                    return True
                stack.append((w, k))
    return False


def random_graph(rng: random.Random, nmax: int = 5, mmax: int = 3) -> AdmissibleGraph:
    n, m = rng.randint(1, nmax), rng.randint(0, mmax)
    out = []
    for v in range(1, n + 1):
        cands = [t for t in range(1, n + 1) if t != v] + [-j for j in range(1, m + 1)]
        k = rng.randint(0, min(len(cands), 3))
        out.append(tuple(rng.sample(cands, k)))
    return AdmissibleGraph(n, m, tuple(out))


def bracket_counterexample():
    """Two forests whose bracket contains a graph with a cycle."""
    return parse_key("n=2;m=2;E=[(1,B1),(1,2),(2,B1),(2,B2)]"), parse_key("n=1;m=2;E=[(1,B1),(1,B2)]")


def forest_suite(count: int = 200, seed: int = 0, nmax: int = 3, mmax: int = 2,
                 emax: int = 4) -> List[CheckResult]:
    rng = random.Random(seed)
    detect = CheckResult("is_forest agrees with cycle search")
    for _ in range(count):
        g = random_graph(rng)
        detect.record(is_forest(g) == (not has_internal_cycle(g)), lambda g=g: str(g))
    closure = CheckResult("d2 maps forests to forests")
    for g in canonical_forests(nmax, mmax, emax):
        image = gd.d2(g)
        closure.record(all(is_forest(h) for h in image.graphs()), lambda g=g: str(g))
    counter = CheckResult("bracket of two forests leaves the forests")
    x, y = bracket_counterexample()
    terms = gd.bracket(x, y)
    counter.record(is_forest(x) and is_forest(y) and any(not is_forest(h) for h in terms.graphs()),
                   lambda: f"[{x}, {y}]")
    return [detect, closure, counter]


def canonical_forests(nmax: int = 3, mmax: int = 2, emax: Optional[int] = 4) -> List[AdmissibleGraph]:
    reps = set()
    for n in range(1, nmax + 1):
        for m in range(mmax + 1):
            for g in enumerate_graphs(n, m, max_edges=emax):
                if is_forest(g):
                    sign, rep = gd.canonical_form(g)
                    if sign:
                        reps.add(rep)
    return sorted(reps, key=canonical_key)


# ---------------------------------------------------------------- cocycle

def total_degree_two(nmax: int = 2, mmax: int = 2) -> List[AdmissibleGraph]:
    return [g for g in canonical_graphs(nmax, mmax) if g.total_degree == 2]


def face_suite(nmax: int = 2, mmax: int = 2) -> CheckResult:
    res = CheckResult("contributing faces = edge contractions + cobracket")
    for g in total_degree_two(nmax, mmax):
        res.record(face_classification_matches(g), lambda g=g: str(g))
    return res
