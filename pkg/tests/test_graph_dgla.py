import random

import pytest

from graphquant import checks
from graphquant import graph_dgla as gd
from graphquant.graphs import boundary_only, corolla, enumerate_graphs, is_forest, parse_key

from oracles import FROZEN
from worked_examples import CHAINED_WEDGES, WEDGE

b02 = boundary_only(2)
wedge = corolla(2)


def test_b02_bracket_vanishes():
    assert gd.bracket(b02, b02).is_zero()
    assert gd.d1(b02).is_zero()


def test_circ_into_single_boundary_vertex_is_identity():
    psi = parse_key("n=1;m=2;E=[(1,B1),(1,B2)]")
    assert gd.circ_i(psi, boundary_only(1), 1) == gd.GraphSum.of(psi)


def test_circ_b02_b02_has_cancelling_terms():
    for i in (1, 2):
        assert gd.circ_i(b02, b02, i) == gd.GraphSum.of(boundary_only(3))
    assert gd.circ(b02, b02).is_zero()


def test_vertex_split_of_wedge_has_four_terms():
    split = gd.d2_i(wedge, 1)
    assert len(list(split.items())) == 4
    assert all(c in (1, -1) for _, c in split.items())


def test_d2_of_boundary_only_graph():
    assert gd.d2(boundary_only(3)).is_zero()


def test_contraction_of_chained_wedges():
    image = gd.d2_star(parse_key(CHAINED_WEDGES))
    assert len(list(image.items())) == 1
    assert gd.d2_star(corolla(3)).is_zero()


@pytest.mark.parametrize("key", checks.POOL_KEYS)
def test_bidegree_additivity(key):
    x = parse_key(key)
    for y in checks.identity_pool():
        for g, _ in gd.circ(x, y).items():
            assert g.bidegree == (x.p + y.p, x.q + y.q)


def test_d1_raises_first_degree():
    for g in enumerate_graphs(1, 2):
        for h, _ in gd.d1(g).items():
            assert h.bidegree == (g.p + 1, g.q)


def test_pairing_orthonormal_and_bilinear():
    g1, g2 = corolla(2), parse_key("n=1;m=2;E=[(1,B1)]")
    assert gd.pairing(g1, g1) == 1
    assert gd.pairing(g1, g2) == 0
    x = gd.GraphSum.from_pairs([(g1, 2), (g2, 3)])
    y = gd.GraphSum.from_pairs([(g1, 5), (g2, -1)])
    assert gd.pairing(x, y) == 2 * 5 + 3 * -1


def test_edge_order_twin_is_negative():
    twin = parse_key("n=1;m=2;E=[(1,B2),(1,B1)]")
    assert gd.GraphSum.of(twin).reduce() == gd.GraphSum.of(wedge, -1)


def test_text_round_trip():
    x = gd.bracket(parse_key(CHAINED_WEDGES), corolla(2))
    assert gd.GraphSum.from_text(x.to_text()) == x


def test_antisymmetry_random_pairs():
    rng = random.Random(0)
    pool = checks.identity_pool()
    for _ in range(30):
        x, y = rng.choice(pool), rng.choice(pool)
        sign = -1 if (x.total_degree * y.total_degree) % 2 else 1
        assert gd.bracket(x, y) == gd.bracket(y, x).scale(-sign)


def test_signed_leibniz_holds_and_unsigned_fails():
    results = {r.name: r for r in checks.dgla_suite(graphs=[], pool=checks.identity_pool())}
    assert all(r.passed for r in results.values())
    assert len(checks.unsigned_leibniz_failures()) == FROZEN["unsigned_leibniz_failures"]


def test_forest_counterexample_term():
    x, y = checks.bracket_counterexample()
    assert is_forest(x) and is_forest(y)
    triangle = parse_key("n=3;m=3;E=[(1,3),(1,2),(2,B3),(2,3),(3,B1),(3,B2)]")
    assert not is_forest(triangle)
    sign, rep = gd.canonical_form(triangle)
    assert sign != 0
    assert gd.bracket(x, y).coefficient(rep) != 0


def test_adjointness_small():
    for r in checks.adjointness_suite(nmax=1, mmax=2):
        assert r.passed, r.line()
