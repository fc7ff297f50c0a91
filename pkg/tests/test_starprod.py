import random
from fractions import Fraction

import pytest
import sympy as sp

from graphquant import checks
from graphquant import starprod as S
from graphquant.graphs import boundary_only, canonical_key, corolla, parse_key
from graphquant.parsing import parse_poly, parse_polyvector
from graphquant.polyalg import Poly
from graphquant.weights import WeightTable

import oracles as O
from oracles import FROZEN

CONST = parse_polyvector("d1^d2", 2)


@pytest.fixture(scope="module")
def exact3():
    return S.derive_exact_table(3)


def test_exact_table_values():
    t = S.derive_exact_table(2)
    assert t.exact(boundary_only(2)) == FROZEN["W_b02"]
    assert t.exact(corolla(2)) == FROZEN["W_b12"]
    assert t.exact(parse_key("n=2;m=2;E=[(1,B1),(1,B2),(2,B1),(2,B2)]")) == FROZEN["W_wedge_pair"]


def test_moyal_frozen_example(exact3):
    f = parse_poly("x1^2", 2)
    g = parse_poly("x2^2", 2)
    got = S.star(f, g, CONST, 2, exact3)
    assert [O.expr(c) for c in got.coeffs] == [sp.sympify(s) for s in FROZEN["moyal_x1sq_x2sq"]]


@pytest.mark.parametrize("seed", range(4))
def test_star_matches_moyal_by_hand(exact3, seed):
    rng = random.Random(seed)
    c = Fraction(rng.randint(1, 3), rng.randint(1, 2))
    alpha = CONST * c
    f, g = (checks.random_poly(rng, 2, degree=3, terms=4) for _ in range(2))
    want = O.moyal_by_hand(O.expr(f), O.expr(g), sp.Rational(c.numerator, c.denominator), 3)
    assert [O.expr(k) for k in S.star(f, g, alpha, 3, exact3).coeffs] == want
    assert S.star(f, g, alpha, 3, exact3) == S.moyal_oracle(f, g, alpha, 3)


def test_unit_and_coordinates(exact3):
    f = parse_poly("x1^3*x2 + 2*x2", 2)
    one = parse_poly("1", 2)
    assert S.star(f, one, CONST, 2, exact3) == S.FormalSeries(2, [f], Poly(2))
    assert S.star(one, f, CONST, 2, exact3) == S.FormalSeries(2, [f], Poly(2))
    xy = S.star(parse_poly("x1", 2), parse_poly("x2", 2), CONST, 2, exact3)
    assert xy.coeffs == [parse_poly("x1*x2", 2), parse_poly("1", 2), Poly(2)]


def test_swap_flips_odd_orders(exact3):
    rng = random.Random(7)
    f, g = (checks.random_poly(rng, 2, degree=3, terms=4) for _ in range(2))
    fg, gf = S.star(f, g, CONST, 3, exact3), S.star(g, f, CONST, 3, exact3)
    for k in range(4):
        assert fg[k] == (gf[k] if k % 2 == 0 else -gf[k])


@pytest.mark.parametrize("text,d", [
    ("(x1^2 + 1)*d1^d2", 2),
    ("x3*d1^d2 + x1*d2^d3 - x2*d1^d3", 3),
    ("x1*d2^d3 + d1^d2", 3),
])
def test_first_order_is_poisson_bracket(text, d):
    alpha = parse_polyvector(text, d)
    table = S.derive_exact_table(1, d)
    rng = random.Random(d)
    f, g = (checks.random_poly(rng, d, degree=2, terms=3) for _ in range(2))
    C = {idx: O.expr(c) for idx, c in alpha.coeffs.items()}
    got = S.star(f, g, alpha, 1, table)
    assert O.expr(got[1]) == O.poisson(C, O.expr(f), O.expr(g), d)
    assert got[1] == S.PoissonStructure(alpha).bracket(f, g)


def test_exact_associativity_to_third_order(exact3):
    rng = random.Random(11)
    for _ in range(3):
        f, g, h = (checks.random_poly(rng, 2, degree=3, terms=3) for _ in range(3))
        assert S.assoc_residual(f, g, h, CONST * 2, 3, exact3).is_zero()


def test_not_poisson():
    with pytest.raises(S.NotPoisson):
        S.PoissonStructure(parse_polyvector("d1^d2 + x1*d2^d3 + x3*d1^d3", 3))
    with pytest.raises(ValueError):
        S.PoissonStructure(parse_polyvector("d1", 2))


def test_missing_weight():
    with pytest.raises(S.MissingWeight):
        S.star(parse_poly("x1", 2), parse_poly("x2", 2), CONST, 1, WeightTable())


def test_constant_tensor():
    p = S.PoissonStructure(CONST * 3)
    assert p.is_constant()
    assert p.tensor() == [[0, 3], [-3, 0]]
    with pytest.raises(S.NonConstantAlpha):
        S.PoissonStructure(parse_polyvector("x1*d1^d2", 2)).tensor()


def test_formal_series_arithmetic():
    a = S.FormalSeries(2, [Fraction(1), Fraction(2)], Fraction(0))
    b = S.FormalSeries(2, [Fraction(3), Fraction(0), Fraction(1)])
    assert (a * b).coeffs == [3, 6, 1]
    assert (a + b).coeffs == [4, 2, 1]
    assert (a - a).is_zero()
    assert (a * 2).coeffs == [2, 4, 0]
    with pytest.raises(ValueError):
        a + S.FormalSeries(1, [Fraction(1)])
    with pytest.raises(ValueError):
        S.FormalSeries(-1, [Fraction(1)])


def test_star_graph_counts():
    # labeled graphs with n internal vertices of out-degree two on two points
    reps = S.star_graphs(2)
    assert sum(count for _, count in reps) == 6 ** 2
    assert all(g.n == 2 and g.m == 2 for g, _ in reps)


def _synthetic_table(phis, seed):
    rng = random.Random(seed)
    t = WeightTable()
    for phi in phis:
        for g in S.cocycle_graphs(phi):
            if canonical_key(g) not in t.entries:
                t.set_exact(g, Fraction(rng.randint(-5, 5), rng.randint(1, 4)))
    return t


@pytest.mark.parametrize("seed", range(3))
def test_cocycle_equals_face_convolution_for_any_weights(seed):
    phis = checks.total_degree_two(2, 2)
    t = _synthetic_table(phis, seed)
    for phi in phis:
        assert S.cocycle_residual(phi, t)[0] == S.ck_convolution_residual(phi, t)[0], canonical_key(phi)


def test_cocycle_rejects_wrong_degree():
    with pytest.raises(ValueError):
        S.cocycle_residual(corolla(2), WeightTable())
