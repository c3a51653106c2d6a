import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fif import evaluate_many, scalar
from fif.errors import (
    BranchOutOfRange,
    ConditionUnattainable,
    DegenerateInterval,
    DerivativeVanishes,
    InterpolationConditions,
    LengthMismatch,
    NonIncreasingNodes,
    NotContractive,
    NotInvertibleInY,
    NotMonotone,
    OutsideValidityStrip,
    ScalingOutOfRange,
)
from fif.examples import get_example
from fif.ifs import (
    AffineBranch,
    AffineMap1D,
    GeneralAffineIFS2D,
    InterpolationIFS,
    Interval,
    apply_branch,
    ifs_from_affine_maps,
    ifs_from_analytic,
    ifs_from_data,
    invert_branch,
    validate,
)

E = math.e


def tent(p):
    return ifs_from_data([(0, 0), (1, 1), (2, 0)], [p, p])


def test_tent_coefficients():
    ifs = tent(0.3)
    assert [(L.a, L.b) for L in ifs.L] == [(0.5, 0.0), (0.5, 1.0)]
    (c1, d1, e1), (c2, d2, e2) = [(F.c, F.d, F.e) for F in ifs.F]
    assert (c1, d1, e1) == pytest.approx((0.5, 0.3, 0.0))
    assert (c2, d2, e2) == pytest.approx((-0.5, 0.3, 1.0))


def test_four_branch_conditions():
    nodes = [(0, 0.25), (0.25, 0), (0.5, -0.25), (0.75, 0.5), (1, 0.25)]
    ifs = ifs_from_data(nodes, [0.25] * 4)
    assert ifs.N == 4
    for n, F in enumerate(ifs.F, start=1):
        assert F.value(0, 0.25) == pytest.approx(nodes[n - 1][1], abs=1e-15)
        assert F.value(1, 0.25) == pytest.approx(nodes[n][1], abs=1e-15)


def test_validate_tent():
    rep = validate(tent(0.3))
    assert rep.valid
    assert rep.M_bound == pytest.approx(0.5)
    assert rep.s_bound == pytest.approx(0.3)
    assert all(rep.conditions_abc[k] for k in "abc")
    assert rep.metric_contraction < 1


def test_validate_weierstrass():
    rep = validate(get_example("weierstrass").ifs)
    assert rep.s_bound == pytest.approx(0.5)
    assert rep.M_bound == pytest.approx(math.pi)
    assert rep.valid


def test_single_branch_warns():
    rep = validate(ifs_from_data([(0, 0), (1, 1)], [0.5]))
    assert rep.warnings and math.isinf(rep.metric_e)


def test_constructor_errors():
    with pytest.raises(ScalingOutOfRange):
        ifs_from_data([(0, 0), (1, 1)], [1.2])
    with pytest.raises(NonIncreasingNodes):
        ifs_from_data([(0, 0), (1, 1), (1, 2)], [0.1, 0.1])
    with pytest.raises(LengthMismatch):
        ifs_from_data([(0, 0), (1, 1), (2, 2)], [0.1])
    with pytest.raises(DegenerateInterval):
        Interval(1.0, 1.0)


def test_conditions_checked_at_construction():
    L = (AffineMap1D(0.5, 0.0), AffineMap1D(0.5, 0.5))
    F = (AffineBranch(1.0, 0.1, 0.0), AffineBranch(1.0, 0.1, 0.3))
    with pytest.raises(InterpolationConditions):
        InterpolationIFS(((0, 0), (0.5, 0.5), (1, 1)), L, F)


def test_validate_raises():
    bad = InterpolationIFS(((0, 0), (1, 0), (2, 0)),
                           (AffineMap1D(0.5, 0.0), AffineMap1D(0.5, 1.0)),
                           (AffineBranch(0.0, 0.0, 0.0), AffineBranch(0.0, 0.5, 0.0)))
    with pytest.raises(NotInvertibleInY):
        validate(bad)
    assert validate(bad, require_invertible=False).invertible_in_y == (False, True)


def test_apply_branch_parabola():
    ifs = get_example("parabola").ifs
    assert apply_branch(ifs, 1, (1, 1)) == pytest.approx((0.5, 0.25))
    assert apply_branch(ifs, 2, (0, 0)) == pytest.approx((0.5, 0.25))
    with pytest.raises(BranchOutOfRange):
        apply_branch(ifs, 3, (0, 0))


@pytest.mark.parametrize("eid", ["parabola", "tent-family", "four-node", "weierstrass", "exp"])
def test_first_branch_fixes_first_node(eid):
    ifs = get_example(eid).ifs
    x, y = apply_branch(ifs, 1, (ifs.x0, ifs.y0))
    assert x == pytest.approx(ifs.x0, abs=1e-14)
    assert y == pytest.approx(ifs.y0, abs=1e-12)


def test_invert_weierstrass_branch():
    xi = 0.5
    ifs = get_example("weierstrass", xi=xi).ifs
    for x, y in [(0.1, 0.3), (0.37, -1.2), (0.5, 0.0)]:
        X, Y = invert_branch(ifs, 1, (x, y))
        assert X == pytest.approx(2 * x)
        assert Y == pytest.approx((y - math.sin(2 * math.pi * x)) / xi, abs=1e-13)


def test_exp_branches():
    ifs = get_example("exp").ifs
    for x, y in [(1.0, 1.5), (1.3, 4.0), (2.0, 7.0)]:
        X1, Y1 = apply_branch(ifs, 1, (x, y))
        X2, Y2 = apply_branch(ifs, 2, (x, y))
        assert (X1, Y1) == pytest.approx((x / 2 + 0.5, math.sqrt(E * y)), rel=1e-13)
        assert (X2, Y2) == pytest.approx((x / 2 + 1, E * math.sqrt(y)), rel=1e-13)
    # (2, e^2) is the fixed point of w_2
    assert invert_branch(ifs, 2, (2, E**2)) == pytest.approx((2, E**2), rel=1e-13)
    with pytest.raises(OutsideValidityStrip):
        invert_branch(ifs, 1, (1.2, -1.0))


def test_analytic_sqrt_graph():
    ifs = ifs_from_analytic(scalar.power(0.5), (1, 4))
    x = np.linspace(1, 4, 256)
    y, err = evaluate_many(ifs, x)
    actual = np.abs(y - np.sqrt(x))
    assert np.max(actual) <= 1e-8
    assert np.all(actual <= err + 1e-15)


def test_analytic_shear_needed_for_steep_exponential():
    ifs = ifs_from_analytic(scalar.exp(3.0), (0, 1))
    assert validate(ifs).s_bound < 1
    assert ifs.F[0].shear > 0
    with pytest.raises(ConditionUnattainable):
        ifs_from_analytic(scalar.exp(3.0), (0, 1), max_shear_exp=2)


def test_analytic_errors():
    with pytest.raises(NotMonotone):
        ifs_from_analytic(scalar.sine(), (0, 3))
    with pytest.raises(DerivativeVanishes):
        ifs_from_analytic(scalar.polynomial([0, 0, 0, 1], (-1, 1)), (-1, 1))


def test_affine_maps_derive_nodes():
    ifs = ifs_from_affine_maps([(0.5, 0, 0.5, 0.3, 0), (0.5, 1, -0.5, 0.3, 1)])
    np.testing.assert_allclose(ifs.xs, [0, 1, 2], atol=1e-15)
    np.testing.assert_allclose(ifs.ys, [0, 1, 0], atol=1e-15)


def test_general_affine_certificate():
    gifs = get_example("c1-general-affine").ifs
    ok, _, norm = gifs.certify()
    assert ok and norm < 1
    expanding = GeneralAffineIFS2D([[[1.5, 0], [0, 0.2]]], [[0, 0]])
    with pytest.raises(NotContractive):
        expanding.require_contractive()


# -- properties over random node sets -------------------------------------------

@st.composite
def node_sets(draw):
    n = draw(st.integers(2, 6))
    gaps = draw(st.lists(st.floats(0.05, 2.0), min_size=n, max_size=n))
    x0 = draw(st.floats(-5, 5))
    xs = x0 + np.concatenate([[0.0], np.cumsum(gaps)])
    ys = draw(st.lists(st.floats(-3, 3), min_size=n + 1, max_size=n + 1))
    d = draw(st.lists(st.floats(-0.9, 0.9).filter(lambda v: abs(v) > 0.01), min_size=n, max_size=n))
    return list(zip(xs, ys)), d


@settings(max_examples=50, deadline=None)
@given(node_sets())
def test_random_nodes_conditions_and_interpolation(data):
    nodes, d = data
    ifs = ifs_from_data(nodes, d)
    rep = validate(ifs)
    assert rep.valid
    xs = np.array([p[0] for p in nodes])
    y, _ = evaluate_many(ifs, xs)
    np.testing.assert_allclose(y, [p[1] for p in nodes], atol=1e-12 * (1 + np.max(np.abs(y))))


@settings(max_examples=50, deadline=None)
@given(node_sets(), st.floats(0, 1), st.floats(-4, 4))
def test_random_nodes_inverse_consistency(data, t, y):
    nodes, d = data
    ifs = ifs_from_data(nodes, d)
    for i in range(ifs.N):
        L = ifs.L[i]
        X = L(ifs.x0 + t * ifs.span)
        ystar = ifs.F[i].solve_y(L.inverse(X), y)
        assert ifs.F[i].value(L.inverse(X), ystar) == pytest.approx(y, abs=1e-12 * (1 + abs(y)))
        u, v = ifs.inverse(i, *ifs.forward(i, ifs.x0 + t * ifs.span, y))
        assert (u, v) == pytest.approx((ifs.x0 + t * ifs.span, y), abs=1e-9)


BRANCHED = ["parabola", "weierstrass", "exp", "tent-family", "four-node-asym"]


@pytest.mark.parametrize("eid", BRANCHED)
def test_partials_match_finite_differences(eid):
    ifs = get_example(eid).ifs
    rng = np.random.default_rng(3)
    x = ifs.x0 + rng.uniform(0.05, 0.95, 20) * ifs.span
    lo, hi = ifs.y_extent
    y = rng.uniform(lo, hi, 20)
    h = 1e-6
    for F in ifs.F:
        fx = (F.value(x + h, y) - F.value(x - h, y)) / (2 * h)
        fy = (F.value(x, y + h) - F.value(x, y - h)) / (2 * h)
        np.testing.assert_allclose(F.dfdx(x, y), fx, rtol=1e-5, atol=1e-6)
        np.testing.assert_allclose(F.dfdy(x, y), fy, rtol=1e-5, atol=1e-6)


@pytest.mark.parametrize("eid", BRANCHED)
def test_branch_inverse_consistency(eid):
    ifs = get_example(eid).ifs
    rng = np.random.default_rng(4)
    lo, hi = ifs.y_extent
    for i, (L, F) in enumerate(zip(ifs.L, ifs.F)):
        X = L(ifs.x0 + rng.uniform(0, 1, 30) * ifs.span)
        Y = F.value(L.inverse(X), rng.uniform(lo, hi, 30))
        ystar = F.solve_y(L.inverse(X), Y)
        np.testing.assert_allclose(F.value(L.inverse(X), ystar), Y, rtol=1e-12, atol=1e-12)
