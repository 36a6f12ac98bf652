import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from supereff.adaptive_target import (
    FLAT,
    TargetContext,
    WeightingFunction,
    clamp_gap,
    clamp_target,
    construct_weights,
    heterogeneity_margin,
    tolerance_for,
    verify_weighting,
)
from supereff.distributions import EffectDistribution as E, mean, support_bounds
from supereff.errors import DegenerateEffects, TargetOutOfRange, UnattainableBoundary

CTX = TargetContext(1.0, 1.0, 1.0)
finite = st.floats(-1e6, 1e6, allow_nan=False)
contexts = st.builds(TargetContext, st.floats(-100, 100), st.floats(1e-3, 50), st.just(1.0))


def test_margins():
    assert heterogeneity_margin(E.two_point(0, 2, 0.5)) == 1.0
    assert heterogeneity_margin(E.uniform(0, 1)) == 0.5
    assert heterogeneity_margin(E.scaled_beta(2, 3, 0, 1)) == pytest.approx(0.4, abs=1e-15)
    with pytest.raises(DegenerateEffects):
        heterogeneity_margin(E.degenerate(2.0))
    assert heterogeneity_margin(E.degenerate(2.0), allow_zero=True) == 0.0


@pytest.mark.parametrize("x, want", [(1.5, 1.5), (2.5, 2.0), (-0.5, 0.0)])
def test_clamp_cases(x, want):
    assert clamp_target(x, CTX) == want


@pytest.mark.parametrize("x, want", [(1.5, 0.0), (2.5, 0.5), (-3.0, 3.0)])
def test_gap_cases(x, want):
    assert clamp_gap(x, CTX) == want


def test_clamp_requires_positive_margin():
    with pytest.raises(DegenerateEffects):
        clamp_target(0.3, TargetContext(0.0, 0.0, 1.0))
    assert clamp_target(0.3, TargetContext(0.0, 0.0, 1.0), allow_zero=True) == 0.0


@given(finite, contexts)
def test_clamp_band_and_idempotence(x, ctx):
    y = clamp_target(x, ctx)
    lo, hi = ctx.band
    assert lo <= y <= hi or y == x
    assert clamp_target(y, ctx) == y
    assert (y == x) == (abs(x - ctx.mu) <= ctx.c)


@given(finite, finite, contexts)
def test_clamp_monotone(x, y, ctx):
    a, b = sorted((x, y))
    assert clamp_target(a, ctx) <= clamp_target(b, ctx)


def test_clamp_vectorised_matches_scalar():
    x = np.linspace(-6, 8, 4001)
    np.testing.assert_array_equal(clamp_target(x, CTX), [clamp_target(float(v), CTX) for v in x])
    np.testing.assert_array_equal(clamp_gap(x, CTX), [clamp_gap(float(v), CTX) for v in x])


def test_gap_identity_exact_on_dyadic_grid():
    ctx = TargetContext(1.0, 1.0, 1.0)
    x = ctx.mu - 5 * ctx.c + np.arange(10 * 1024 + 1) / 1024.0
    np.testing.assert_array_equal(clamp_gap(x, ctx), np.abs(x - clamp_target(x, ctx)))


@pytest.mark.parametrize("mu, c", [(0.1, 0.3), (-2.7, 1.9), (1e3, 1e-2)])
def test_gap_identity_general_grid(mu, c):
    ctx = TargetContext(mu, c, 1.0)
    x = np.linspace(mu - 5 * c, mu + 5 * c, 20001)
    diff = np.abs(clamp_gap(x, ctx) - np.abs(x - clamp_target(x, ctx)))
    assert diff.max() <= 4 * np.spacing(abs(mu) + 5 * c)


@pytest.mark.parametrize("dist", [E.two_point(0, 2, 0.5), E.uniform(0, 1), E.scaled_beta(2, 3, 0, 1)], ids=lambda d: d.kind)
def test_target_inside_support(dist):
    ctx = TargetContext(mean(dist), heterogeneity_margin(dist), 1.0)
    lo, hi = support_bounds(dist)
    out = clamp_target(np.linspace(-50, 50, 1001), ctx)
    assert out.min() >= lo and out.max() <= hi


def test_weights_flat_at_mean():
    d = E.two_point(0, 2, 0.5)
    w = construct_weights(d, 1.0)
    assert w.direction == "flat" and w.lam == 0.0
    assert verify_weighting(d, w, 1.0) == 0.0
    assert verify_weighting(E.uniform(0, 1), FLAT, 0.5) == pytest.approx(0.0, abs=1e-12)


def test_two_point_ratio_three():
    d = E.two_point(0, 2, 0.5)
    w = construct_weights(d, 1.5)
    assert w(2.0) / w(0.0) == pytest.approx(3.0, rel=1e-12)
    assert abs(verify_weighting(d, w, 1.5)) <= 1e-12
    explicit = WeightingFunction("up", 2 / 3, 1.5)
    assert abs(verify_weighting(d, explicit, 1.5)) <= 1e-12


def test_uniform_three_quarters():
    d = E.uniform(0, 1)
    w = construct_weights(d, 0.75)
    assert abs(verify_weighting(d, w, 0.75)) <= 1e-9
    # independent route: weighted mean in closed form for the up-tilt on U(0, 1)
    lam, t = w.lam, w.threshold
    num = (1 - lam) * 0.5 + lam * (1 - t * t) / 2
    den = (1 - lam) + lam * (1 - t)
    assert num / den == pytest.approx(0.75, abs=1e-9)


def test_wrong_lambda_detected():
    d = E.two_point(0, 2, 0.5)
    assert abs(verify_weighting(d, WeightingFunction("up", 0.5, 1.5), 1.5)) > 1e-3


def test_out_of_range_and_boundaries():
    d = E.uniform(0, 1)
    with pytest.raises(TargetOutOfRange):
        construct_weights(d, 1.01)
    with pytest.raises(UnattainableBoundary):
        construct_weights(d, 1.0, strict=True)
    w = construct_weights(d, 1.0)
    assert w.lam == 1.0 and abs(verify_weighting(d, w, 1.0)) <= 1e-9
    tp = construct_weights(E.two_point(0, 2, 0.5), 2.0)
    assert (tp.direction, tp.lam, tp.threshold) == ("up", 1.0, 2.0)


@pytest.mark.parametrize("dist", [
    E.two_point(0, 2, 0.5), E.two_point(-1, 4, 0.15), E.uniform(0, 1), E.uniform(-3, 2),
    E.scaled_beta(2, 3, 0, 1), E.scaled_beta(0.6, 1.8, -1, 1),
], ids=lambda d: f"{d.kind}{d.params}")
def test_weighting_soundness(dist):
    mu = mean(dist)
    c = heterogeneity_margin(dist)
    lo, hi = support_bounds(dist)
    grid = np.linspace(lo, hi, 401)
    for m in np.linspace(mu - c, mu + c, 21):
        w = construct_weights(dist, float(m))
        assert abs(verify_weighting(dist, w, float(m))) <= tolerance_for(dist)
        assert np.all(np.asarray(w(grid)) >= 0)
        assert 0.0 <= w.lam <= 1.0


@given(st.floats(0.01, 0.99))
def test_two_point_weighting_any_target(q):
    d = E.two_point(-1.0, 3.0, 0.25)
    mu, c = mean(d), heterogeneity_margin(d)
    m = mu - c + 2 * c * q
    assume(m != mu)
    w = construct_weights(d, m)
    assert abs(verify_weighting(d, w, m)) <= 1e-12
