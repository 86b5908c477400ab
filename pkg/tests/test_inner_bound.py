import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stateamp import inner_bound as ib
from stateamp.model import ChannelParams, derive, gaussian_mi, mmse_given

SMALL = ib.FrontierConfig(beta_points=64, rate_levels=60)

channels = st.builds(
    ChannelParams,
    P=st.floats(0.1, 50.0),
    Q=st.floats(0.5, 20.0),
    N=st.floats(0.2, 5.0),
    sigma_u2=st.floats(0.0, 5.0),
)


def joint_oracle(cp, ip):
    """Rate and distortion from the covariance of the signal model."""
    dp = derive(cp)
    j = ib.scheme_joint(dp, cp, ip)
    rate = gaussian_mi(j, ["U"], ["Y"]) - gaussian_mi(j, ["U"], ["Vt"])
    _, d = mmse_given(j, "S", ["Y", "U"])
    return rate, d


def test_statistics_match_joint(low_channel):
    cp, dp = low_channel
    ip = ib.InnerParams(alpha=0.6, beta=0.4)
    stats = ib.scheme_statistics(dp, cp, ip)
    j = ib.scheme_joint(dp, cp, ip)
    assert np.allclose(stats.r, j.block("S", ["Y", "U"]).ravel(), rtol=1e-13)
    assert np.allclose(stats.Sigma, j.block(["Y", "U"]), rtol=1e-13)


@settings(max_examples=80, deadline=None)
@given(channels, st.floats(0.0, 2.0), st.floats(0.02, 1.0))
def test_closed_forms_match_covariance_oracle(cp, alpha, beta):
    dp = derive(cp)
    pt = ib.evaluate(dp, cp, ib.InnerParams(alpha, beta))
    rate, d = joint_oracle(cp, ib.InnerParams(alpha, beta))
    assert pt.distortion == pytest.approx(d, rel=1e-8, abs=1e-10)
    # gaussian_mi clips each information at zero; compare the difference only when unclipped
    if pt.raw_rate > 1e-6:
        assert pt.raw_rate == pytest.approx(rate, rel=1e-7, abs=1e-9)


def test_evaluate_example(low_channel):
    cp, dp = low_channel
    pt = ib.evaluate(dp, cp, ib.InnerParams(0.5, 0.5))
    rate, d = joint_oracle(cp, ib.InnerParams(0.5, 0.5))
    assert pt.rate == pytest.approx(rate, rel=1e-12)
    assert pt.distortion == pytest.approx(d, rel=1e-12)
    assert pt.decodable and not pt.degenerate


def test_beta_zero_alpha_one_distortion(low_channel):
    cp, dp = low_channel
    pt = ib.evaluate(dp, cp, ib.InnerParams(1.0, 0.0))
    assert pt.distortion == pytest.approx(dp.Np * cp.N / (dp.Np + cp.N), abs=1e-12)
    assert pt.rate == 0.0
    assert not pt.decodable


def test_degenerate_point_uses_y_only(low_channel):
    cp, dp = low_channel
    pt = ib.evaluate(dp, cp, ib.InnerParams(0.0, 0.0))
    assert pt.degenerate and pt.rate == 0.0
    j = ib.scheme_joint(dp, cp, ib.InnerParams(0.0, 0.0))
    assert pt.distortion == pytest.approx(mmse_given(j, "S", ["Y"])[1], rel=1e-12)


def test_costa_alpha():
    cp = ChannelParams(10.0, 1.0, 2.0, 1.0)
    assert ib.costa_alpha(cp, 0.5) == pytest.approx(5.0 / 7.0)


def test_max_rate_alpha_is_maximiser(low_channel):
    cp, dp = low_channel
    beta = 0.7
    a_star = float(ib.max_rate_alpha(dp, cp, beta))
    alphas = np.linspace(0, 2, 20001)
    r = ib.raw_rate(dp, cp, alphas, beta)
    assert float(ib.raw_rate(dp, cp, a_star, beta)) >= r.max() - 1e-12


def test_beta_one_max_rate_formula(low_channel):
    cp, dp = low_channel
    pt = ib.evaluate(dp, cp, ib.InnerParams(float(ib.max_rate_alpha(dp, cp, 1.0)), 1.0))
    assert pt.rate == pytest.approx(0.5 * math.log2(1 + cp.P / (cp.N + dp.Np)), abs=1e-12)


def test_u_useless_alpha_zero_weight(low_channel):
    cp, dp = low_channel
    beta = 0.5
    a = ib.u_useless_alpha(dp, cp, beta)
    j = ib.scheme_joint(dp, cp, ib.InnerParams(a, beta))
    coef, _ = mmse_given(j, "S", ["Y", "U"])
    assert abs(coef[1]) < 1e-10


def test_u_useless_reduces_to_costa_without_observation_noise():
    cp = ChannelParams(5.0, 3.0, 1.0, 0.0)
    dp = derive(cp)
    for beta in (0.1, 0.5, 1.0):
        assert ib.u_useless_alpha(dp, cp, beta) == pytest.approx(ib.costa_alpha(cp, beta), abs=1e-12)


def test_u_useless_none_when_denominator_nonpositive():
    cp = ChannelParams(100.0, 1.0, 0.01, 5.0)
    dp = derive(cp)
    assert ib.u_useless_alpha(dp, cp, 0.0) is None


def test_feasible_interval_edges(low_channel):
    cp, dp = low_channel
    beta, rate = 0.6, 0.5
    lo, hi = ib.feasible_alpha_interval(dp, cp, beta, rate)
    assert float(ib.raw_rate(dp, cp, float(lo), beta)) == pytest.approx(rate, abs=1e-9)
    assert float(ib.raw_rate(dp, cp, float(hi), beta)) == pytest.approx(rate, abs=1e-9)
    lo, hi = ib.feasible_alpha_interval(dp, cp, beta, 5.0)
    assert np.isnan(lo) and np.isnan(hi)


def test_best_alpha_meets_rate(low_channel):
    cp, dp = low_channel
    alpha, dist, achieved = ib.best_alpha_at_rate(dp, cp, 0.8, 0.6)
    assert achieved >= 0.6 - 1e-9
    grid = np.linspace(*[float(v) for v in ib.feasible_alpha_interval(dp, cp, 0.8, 0.6)], 20001)
    assert dist <= ib.distortion(dp, cp, grid, 0.8).min() + 1e-10


def test_pareto_prune_example():
    r = [0.0, 0.5, 0.5, 1.0, 0.8]
    d = [1.0, 1.2, 1.5, 2.0, 2.5]
    assert list(ib.pareto_prune(r, d)) == [0, 1, 3]


@pytest.fixture(scope="module")
def low_frontier():
    cp = ChannelParams(7.7, 10.0, 1.0, 1.0)
    dp = derive(cp)
    return cp, dp, ib.frontier(dp, cp, SMALL)


def test_frontier_monotone_and_decodable(low_frontier):
    _, _, pts = low_frontier
    R = np.array([p.rate for p in pts])
    D = np.array([p.distortion for p in pts])
    assert np.all(np.diff(R) >= 0)
    assert np.all(np.diff(D) >= -1e-10)
    assert all(p.decodable for p in pts)


def test_frontier_reaches_max_rate(low_frontier):
    cp, dp, pts = low_frontier
    assert pts[-1].rate == pytest.approx(0.5 * math.log2(1 + cp.P / (cp.N + dp.Np)), abs=1e-12)


def test_frontier_dominates_costa_points(low_frontier):
    cp, dp, pts = low_frontier
    R = np.array([p.rate for p in pts])
    D = np.array([p.distortion for p in pts])
    for beta in np.linspace(0.05, 1.0, 20):
        q = ib.evaluate(dp, cp, ib.InnerParams(ib.costa_alpha(cp, beta), beta))
        ok = R >= q.rate - 1e-12
        assert D[ok].min() <= q.distortion + 1e-9


def test_frontier_zero_power():
    cp = ChannelParams(0.0, 2.0, 1.0, 1.0)
    dp = derive(cp)
    pts = ib.frontier(dp, cp, SMALL)
    assert len(pts) == 1 and pts[0].rate == 0.0


def test_convexify_is_convex(low_frontier):
    _, _, pts = low_frontier
    hull = ib.convexify(pts)
    R = np.array([p.rate for p in hull])
    D = np.array([p.distortion for p in hull])
    slopes = np.diff(D) / np.diff(R)
    assert np.all(np.diff(slopes) >= -1e-9)
    assert hull[0] is pts[0] and hull[-1] is pts[-1]


def test_inner_params_validation():
    with pytest.raises(ValueError):
        ib.InnerParams(alpha=0.5, beta=1.5)
    with pytest.raises(ValueError):
        ib.InnerParams(alpha=-0.1, beta=0.5)
