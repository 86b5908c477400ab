import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from stateamp import inner_bound as ib
from stateamp import outer_bounds as ob
from stateamp.model import ChannelParams, GaussianJoint, derive, mmse_given

channels = st.builds(
    ChannelParams,
    P=st.floats(0.1, 50.0),
    Q=st.floats(0.5, 20.0),
    N=st.floats(0.2, 5.0),
    sigma_u2=st.floats(0.05, 5.0),
)

# Literal transcriptions of the bound expressions as usually written (log base 2).
P_, Q_, N_, s_, Nb_, rb_, R_ = sp.symbols("P Q N s Nbar rbar R", positive=True)
LAM = Q_ / (Q_ + s_)
ES = Q_ * Nb_ * s_ / (Q_ * Nb_ + Q_ * s_ + Nb_ * s_)
PARTITION_R = sp.log((Q_ + s_) * (P_ + N_ + ES) - rb_**2, 2) / 2 - sp.log((Q_ + s_) * (N_ - Nb_), 2) / 2
PARTITION_D = (1 + 2 ** (2 * R_) * Q_ * (Nb_ + s_) * (N_ - Nb_) / (Nb_ * s_ * (P_ + Q_ + N_ + 2 * LAM * rb_))) * ES
QP = Q_**2 / (Q_ + s_)
NP = Q_ * s_ / (Q_ + s_)
CORR_R = sp.log(s_ * (N_ + P_ + Q_) + Q_ * (N_ + P_) - rb_**2, 2) / 2 - sp.log((Q_ + s_) * (N_ + NP), 2) / 2
CORR_ARG = QP * (N_ + NP) / (P_ + Q_ + N_ + 2 * LAM * rb_) * 2 ** (2 * R_)
X = sp.Symbol("x", nonnegative=True)
F_LIT = (sp.sqrt(X) - sp.sqrt(NP / QP) * sp.sqrt(QP - X)) ** 2


def subs(expr, cp, **kw):
    vals = {P_: cp.P, Q_: cp.Q, N_: cp.N, s_: cp.sigma_u2}
    vals.update({sym: v for sym, v in ((Nb_, kw.get("nbar")), (rb_, kw.get("rbar")), (R_, kw.get("rate")))
                 if v is not None})
    return float(expr.subs(vals).evalf(30))


@settings(max_examples=25, deadline=None)
@given(channels, st.floats(0.01, 0.99), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_partition_matches_literal_form(cp, nfrac, rfrac, rate):
    dp = derive(cp)
    nbar = nfrac * cp.N
    rbar = rfrac * math.sqrt(cp.P * (cp.Q + cp.sigma_u2))
    assert float(ob.partition_rate_bound(cp, nbar, rbar)) == pytest.approx(subs(PARTITION_R, cp, nbar=nbar, rbar=rbar),
                                                                     rel=1e-10, abs=1e-12)
    assert float(ob.partition_dist_bound(cp, dp, nbar, rbar, rate)) == pytest.approx(
        subs(PARTITION_D, cp, nbar=nbar, rbar=rbar, rate=rate), rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(channels, st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_corr_matches_literal_form(cp, rfrac, rate):
    dp = derive(cp)
    rbar = rfrac * math.sqrt(cp.P * (cp.Q + cp.sigma_u2))
    assert float(ob.corr_rate_bound(cp, dp, rbar)) == pytest.approx(subs(CORR_R, cp, rbar=rbar), rel=1e-10, abs=1e-12)
    arg = subs(CORR_ARG, cp, rbar=rbar, rate=rate)
    assert float(ob._corr_arg(cp, dp, rbar, rate)) == pytest.approx(arg, rel=1e-12)
    if arg <= dp.Qp:
        lit = subs(F_LIT.subs(X, arg), cp)
        x0 = ob.f_threshold(dp)
        expected = 0.0 if arg <= x0 else lit
        assert float(ob.f_func(dp, arg)) == pytest.approx(expected, rel=1e-9, abs=1e-11)


@settings(max_examples=50, deadline=None)
@given(channels, st.floats(0.0, 1.0))
def test_es_is_genie_mmse(cp, nfrac):
    nbar = nfrac * cp.N
    Q, s = cp.Q, cp.sigma_u2
    # (S, V = S + U, S + Zbar)
    j = GaussianJoint([[Q, Q, Q], [Q, Q + s, Q], [Q, Q, Q + nbar]], names=("S", "V", "G"))
    if nbar == 0.0:
        assert float(ob.es(cp, nbar)) == 0.0
        return
    _, d = mmse_given(j, "S", ["V", "G"])
    assert float(ob.es(cp, nbar)) == pytest.approx(d, rel=1e-12, abs=1e-12)


def test_partition_continuous_at_zero_partition(low_channel):
    cp, dp = low_channel
    rb = 1.3
    d0 = float(ob.partition_dist_bound(cp, dp, 0.0, rb, 0.4))
    d_eps = float(ob.partition_dist_bound(cp, dp, 1e-9, rb, 0.4))
    assert d0 == pytest.approx(d_eps, rel=1e-7)
    assert d0 == pytest.approx(2 ** 0.8 * cp.Q * cp.N / (cp.P + cp.Q + cp.N + 2 * dp.lam * rb), rel=1e-12)


def test_partition_limit_large_observation_noise():
    # As sigma_u2 grows the encoder learns nothing and E_S tends to Q Nbar / (Q + Nbar)
    cp = ChannelParams(5.0, 2.0, 1.0, 1e8)
    nbar = 0.5
    assert float(ob.es(cp, nbar)) == pytest.approx(2.0 * 0.5 / 2.5, rel=1e-6)


def test_f_endpoints(low_channel):
    _, dp = low_channel
    assert float(ob.f_func(dp, ob.f_threshold(dp))) == 0.0
    assert float(ob.f_func(dp, dp.Qp)) == dp.Qp
    assert float(ob.f_func(dp, 0.0)) == 0.0


def test_f_convex_nondecreasing(low_channel):
    _, dp = low_channel
    x = np.linspace(0, dp.Qp, 10**4)
    y = ob.f_func(dp, x)
    assert np.all(np.diff(y) >= -1e-12)
    assert np.all(np.diff(y, 2) >= -1e-9)


def test_rate_limits(low_channel):
    cp, dp = low_channel
    assert ob.partition_rate_limit(cp) == pytest.approx(0.5 * math.log2(1 + cp.P / cp.N))
    assert ob.corr_rate_limit(cp, dp) == pytest.approx(0.5 * math.log2(1 + cp.P / (cp.N + dp.Np)), rel=1e-12)


def test_envelopes_nan_outside_region(low_channel):
    cp, dp = low_channel
    top = ob.corr_rate_limit(cp, dp)
    d3, _ = ob.corr_lower(cp, dp, [top + 0.01])
    assert np.isnan(d3[0])
    d2 = ob.partition_lower(cp, dp, [ob.partition_rate_limit(cp) + 0.01])
    assert np.isnan(d2[0])


def test_envelopes_nondecreasing(low_channel):
    cp, dp = low_channel
    rates = ob.rate_grid(cp, dp, 200)
    c2 = ob.partition_envelope(cp, dp, rates, n_nbar=256)
    c3 = ob.corr_envelope(cp, dp, rates)
    assert np.all(np.diff(c2.dists) >= -1e-9)
    assert np.all(np.diff(c3.dists) >= -1e-12)
    assert c3.n_clamped == 0


def test_corr_best_rbar_beats_grid(low_channel):
    cp, dp = low_channel
    rate = 0.7
    d, _ = ob.corr_lower(cp, dp, [rate])
    rb = np.linspace(0, math.sqrt(cp.P * (cp.Q + cp.sigma_u2)), 20001)
    vals = ob.corr_point(cp, dp, rb, rate)
    assert d[0] <= np.nanmin(vals) + 1e-12


def test_inner_points_respect_bounds(low_channel):
    cp, dp = low_channel
    pts = ib.frontier(dp, cp, ib.FrontierConfig(48, 40))
    lb = ob.combined_lower(cp, dp, [p.rate for p in pts], n_nbar=256)
    assert np.all(np.array([p.distortion for p in pts]) >= lb - 1e-9)


def test_combined_outer_is_max(low_channel):
    cp, dp = low_channel
    rates = ob.rate_grid(cp, dp, 100)
    c2 = ob.partition_envelope(cp, dp, rates, n_nbar=128)
    c3 = ob.corr_envelope(cp, dp, rates)
    c = ob.combined_outer(c2, c3)
    assert np.all(c.dists >= ob.resample(c2, c.rates) - 1e-15)
    assert np.all(c.dists >= ob.resample(c3, c.rates) - 1e-15)


def test_outer_curve_rejects_unsorted():
    with pytest.raises(ValueError):
        ob.OuterCurve(np.array([0.0, 0.0]), np.array([1.0, 1.0]), "x", 1.0)
