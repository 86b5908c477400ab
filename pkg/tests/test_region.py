import json

import numpy as np
import pytest

from stateamp import region as rg
from stateamp.inner_bound import InnerParams, InnerPoint
from stateamp.model import ChannelParams

SMALL = rg.RegionConfig(beta_points=64, rate_levels=60, r_samples=100, nbar_points=256)


@pytest.fixture(scope="module")
def low_report():
    return rg.build_region(ChannelParams(7.7, 10.0, 1.0, 1.0), SMALL)


def test_regimes(low_report):
    assert low_report.regime == rg.LOW_POWER
    high_channel = rg.build_region(ChannelParams(77.0, 10.0, 1.0, 1.0), SMALL)
    assert high_channel.regime == rg.HIGH_POWER


def test_gap_nonnegative(low_report):
    gap = low_report.gap
    assert np.all(gap[np.isfinite(gap)] >= -rg.CONTAINMENT_TOL)


def test_report_json_roundtrip(low_report):
    d = low_report.to_dict()
    text = json.dumps(d, sort_keys=True)
    back = json.loads(text)
    assert back["regime"] == "low-power"
    assert back["channel"]["P"] == 7.7
    assert len(back["grid"]["R"]) == len(low_report.rates)


def _pt(r, d):
    return InnerPoint(InnerParams(0.0, 0.0), 0.0, r, d)


def test_regime_detect_examples():
    assert rg.regime_detect([_pt(0.0, 1.0), _pt(1.0, 2.0)]) == rg.LOW_POWER
    assert rg.regime_detect([_pt(0.0, 1.0), _pt(0.5, 1.0), _pt(1.0, 2.0)]) == rg.HIGH_POWER


def test_inner_on_grid_step_and_interp():
    pts = [_pt(0.0, 1.0), _pt(1.0, 2.0)]
    step = rg.inner_on_grid(pts, [0.0, 0.5, 1.0, 1.5])
    assert list(step[:3]) == [1.0, 2.0, 2.0] and np.isnan(step[3])
    lin = rg.inner_on_grid(pts, [0.5], convexified=True)
    assert lin[0] == pytest.approx(1.5)


def test_containment_violation_raises(monkeypatch):
    from stateamp import inner_bound as ib

    real = ib.frontier

    def shifted(dp, cp, config):
        return [InnerPoint(p.params, p.g, p.rate, p.distortion * 0.9, p.raw_rate) for p in real(dp, cp, config)]

    monkeypatch.setattr(ib, "frontier", shifted)
    with pytest.raises(rg.ContainmentError):
        rg.build_region(ChannelParams(7.7, 10.0, 1.0, 1.0), SMALL)


def test_convexified_region():
    rep = rg.build_region(ChannelParams(7.7, 10.0, 1.0, 1.0),
                          rg.RegionConfig(64, 60, r_samples=100, nbar_points=256, convexify=True))
    d = np.array([p.distortion for p in rep.inner])
    r = np.array([p.rate for p in rep.inner])
    assert np.all(np.diff(np.diff(d) / np.diff(r)) >= -1e-9)
