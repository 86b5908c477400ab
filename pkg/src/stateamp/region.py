"""Inner frontier and outer envelopes on one rate axis, plus gap and regime."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import inner_bound as ib
from . import outer_bounds as ob
from .model import ChannelParams, DerivedParams, derive

RATE_TOL = 1e-6
CONTAINMENT_TOL = 1e-9
LOW_POWER = "low-power"
HIGH_POWER = "high-power"


class ContainmentError(RuntimeError):
    """An achievable point falls below the converse bound."""

    def __init__(self, rate, d_inner, d_lb):
        self.rate, self.d_inner, self.d_lb = rate, d_inner, d_lb
        super().__init__(f"containment violated at R={rate!r}: D_inner={d_inner!r} < D_lb={d_lb!r}")


@dataclass(frozen=True)
class RegionConfig:
    beta_points: int = 512
    rate_levels: int = 400
    alpha_tol: float = 1e-8
    r_samples: int = 400
    nbar_points: int = 1024
    convexify: bool = False
    seed: int = 0

    def __post_init__(self):
        for name in ("beta_points", "rate_levels", "r_samples", "nbar_points"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be >= 2")

    @property
    def frontier_config(self) -> ib.FrontierConfig:
        return ib.FrontierConfig(self.beta_points, self.rate_levels, self.alpha_tol)


@dataclass(frozen=True, eq=False)
class RegionReport:
    params: ChannelParams
    derived: DerivedParams
    config: RegionConfig
    inner: list
    outer2: ob.OuterCurve
    outer3: ob.OuterCurve
    combined: ob.OuterCurve
    rates: np.ndarray
    d_inner: np.ndarray
    d_outer2: np.ndarray
    d_outer3: np.ndarray
    d_combined: np.ndarray
    regime: str
    metadata: dict = field(default_factory=dict)

    @property
    def gap(self) -> np.ndarray:
        return self.d_inner - self.d_combined

    def to_dict(self) -> dict:
        def num(x):
            x = float(x)
            return x if math.isfinite(x) else None

        def curve(c):
            return {
                "source": c.source,
                "rate_limit": num(c.rate_limit),
                "n_clamped": c.n_clamped,
                "R": [num(r) for r in c.rates],
                "D_lb": [num(d) for d in c.dists],
            }

        gap = self.gap
        finite = gap[np.isfinite(gap)]
        return {
            "channel": asdict(self.params),
            "derived": asdict(self.derived),
            "config": asdict(self.config),
            "regime": self.regime,
            "inner": [
                {
                    "alpha": p.params.alpha,
                    "beta": p.params.beta,
                    "g": p.g,
                    "R": p.rate,
                    "D": p.distortion,
                }
                for p in self.inner
            ],
            "outer2": curve(self.outer2),
            "outer3": curve(self.outer3),
            "combined": curve(self.combined),
            "grid": {
                "R": [num(r) for r in self.rates],
                "D_inner": [num(d) for d in self.d_inner],
                "D_outer2": [num(d) for d in self.d_outer2],
                "D_outer3": [num(d) for d in self.d_outer3],
                "D_combined": [num(d) for d in self.d_combined],
                "gap": [num(d) for d in gap],
            },
            "gap_summary": {
                "min": num(finite.min()) if finite.size else None,
                "max": num(finite.max()) if finite.size else None,
            },
            "metadata": self.metadata,
        }


def regime_detect(inner_frontier, rate_tol: float = RATE_TOL) -> str:
    """High-power when the least-distortion frontier point still carries a positive rate."""
    if not inner_frontier:
        raise ValueError("frontier is empty")
    d_min = min(p.distortion for p in inner_frontier)
    best = max((p for p in inner_frontier if p.distortion <= d_min + ib.PARETO_TOL), key=lambda p: p.rate)
    return HIGH_POWER if best.rate > rate_tol else LOW_POWER


def inner_on_grid(points, rates, convexified: bool = False) -> np.ndarray:
    """Achievable distortion at each rate from a sorted frontier; NaN past its end.

    Raw frontiers give min{D_i : R_i >= R} (use the next point up).  Convexified
    frontiers are interpolated linearly, which is what time sharing achieves.
    """
    rates = np.asarray(rates, dtype=float)
    R = np.array([p.rate for p in points])
    D = np.array([p.distortion for p in points])
    if convexified and len(points) > 1:
        out = np.interp(rates, R, D)
        return np.where(rates <= R[-1], out, np.nan)
    # suffix minima so the lookup stays right even with tolerance-tied points
    suffix = np.minimum.accumulate(D[::-1])[::-1]
    idx = np.searchsorted(R, rates, side="left")
    out = np.full(rates.shape, np.nan)
    inside = idx < len(R)
    out[inside] = suffix[idx[inside]]
    return out


def check_containment(points, cp: ChannelParams, dp: DerivedParams, n_nbar: int = 1024,
                      tol: float = CONTAINMENT_TOL):
    """Worst (R, D_inner, D_lb, margin) over the frontier; margin < -tol means a violation.

    Rates past the outer region's limit count as violations with D_lb = +inf.
    """
    R = np.array([p.rate for p in points])
    D = np.array([p.distortion for p in points])
    lb = ob.combined_lower(cp, dp, R, n_nbar=n_nbar)
    lb = np.where(np.isnan(lb), np.inf, lb)
    margin = D - lb
    k = int(np.argmin(margin))
    return float(R[k]), float(D[k]), float(lb[k]), float(margin[k])


def build_region(cp: ChannelParams, config: RegionConfig = RegionConfig()) -> RegionReport:
    """Compute every curve and verify that the inner frontier sits inside the outer region.

    Raises ContainmentError with the offending triple otherwise.
    """
    dp = derive(cp)
    points = ib.frontier(dp, cp, config.frontier_config)
    if config.convexify:
        points = ib.convexify(points)

    r_star, d_star, lb_star, margin = check_containment(points, cp, dp, config.nbar_points)
    if margin < -CONTAINMENT_TOL:
        raise ContainmentError(r_star, d_star, lb_star)

    grid = ob.rate_grid(cp, dp, config.r_samples)
    outer2 = ob.partition_envelope(cp, dp, grid, n_nbar=config.nbar_points)
    outer3 = ob.corr_envelope(cp, dp, grid)
    combined = ob.combined_outer(outer2, outer3)

    rates = np.union1d(grid, [p.rate for p in points])
    d2 = ob.partition_lower(cp, dp, rates, n_nbar=config.nbar_points)
    d3, _ = ob.corr_lower(cp, dp, rates)
    dc = np.maximum(d2, d3)
    di = inner_on_grid(points, rates, config.convexify)

    gap = di - dc
    bad = np.isfinite(gap) & (gap < -CONTAINMENT_TOL)
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise ContainmentError(float(rates[k]), float(di[k]), float(dc[k]))

    return RegionReport(
        params=cp,
        derived=dp,
        config=config,
        inner=points,
        outer2=outer2,
        outer3=outer3,
        combined=combined,
        rates=rates,
        d_inner=di,
        d_outer2=d2,
        d_outer3=d3,
        d_combined=dc,
        regime=regime_detect(points),
        metadata={
            "seed": config.seed,
            "containment_margin": margin,
            "rate_tol": RATE_TOL,
        },
    )
