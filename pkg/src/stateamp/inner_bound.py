"""Achievable (R, D) pairs of the hybrid analog + Gelfand-Pinsker scheme.

The encoder sends X = g*Vt + Xt where Xt ~ N(0, beta*P) carries the message
through the auxiliary U = Xt + alpha*(1+g)*Vt and g = sqrt((1-beta) P / Q')
spends the remaining power on an amplified copy of the observable state.
The receiver decodes U and forms the linear MMSE estimate of S from (Y, U).

All closed forms below are written in cancellation-free shapes, e.g.
det(Sigma) = (1-alpha)^2 beta P A + (N'+N)(beta P + alpha^2 A) with
A = (1+g)^2 Q', so they stay accurate near the degenerate corner beta = alpha = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._optimize import grid_then_golden
from .model import (
    SINGULAR_TOL,
    ChannelParams,
    DerivedParams,
    GaussianJoint,
    log_rate,
    rate_to_ratio,
)

PARETO_TOL = 1e-10


@dataclass(frozen=True)
class InnerParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be a finite non-negative number, got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")


@dataclass(frozen=True)
class InnerPoint:
    """Outcome of one (alpha, beta) choice.

    ``rate`` is clamped at zero; ``raw_rate`` is the unclamped expression and
    ``decodable`` says whether it is non-negative, i.e. whether the receiver
    can actually decode U and use it in the estimate.  ``degenerate`` marks
    the beta = alpha = 0 corner where U vanishes and D uses Y alone.
    """

    params: InnerParams
    g: float
    rate: float
    distortion: float
    raw_rate: float = 0.0
    degenerate: bool = False

    @property
    def decodable(self) -> bool:
        return self.raw_rate >= 0.0


@dataclass(frozen=True, eq=False)
class SchemeStatistics:
    r: np.ndarray
    Sigma: np.ndarray


def gain(dp: DerivedParams, cp: ChannelParams, beta):
    return np.sqrt((1.0 - np.asarray(beta, dtype=float)) * cp.P / dp.Qp)


def scheme_statistics(dp: DerivedParams, cp: ChannelParams, ip: InnerParams) -> SchemeStatistics:
    """Cross-correlation r of S with [Y, U] and the covariance Sigma of [Y, U]."""
    a, b = ip.alpha, ip.beta
    g = float(gain(dp, cp, b))
    c = 1.0 + g
    bp = b * cp.P
    r = np.array([c * dp.Qp + dp.Np, a * c * dp.Qp])
    s12 = bp + a * c * c * dp.Qp
    sigma = np.array([
        [c * c * dp.Qp + bp + dp.Np + cp.N, s12],
        [s12, bp + a * a * c * c * dp.Qp],
    ])
    return SchemeStatistics(r=r, Sigma=sigma)


def scheme_joint(dp: DerivedParams, cp: ChannelParams, ip: InnerParams) -> GaussianJoint:
    """Joint law of (S, Y, U, Vt, W) built from the signal model directly.

    Independent of :func:`scheme_statistics`: the covariance is L diag(var) L^T
    for the linear map from the independent sources (Vt, W, Xt, Z).
    """
    g = float(gain(dp, cp, ip.beta))
    c = 1.0 + g
    L = np.array([
        [1.0, 1.0, 0.0, 0.0],           # S  = Vt + W
        [c, 1.0, 1.0, 1.0],             # Y  = (1+g) Vt + Xt + W + Z
        [ip.alpha * c, 0.0, 1.0, 0.0],  # U  = Xt + alpha (1+g) Vt
        [1.0, 0.0, 0.0, 0.0],           # Vt
        [0.0, 1.0, 0.0, 0.0],           # W
    ])
    var = np.array([dp.Qp, dp.Np, ip.beta * cp.P, cp.N])
    return GaussianJoint(L @ np.diag(var) @ L.T, names=("S", "Y", "U", "Vt", "W"))


def _closed_forms(dp: DerivedParams, cp: ChannelParams, alpha, beta):
    """Vectorised (raw_rate, distortion, degenerate) for arrays of alpha, beta."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    Qp, Np, N = dp.Qp, dp.Np, cp.N
    c = 1.0 + np.sqrt((1.0 - beta) * cp.P / Qp)
    A = c * c * Qp
    bp = beta * cp.P
    M = Np + N
    s11 = A + bp + M
    s22 = bp + alpha * alpha * A
    det = (1.0 - alpha) ** 2 * bp * A + M * (bp + alpha * alpha * A)
    # Var(S | Y)
    d_y = ((Qp + Np) * (bp + N) + Qp * Np * (1.0 - c) ** 2) / s11
    # s11 * Cov(S, U | Y)
    e = alpha * c * Qp * (bp + N + Np * (1.0 - c)) - bp * (c * Qp + Np)
    degenerate = det <= SINGULAR_TOL * s11 * (s11 + s22)
    with np.errstate(divide="ignore", invalid="ignore"):
        d_yu = d_y - e * e / (s11 * det)
        raw = log_rate(bp * s11 / det)
    dist = np.where(degenerate, d_y, d_yu)
    dist = np.clip(dist, 0.0, Qp + Np)
    # U == 0 identically: both mutual informations vanish
    raw = np.where(degenerate & (bp == 0.0), 0.0, raw)
    return raw, dist, degenerate


def raw_rate(dp, cp, alpha, beta):
    """Unclamped I(U;Y) - I(U;Vt); -inf when U is a deterministic copy of Vt."""
    return _closed_forms(dp, cp, alpha, beta)[0]


def distortion(dp, cp, alpha, beta):
    return _closed_forms(dp, cp, alpha, beta)[1]


def evaluate(dp: DerivedParams, cp: ChannelParams, ip: InnerParams) -> InnerPoint:
    """Rate and MMSE of the scheme at a single (alpha, beta)."""
    raw, dist, degen = _closed_forms(dp, cp, ip.alpha, ip.beta)
    raw = float(raw)
    return InnerPoint(
        params=ip,
        g=float(gain(dp, cp, ip.beta)),
        rate=max(raw, 0.0),
        distortion=float(dist),
        raw_rate=raw,
        degenerate=bool(degen),
    )


def costa_alpha(cp: ChannelParams, beta: float) -> float:
    """Dirty-paper coefficient beta P / (beta P + N)."""
    bp = beta * cp.P
    return bp / (bp + cp.N)


def max_rate_alpha(dp: DerivedParams, cp: ChannelParams, beta):
    """Coefficient maximising the rate at fixed beta: beta P / (beta P + N + N')."""
    bp = np.asarray(beta, dtype=float) * cp.P
    return bp / (bp + cp.N + dp.Np)


def u_useless_alpha(dp: DerivedParams, cp: ChannelParams, beta: float) -> float | None:
    """Coefficient at which the estimate puts zero weight on U, or None.

    None is returned when (1+g) Q' (beta P + N - g N') is not positive, where
    no non-negative coefficient decouples U from the estimate.
    """
    g = float(gain(dp, cp, beta))
    bp = beta * cp.P
    den = (1.0 + g) * dp.Qp * (bp + cp.N - g * dp.Np)
    if den <= 0.0:
        return None
    return bp * ((1.0 + g) * dp.Qp + dp.Np) / den


def feasible_alpha_interval(dp: DerivedParams, cp: ChannelParams, beta, rate):
    """Range [lo, hi] of alpha >= 0 with raw rate >= ``rate`` at fixed beta.

    The rate condition reads det(Sigma)(alpha) <= beta P s11 / 2^{2R}; det is a
    convex quadratic in alpha, so the set is an interval.  Empty intervals
    come back as NaN.
    """
    beta = np.asarray(beta, dtype=float)
    rate = np.asarray(rate, dtype=float)
    c = 1.0 + np.sqrt((1.0 - beta) * cp.P / dp.Qp)
    A = c * c * dp.Qp
    bp = beta * cp.P
    M = dp.Np + cp.N
    s11 = A + bp + M
    # det(alpha) = qa alpha^2 + qb alpha + qc
    qa = A * (bp + M)
    qb = -2.0 * bp * A
    qc = bp * (A + M)
    budget = bp * s11 / rate_to_ratio(rate)
    disc = qb * qb - 4.0 * qa * (qc - budget)
    with np.errstate(invalid="ignore"):
        root = np.sqrt(disc)
    vertex = -qb / (2.0 * qa)
    half = root / (2.0 * qa)
    ok = (disc >= 0.0) & (bp > 0.0)
    lo = np.where(ok, np.maximum(vertex - half, 0.0), np.nan)
    hi = np.where(ok & (vertex + half >= 0.0), vertex + half, np.nan)
    lo = np.where(np.isnan(hi), np.nan, lo)
    return lo, hi


def best_alpha_at_rate(dp, cp, beta, rate, tol=1e-8):
    """Minimum-distortion alpha among those keeping the rate at least ``rate``.

    Vectorised over broadcastable ``beta`` and ``rate``.  Returns
    (alpha, distortion, achieved_raw_rate); entries are NaN where no alpha
    reaches the requested rate.
    """
    beta, rate = np.broadcast_arrays(np.asarray(beta, float), np.asarray(rate, float))
    lo, hi = feasible_alpha_interval(dp, cp, beta, rate)
    ok = ~np.isnan(lo)
    lo_s = np.where(ok, lo, 0.0)
    hi_s = np.where(ok, hi, 0.0)
    b_col = beta[..., None]

    def objective(x):
        if x.ndim == beta.ndim:
            return distortion(dp, cp, x, beta)
        return distortion(dp, cp, x, b_col)

    alpha, dist = grid_then_golden(objective, lo_s, hi_s, tol=tol)
    achieved = raw_rate(dp, cp, alpha, beta)
    nan = np.full(alpha.shape, np.nan)
    return np.where(ok, alpha, nan), np.where(ok, dist, nan), np.where(ok, achieved, nan)


@dataclass(frozen=True)
class FrontierConfig:
    """Sweep resolution for the achievable frontier.

    beta_points uniform beta values in [0, 1]; rate_levels target rates per
    beta between 0 and the largest achievable rate; alpha_tol the final
    golden-section bracket width.
    """

    beta_points: int = 512
    rate_levels: int = 400
    alpha_tol: float = 1e-8

    def __post_init__(self):
        if self.beta_points < 2 or self.rate_levels < 2:
            raise ValueError("frontier resolutions must be >= 2")


def pareto_prune(rates, dists, tol=PARETO_TOL):
    """Indices of non-dominated (rate, distortion) pairs, sorted by rate.

    q dominates p when R_q >= R_p and D_q <= D_p with at least one of them
    better by more than ``tol``; pairs tied within ``tol`` all survive.
    """
    rates = np.asarray(rates, dtype=float)
    dists = np.asarray(dists, dtype=float)
    order = np.lexsort((dists, -rates))
    keep = []
    best_any = np.inf      # min D over pairs with R >= R_p
    best_above = np.inf    # min D over pairs with R > R_p + tol
    j = 0
    for i in order:
        r, d = rates[i], dists[i]
        while j < len(order) and rates[order[j]] > r + tol:
            best_above = min(best_above, dists[order[j]])
            j += 1
        if not (best_any < d - tol or best_above <= d + tol):
            keep.append(i)
        best_any = min(best_any, d)
    keep.sort(key=lambda i: (rates[i], dists[i]))
    return np.array(keep, dtype=int)


def frontier(dp: DerivedParams, cp: ChannelParams, config: FrontierConfig = FrontierConfig()) -> list[InnerPoint]:
    """Pareto-optimal achievable points, sorted by increasing rate.

    Only decodable points (raw rate >= 0) take part: a point whose rate
    expression is negative cannot have U decoded, so its distortion is not
    achievable.  Along the returned list D is non-decreasing in R.
    """
    betas = np.linspace(0.0, 1.0, config.beta_points)
    if cp.P == 0.0:
        betas = np.array([0.0])

    cand_a, cand_b, cand_r, cand_d = [], [], [], []

    # beta = 0 leaves only alpha = 0 decodable: pure analog amplification
    if betas[0] == 0.0:
        raw, dist, _ = _closed_forms(dp, cp, 0.0, 0.0)
        cand_a.append(np.array([0.0]))
        cand_b.append(np.array([0.0]))
        cand_r.append(np.array([float(raw)]))
        cand_d.append(np.array([float(dist)]))
    pos = betas[betas > 0.0]

    if pos.size:
        a_r = max_rate_alpha(dp, cp, pos)
        raw_r, d_r, _ = _closed_forms(dp, cp, a_r, pos)
        cand_a.append(a_r)
        cand_b.append(pos)
        cand_r.append(raw_r)
        cand_d.append(d_r)

        top = float(np.max(raw_r))
        levels = np.linspace(0.0, top, config.rate_levels)
        bb, tt = np.meshgrid(pos, levels, indexing="ij")
        keep = tt <= raw_r[:, None]
        bb, tt = bb[keep], tt[keep]
        alpha, dist, achieved = best_alpha_at_rate(dp, cp, bb, tt, tol=config.alpha_tol)
        good = ~np.isnan(alpha) & (achieved >= 0.0)
        cand_a.append(alpha[good])
        cand_b.append(bb[good])
        cand_r.append(achieved[good])
        cand_d.append(dist[good])

    a = np.concatenate(cand_a)
    b = np.concatenate(cand_b)
    r = np.concatenate(cand_r)
    d = np.concatenate(cand_d)
    idx = pareto_prune(r, d)
    return [
        InnerPoint(
            params=InnerParams(alpha=float(a[i]), beta=float(b[i])),
            g=float(gain(dp, cp, b[i])),
            rate=max(float(r[i]), 0.0),
            distortion=float(d[i]),
            raw_rate=float(r[i]),
            degenerate=bool(a[i] == 0.0 and b[i] == 0.0),
        )
        for i in idx
    ]


def lower_convex_hull(rates, dists):
    """Indices of the time-sharing (lower convex) envelope of sorted points."""
    pts = sorted(range(len(rates)), key=lambda i: (rates[i], dists[i]))
    hull: list[int] = []
    for i in pts:
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (rates[a] - rates[o]) * (dists[i] - dists[o]) - (dists[a] - dists[o]) * (rates[i] - rates[o])
            if cross <= 0.0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def convexify(points: list[InnerPoint]) -> list[InnerPoint]:
    """Keep only the frontier points on the lower convex envelope."""
    if len(points) < 3:
        return list(points)
    rates = [p.rate for p in points]
    dists = [p.distortion for p in points]
    return [points[i] for i in lower_convex_hull(rates, dists)]
