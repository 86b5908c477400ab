"""Converse bounds: distortion lower envelopes D_lb(R).

Two families are implemented.  The noise-partition bound splits Z into
independent parts of variance Nbar and N - Nbar and lets a genie reveal
S + Zbar; it must hold for every Nbar.  The correlation bound works through
the map f relating the error in S to the error in the observable part Vt.
Both are parametrised by rbar = mean |E[X_i V_i]| in [0, sqrt(P (Q + sigma_u2))].

For a fixed rate each D bound decreases in rbar while the rate constraint caps
rbar from above, so the tightest admissible rbar is the cap obtained by
inverting the rate constraint.  Envelopes therefore only need a 1-D sweep over
Nbar for the first family and nothing at all for the second.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._optimize import golden_minimize
from .model import ChannelParams, DerivedParams, log_rate, rate_to_ratio

FEAS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class OuterCurve:
    """Sampled lower envelope; only rates inside the outer region are kept."""

    rates: np.ndarray
    dists: np.ndarray
    source: str
    rate_limit: float
    n_clamped: int = 0

    def __post_init__(self):
        r = np.asarray(self.rates, dtype=float)
        d = np.asarray(self.dists, dtype=float)
        if r.shape != d.shape:
            raise ValueError("rates and dists must have equal length")
        if r.size > 1 and np.any(np.diff(r) <= 0.0):
            raise ValueError("rates must be strictly increasing")
        object.__setattr__(self, "rates", r)
        object.__setattr__(self, "dists", d)

    def __len__(self):
        return self.rates.size


def es(cp: ChannelParams, nbar):
    """MMSE of S given V and the genie observation S + Zbar."""
    nbar = np.asarray(nbar, dtype=float)
    Q, s = cp.Q, cp.sigma_u2
    den = Q * nbar + Q * s + nbar * s
    with np.errstate(invalid="ignore", divide="ignore"):
        out = Q * nbar * s / den
    return np.where(den > 0.0, out, 0.0)


def _partition_slope(cp: ChannelParams, nbar):
    """Q^2 (Nbar + s) / (Q (Nbar + s) + Nbar s), i.e. E_S Q (Nbar + s) / (Nbar s).

    This is the coefficient multiplying 2^{2R} (N - Nbar) / (P + Q + N + 2 lam rbar)
    once E_S is folded in; it stays finite at Nbar = 0 where it equals Q.
    """
    nbar = np.asarray(nbar, dtype=float)
    Q, s = cp.Q, cp.sigma_u2
    den = Q * (nbar + s) + nbar * s
    with np.errstate(invalid="ignore", divide="ignore"):
        out = Q * Q * (nbar + s) / den
    return np.where(den > 0.0, out, Q)


def partition_rate_bound(cp: ChannelParams, nbar, rbar):
    """Largest rate allowed by the noise-partition bound; +inf at Nbar = N."""
    nbar = np.asarray(nbar, dtype=float)
    rbar = np.asarray(rbar, dtype=float)
    qs = cp.Q + cp.sigma_u2
    num = qs * (cp.P + cp.N + es(cp, nbar)) - rbar * rbar
    den = qs * (cp.N - nbar)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = log_rate(num / den)
    return np.where(den > 0.0, out, np.inf)


def partition_dist_bound(cp: ChannelParams, dp: DerivedParams, nbar, rbar, rate):
    """Noise-partition distortion bound at (Nbar, rbar, R).

    Algebraically equal to (1 + 2^{2R} Q (Nbar + s)(N - Nbar) / (Nbar s (P+Q+N+2 lam rbar))) E_S
    but written without the Nbar s denominator so Nbar = 0 and s = 0 take
    their continuous limits.
    """
    nbar = np.asarray(nbar, dtype=float)
    rbar = np.asarray(rbar, dtype=float)
    power = cp.P + cp.Q + cp.N + 2.0 * dp.lam * rbar
    return es(cp, nbar) + rate_to_ratio(rate) * (cp.N - nbar) * _partition_slope(cp, nbar) / power


def partition_point(cp: ChannelParams, dp: DerivedParams, nbar, rbar, rate=0.0):
    """(R_max, D_lb(R)) of the noise-partition bound for one (Nbar, rbar)."""
    return partition_rate_bound(cp, nbar, rbar), partition_dist_bound(cp, dp, nbar, rbar, rate)


def partition_best_rbar(cp: ChannelParams, nbar, rate):
    """Largest rbar meeting the rate constraint and the power cap; NaN if none."""
    nbar = np.asarray(nbar, dtype=float)
    qs = cp.Q + cp.sigma_u2
    room = qs * (cp.P + cp.N + es(cp, nbar) - rate_to_ratio(rate) * (cp.N - nbar))
    room = np.where(room < 0.0, np.where(room >= -FEAS_TOL * qs * (cp.P + cp.N + cp.Q), 0.0, np.nan), room)
    return np.sqrt(np.minimum(room, cp.P * qs))


def partition_rate_limit(cp: ChannelParams) -> float:
    """Rate beyond which some Nbar admits no rbar.

    R_max(Nbar, rbar = 0) grows with Nbar, so the binding partition is Nbar = 0.
    """
    return float(log_rate(1.0 + cp.P / cp.N))


def _partition_at(cp, dp, nbar, rate):
    rb = partition_best_rbar(cp, nbar, rate)
    return partition_dist_bound(cp, dp, nbar, rb, rate)


def partition_lower(cp: ChannelParams, dp: DerivedParams, rates, n_nbar: int = 1024, tol: float = 1e-10):
    """Noise-partition envelope max_Nbar min_rbar D at each rate; NaN outside the region.

    Nbar is swept on a uniform grid over [0, N] and the grid argmax is refined
    by golden-section search between its two neighbours.
    """
    rates = np.atleast_1d(np.asarray(rates, dtype=float))
    nb = np.linspace(0.0, cp.N, n_nbar)
    vals = _partition_at(cp, dp, nb[None, :], rates[:, None])
    infeasible = np.any(np.isnan(vals), axis=1)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    k = np.argmax(vals, axis=1)
    best = vals[np.arange(rates.size), k]
    lo = nb[np.clip(k - 1, 0, n_nbar - 1)]
    hi = nb[np.clip(k + 1, 0, n_nbar - 1)]

    def neg(x):
        v = _partition_at(cp, dp, x, rates)
        return -np.where(np.isnan(v), -np.inf, v)

    _, fx = golden_minimize(neg, lo, hi, tol=tol * max(cp.N, 1.0))
    best = np.maximum(best, -fx)
    return np.where(infeasible, np.nan, best)


def f_threshold(dp: DerivedParams) -> float:
    """Largest x with f(x) = 0, namely Q'N'/(Q'+N')."""
    return dp.Qp * dp.Np / (dp.Qp + dp.Np)


def f_func(dp: DerivedParams, x):
    """(sqrt(x) - sqrt(N'/Q') sqrt(Q' - x))_+^2 with x clamped to [0, Q'].

    Evaluated as x + (N'/Q')(Q' - x) - 2 sqrt(N'/Q') sqrt(x (Q' - x)) above the
    threshold and 0 below it, which makes f(threshold) = 0 and f(Q') = Q' exact.
    """
    x = np.clip(np.asarray(x, dtype=float), 0.0, dp.Qp)
    k = dp.Np / dp.Qp
    val = x + k * (dp.Qp - x) - 2.0 * np.sqrt(k) * np.sqrt(x * (dp.Qp - x))
    return np.where(x <= f_threshold(dp), 0.0, np.maximum(val, 0.0))


def f_domain_violations(dp: DerivedParams, x) -> int:
    x = np.asarray(x, dtype=float)
    return int(np.count_nonzero((x < 0.0) | (x > dp.Qp)))


def corr_rate_bound(cp: ChannelParams, dp: DerivedParams, rbar):
    rbar = np.asarray(rbar, dtype=float)
    s = cp.sigma_u2
    num = s * (cp.N + cp.P + cp.Q) + cp.Q * (cp.N + cp.P) - rbar * rbar
    with np.errstate(divide="ignore", invalid="ignore"):
        return log_rate(num / ((cp.Q + s) * (cp.N + dp.Np)))


def _corr_arg(cp, dp, rbar, rate):
    return dp.Qp * (cp.N + dp.Np) * rate_to_ratio(rate) / (cp.P + cp.Q + cp.N + 2.0 * dp.lam * rbar)


def corr_point(cp: ChannelParams, dp: DerivedParams, rbar, rate):
    """Correlation-bound D_lb at (rbar, R); NaN when R exceeds the rate bound."""
    rbar = np.asarray(rbar, dtype=float)
    feasible = np.asarray(rate) <= corr_rate_bound(cp, dp, rbar)
    d = f_func(dp, _corr_arg(cp, dp, rbar, rate))
    return np.where(feasible, d, np.nan)


def corr_best_rbar(cp: ChannelParams, dp: DerivedParams, rate):
    s = cp.sigma_u2
    qs = cp.Q + s
    total = s * (cp.N + cp.P + cp.Q) + cp.Q * (cp.N + cp.P)
    room = total - rate_to_ratio(rate) * qs * (cp.N + dp.Np)
    room = np.where(room < 0.0, np.where(room >= -FEAS_TOL * total, 0.0, np.nan), room)
    return np.sqrt(np.minimum(room, cp.P * qs))


def corr_rate_limit(cp: ChannelParams, dp: DerivedParams) -> float:
    """Zero-correlation rate bound; simplifies to 1/2 log(1 + P / (N + N'))."""
    return float(corr_rate_bound(cp, dp, 0.0))


def corr_lower(cp: ChannelParams, dp: DerivedParams, rates):
    """Correlation envelope min_rbar D at each rate (NaN outside the region).

    Also returns the number of f arguments that fell outside [0, Q'].
    """
    rates = np.atleast_1d(np.asarray(rates, dtype=float))
    rb = corr_best_rbar(cp, dp, rates)
    arg = _corr_arg(cp, dp, rb, rates)
    ok = ~np.isnan(rb)
    return np.where(ok, f_func(dp, arg), np.nan), f_domain_violations(dp, arg[ok])


def combined_lower(cp: ChannelParams, dp: DerivedParams, rates, n_nbar: int = 1024):
    """Pointwise max of both envelopes; NaN where either excludes the rate."""
    d2 = partition_lower(cp, dp, rates, n_nbar=n_nbar)
    d3, _ = corr_lower(cp, dp, rates)
    return np.maximum(d2, d3)


def rate_grid(cp: ChannelParams, dp: DerivedParams, n: int = 400) -> np.ndarray:
    """Uniform rates from 0 to the larger of the two zero-correlation limits."""
    if n < 2:
        raise ValueError("rate grid needs at least two samples")
    top = max(partition_rate_limit(cp), corr_rate_limit(cp, dp))
    if top <= 0.0:
        return np.zeros(1)
    return np.linspace(0.0, top, n)


def _curve(rates, dists, source, limit, n_clamped=0):
    ok = ~np.isnan(dists)
    return OuterCurve(rates=rates[ok], dists=dists[ok], source=source, rate_limit=limit, n_clamped=n_clamped)


def partition_envelope(cp: ChannelParams, dp: DerivedParams, rates=None, n_nbar: int = 1024) -> OuterCurve:
    rates = rate_grid(cp, dp) if rates is None else np.asarray(rates, dtype=float)
    return _curve(rates, partition_lower(cp, dp, rates, n_nbar=n_nbar), "partition", partition_rate_limit(cp))


def corr_envelope(cp: ChannelParams, dp: DerivedParams, rates=None) -> OuterCurve:
    rates = rate_grid(cp, dp) if rates is None else np.asarray(rates, dtype=float)
    d, clamped = corr_lower(cp, dp, rates)
    return _curve(rates, d, "correlation", corr_rate_limit(cp, dp), clamped)


def resample(curve: OuterCurve, rates) -> np.ndarray:
    """Piecewise-linear resampling (monotone data stays monotone); NaN outside."""
    rates = np.asarray(rates, dtype=float)
    if len(curve) == 0:
        return np.full(rates.shape, np.nan)
    out = np.interp(rates, curve.rates, curve.dists)
    inside = (rates >= curve.rates[0]) & (rates <= curve.rates[-1])
    return np.where(inside, out, np.nan)


def combined_outer(curve2: OuterCurve, curve3: OuterCurve) -> OuterCurve:
    """Pointwise maximum of two envelopes over their common rate range."""
    if curve2.rates.shape == curve3.rates.shape and np.array_equal(curve2.rates, curve3.rates):
        rates, d2, d3 = curve2.rates, curve2.dists, curve3.dists
    else:
        rates = np.union1d(curve2.rates, curve3.rates)
        d2, d3 = resample(curve2, rates), resample(curve3, rates)
    d = np.maximum(d2, d3)
    return _curve(
        rates, d, "combined", min(curve2.rate_limit, curve3.rate_limit), curve2.n_clamped + curve3.n_clamped
    )
