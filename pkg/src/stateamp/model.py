"""Problem instance, equivalent-channel decomposition and small Gaussian utilities.

The physical channel is Y = X + S + Z with S ~ N(0, Q), Z ~ N(0, N) and an
input power constraint P.  The encoder sees V = S + U_obs with
U_obs ~ N(0, sigma_u2).  Because (S, V) is jointly Gaussian, S splits into an
observable part Vt = lambda * V with variance Q' and an independent remainder W
with variance N'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

#: Logarithm base used for every rate in the package (bits).
LOG_BASE = 2.0

SINGULAR_TOL = 1e-10
PSD_TOL = 1e-9


class SingularObservationError(ValueError):
    """Observed covariance block is numerically singular."""


def log_rate(x):
    """Half-log of ``x`` in the package log base, i.e. 1/2 log(x)."""
    return 0.5 * np.log(x) / math.log(LOG_BASE)


def rate_to_ratio(rate):
    """Inverse of :func:`log_rate`: returns base**(2 * rate)."""
    return np.power(LOG_BASE, 2.0 * np.asarray(rate, dtype=float))


def convert_rate(rate_bits, base: float):
    """Re-express a rate given in the package base in another log base."""
    return np.asarray(rate_bits, dtype=float) * math.log(LOG_BASE) / math.log(base)


@dataclass(frozen=True)
class ChannelParams:
    """Transmit power P, state variance Q, noise N, observation noise sigma_u2."""

    P: float
    Q: float
    N: float
    sigma_u2: float

    def __post_init__(self):
        for name in ("P", "Q", "N", "sigma_u2"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
        if self.Q <= 0 or self.N <= 0:
            raise ValueError(f"degenerate channel: need Q > 0 and N > 0 (Q={self.Q}, N={self.N})")
        if self.P < 0 or self.sigma_u2 < 0:
            raise ValueError(f"need P >= 0 and sigma_u2 >= 0 (P={self.P}, sigma_u2={self.sigma_u2})")

    @property
    def r_max(self) -> float:
        """Largest admissible correlation |E[X V]|, sqrt(P (Q + sigma_u2))."""
        return math.sqrt(self.P * (self.Q + self.sigma_u2))


@dataclass(frozen=True)
class DerivedParams:
    Qp: float
    Np: float
    lam: float


def derive(params: ChannelParams) -> DerivedParams:
    """Split the state into its observable and unobservable parts.

    Returns Q' = Q^2/(Q+sigma_u2), N' = Q sigma_u2/(Q+sigma_u2) and the
    observation gain lambda = Q/(Q+sigma_u2).
    """
    Q, s = params.Q, params.sigma_u2
    if Q <= 0 or params.N <= 0:
        raise ValueError("degenerate channel: need Q > 0 and N > 0")
    lam = Q / (Q + s)
    Qp = Q * lam
    Np = Q * s / (Q + s)
    return DerivedParams(Qp=Qp, Np=Np, lam=lam)


@dataclass(frozen=True, eq=False)
class GaussianJoint:
    """Zero-mean jointly Gaussian vector described by its covariance."""

    cov: np.ndarray
    names: tuple = ()

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ValueError(f"covariance must be square, got shape {cov.shape}")
        scale = max(float(np.trace(np.abs(cov))), 1e-300)
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * scale):
            raise ValueError("covariance must be symmetric")
        cov = 0.5 * (cov + cov.T)
        if np.linalg.eigvalsh(cov)[0] < -PSD_TOL * scale:
            raise ValueError("covariance is not positive semidefinite")
        cov.setflags(write=False)
        object.__setattr__(self, "cov", cov)
        if self.names and len(self.names) != cov.shape[0]:
            raise ValueError("names must match covariance dimension")
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def dim(self) -> int:
        return self.cov.shape[0]

    def index(self, key) -> int:
        if isinstance(key, str):
            return self.names.index(key)
        return int(key)

    def indices(self, keys) -> list[int]:
        if isinstance(keys, (str, int, np.integer)):
            keys = [keys]
        return [self.index(k) for k in keys]

    def block(self, rows, cols=None) -> np.ndarray:
        rows = self.indices(rows)
        cols = rows if cols is None else self.indices(cols)
        return self.cov[np.ix_(rows, cols)]


def solve_small(A: np.ndarray, b: np.ndarray, tol: float = SINGULAR_TOL) -> np.ndarray:
    """Solve A x = b for a tiny symmetric system by pivoted elimination.

    Raises SingularObservationError when a pivot falls below tol * trace(A).
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    n = A.shape[0]
    if n > 4:
        raise ValueError("solve_small handles dim <= 4 only")
    thresh = tol * max(abs(float(np.trace(A))), 1e-300)
    M = np.concatenate([A, b.reshape(n, -1)], axis=1)
    for k in range(n):
        p = k + int(np.argmax(np.abs(M[k:, k])))
        if abs(M[p, k]) <= thresh:
            raise SingularObservationError(f"pivot {M[p, k]:.3e} below {thresh:.3e}")
        if p != k:
            M[[k, p]] = M[[p, k]]
        M[k] /= M[k, k]
        for i in range(n):
            if i != k:
                M[i] -= M[i, k] * M[k]
    x = M[:, n:]
    return x.reshape(b.shape)


def mmse_given(joint: GaussianJoint, target, observed: Sequence) -> tuple[np.ndarray, float]:
    """Linear MMSE estimate of one variable from a set of others.

    Returns the estimator coefficients r^T Sigma^{-1} (one per observed
    variable, in the given order) and the residual variance
    Var(target) - r^T Sigma^{-1} r, clipped at zero.
    """
    t = joint.index(target)
    obs = joint.indices(observed)
    if t in obs:
        coef = np.zeros(len(obs))
        coef[obs.index(t)] = 1.0
        return coef, 0.0
    sigma = joint.block(obs)
    r = joint.cov[obs, t]
    coef = solve_small(sigma, r)
    resid = float(joint.cov[t, t] - r @ coef)
    return coef, max(resid, 0.0)


def gaussian_mi(joint: GaussianJoint, set_a, set_b) -> float:
    """Mutual information I(A; B) between two disjoint blocks, in package units."""
    a = joint.indices(set_a)
    b = joint.indices(set_b)
    if not a or not b:
        raise ValueError("both index sets must be nonempty")
    if set(a) & set(b):
        raise ValueError("index sets must be disjoint")
    scale = float(np.trace(joint.cov))
    det_a = np.linalg.det(joint.block(a))
    det_b = np.linalg.det(joint.block(b))
    det_ab = np.linalg.det(joint.block(a + b))
    if det_ab <= SINGULAR_TOL * scale ** (len(a) + len(b)):
        raise SingularObservationError("joint covariance of A and B is singular")
    return max(float(log_rate(det_a * det_b / det_ab)), 0.0)
