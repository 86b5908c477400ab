"""Monte Carlo ground truth for the scheme's closed forms.

Samples the signal model, then measures the linear MMSE and the Gaussian
mutual-information rate from empirical second moments.  Every estimate is
returned together with a standard error so callers can test agreement in
units of standard errors.

Randomness comes from numpy's Philox4x64 counter-based generator with the
ziggurat normal transform.  The sample is cut into chunks seeded by
``SeedSequence(seed).spawn``; chunks may be drawn concurrently and the merged
batch depends only on (seed, n, chunk_size).
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .inner_bound import InnerParams, gain
from .model import LOG_BASE, ChannelParams, DerivedParams

RNG_ALGORITHM = "numpy.Philox4x64/ziggurat-normal/SeedSequence.spawn"
DEFAULT_CHUNK = 1 << 18
COLUMNS = ("Vt", "W", "Z", "Xt", "S", "Y", "U")


def worker_count() -> int:
    """Thread cap from STATEAMP_THREADS (defaults to the CPU count)."""
    raw = os.environ.get("STATEAMP_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


@dataclass(frozen=True, eq=False)
class SampleBatch:
    n: int
    seed: int
    chunk_size: int
    params: InnerParams
    g: float
    columns: dict = field(repr=False)
    algorithm: str = RNG_ALGORITHM

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]


def _draw_chunk(seed_seq, m, stds):
    rng = np.random.Generator(np.random.Philox(seed_seq))
    z = rng.standard_normal((4, m))
    return z * stds[:, None]


def sample(dp: DerivedParams, cp: ChannelParams, ip: InnerParams, n: int, seed: int,
           chunk_size: int = DEFAULT_CHUNK) -> SampleBatch:
    """Draw n i.i.d. copies of (Vt, W, Z, Xt) and form S, Y, U from them."""
    if n < 2:
        raise ValueError("need at least two samples")
    g = float(gain(dp, cp, ip.beta))
    stds = np.sqrt([dp.Qp, dp.Np, cp.N, ip.beta * cp.P])
    n_chunks = -(-n // chunk_size)
    seqs = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [min(chunk_size, n - k * chunk_size) for k in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=min(worker_count(), n_chunks)) as pool:
        parts = list(pool.map(_draw_chunk, seqs, sizes, [stds] * n_chunks))
    base = np.concatenate(parts, axis=1)
    vt, w, z, xt = base
    c = 1.0 + g
    cols = {
        "Vt": vt,
        "W": w,
        "Z": z,
        "Xt": xt,
        "S": vt + w,
        "Y": c * vt + xt + w + z,
        "U": xt + ip.alpha * c * vt,
    }
    for arr in cols.values():
        arr.setflags(write=False)
    return SampleBatch(n=n, seed=seed, chunk_size=chunk_size, params=ip, g=g, columns=cols)


@dataclass(frozen=True, eq=False)
class MMSEEstimate:
    coefficients: np.ndarray
    coefficient_se: np.ndarray
    residual: float
    residual_se: float
    observations: tuple


def empirical_mmse(batch: SampleBatch, target: str = "S", observations=("Y", "U")) -> MMSEEstimate:
    """Least-squares fit of ``target`` on ``observations`` (no intercept: all zero-mean).

    Observations are dropped from the end while the Gram matrix is
    numerically rank deficient, e.g. U when beta = alpha = 0.
    """
    if batch.n < 1000:
        raise ValueError("empirical MMSE needs at least 1e3 samples")
    obs = list(observations)
    y = batch[target]
    if target in obs:
        k = len(obs)
        coef = np.zeros(k)
        coef[obs.index(target)] = 1.0
        return MMSEEstimate(coef, np.zeros(k), 0.0, 0.0, tuple(obs))
    while obs:
        X = np.stack([batch[o] for o in obs], axis=1)
        gram = X.T @ X
        if np.linalg.eigvalsh(gram)[0] > 1e-10 * np.trace(gram):
            break
        obs.pop()
    if not obs:
        resid = y
        return MMSEEstimate(np.zeros(0), np.zeros(0), float(np.mean(resid**2)),
                            float(np.std(resid**2) / math.sqrt(batch.n)), ())
    coef = np.linalg.solve(gram, X.T @ y)
    e = y - X @ coef
    e2 = e * e
    dof = batch.n - len(obs)
    sigma2 = float(e2.sum() / dof)
    coef_se = np.sqrt(sigma2 * np.diag(np.linalg.inv(gram)))
    return MMSEEstimate(
        coefficients=coef,
        coefficient_se=coef_se,
        residual=sigma2,
        residual_se=float(np.std(e2) / math.sqrt(batch.n)),
        observations=tuple(obs),
    )


@dataclass(frozen=True)
class RateEstimate:
    """I(U;Y) - I(U;Vt) from empirical moments; ``raw`` may be negative or -inf."""

    raw: float
    se: float

    @property
    def rate(self) -> float:
        return max(self.raw, 0.0)


def _logdet_and_influence(cols):
    """log det of the empirical second-moment matrix and per-sample influence."""
    X = np.stack(cols, axis=0)
    C = X @ X.T / X.shape[1]
    eig = np.linalg.eigvalsh(C)
    if eig[0] < -1e-9 * np.trace(C):
        raise ValueError("empirical covariance is not positive semidefinite")
    if eig[0] <= 1e-12 * np.trace(C):
        return -np.inf, None
    sign, logdet = np.linalg.slogdet(C)
    quad = np.einsum("in,ij,jn->n", X, np.linalg.inv(C), X)
    return logdet, quad - X.shape[0]


def empirical_rate(batch: SampleBatch) -> RateEstimate:
    """Gaussian plug-in estimate of the Gelfand-Pinsker rate with a delta-method SE.

    The rate is 1/2 [log C_YY - log det C_UY + log det C_UV - log C_VV]; the
    influence of each log-det term for a sample x is x^T C^{-1} x - dim.
    """
    if batch.n < 10_000:
        raise ValueError("empirical rate needs at least 1e4 samples")
    u, y, v = batch["U"], batch["Y"], batch["Vt"]
    ld_y, if_y = _logdet_and_influence([y])
    ld_uy, if_uy = _logdet_and_influence([u, y])
    ld_uv, if_uv = _logdet_and_influence([u, v])
    ld_v, if_v = _logdet_and_influence([v])
    scale = 0.5 / math.log(LOG_BASE)
    if if_uy is None:
        # U vanishes identically: both informations are zero
        return RateEstimate(0.0, 0.0)
    if if_uv is None:
        return RateEstimate(-math.inf, 0.0)
    raw = scale * (ld_y - ld_uy + ld_uv - ld_v)
    infl = scale * (if_y - if_uy + if_uv - if_v)
    return RateEstimate(float(raw), float(np.std(infl) / math.sqrt(batch.n)))


def write_batch_csv(batch: SampleBatch, path, max_rows: int | None = None) -> None:
    """Dump the batch as CSV, one row per sample, after a commented provenance header."""
    rows = batch.n if max_rows is None else min(batch.n, max_rows)
    with open(path, "w", newline="") as fh:
        fh.write(f"# rng={batch.algorithm} seed={batch.seed} n={batch.n} chunk={batch.chunk_size}\n")
        fh.write(f"# alpha={batch.params.alpha!r} beta={batch.params.beta!r} g={batch.g!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        data = np.stack([batch[c][:rows] for c in COLUMNS], axis=1)
        for row in data:
            w.writerow([f"{x:.12g}" for x in row])
