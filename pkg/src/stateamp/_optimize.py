"""Vectorised scalar search helpers."""

import math

import numpy as np

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_minimize(f, lo, hi, tol=1e-8, max_iter=200):
    """Golden-section search run independently on every element of ``lo``/``hi``.

    ``f`` must map an array of abscissae (same shape as ``lo``) to objective
    values elementwise.  Iterates until every bracket is narrower than ``tol``.
    Returns (x, f(x)) with x the midpoint of the final bracket.
    """
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    width = float(np.max(b - a)) if a.size else 0.0
    n_iter = 0
    if width > tol:
        n_iter = min(max_iter, int(math.ceil(math.log(tol / width) / math.log(INVPHI))))
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc = f(c)
    fd = f(d)
    for _ in range(n_iter):
        left = fc < fd
        # keep [a, d] where f(c) < f(d), else [c, b]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - INVPHI * (b - a)
        new_d = a + INVPHI * (b - a)
        # reuse the surviving interior point
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        fc_keep = np.where(left, fc, fd)
        probe = np.where(left, c_next, d_next)
        fp = f(probe)
        fc = np.where(left, fp, fc_keep)
        fd = np.where(left, fc_keep, fp)
        c, d = c_next, d_next
    x = 0.5 * (a + b)
    return x, f(x)


def grid_then_golden(f, lo, hi, n_grid=33, tol=1e-8):
    """Minimise over [lo, hi] by a coarse uniform scan then golden refinement.

    The scan guards against objectives with an interior local maximum; the
    refinement bracket spans the two grid neighbours of the best scan point.
    Endpoints are compared against the refined value so boundary optima survive.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    t = np.linspace(0.0, 1.0, n_grid)
    xs = lo[..., None] + (hi - lo)[..., None] * t
    vals = f(xs)
    k = np.argmin(vals, axis=-1)
    k_lo = np.clip(k - 1, 0, n_grid - 1)
    k_hi = np.clip(k + 1, 0, n_grid - 1)
    a = np.take_along_axis(xs, k_lo[..., None], axis=-1)[..., 0]
    b = np.take_along_axis(xs, k_hi[..., None], axis=-1)[..., 0]
    x, fx = golden_minimize(f, a, b, tol=tol)
    best_grid = np.take_along_axis(vals, k[..., None], axis=-1)[..., 0]
    x_grid = np.take_along_axis(xs, k[..., None], axis=-1)[..., 0]
    use_grid = best_grid < fx
    return np.where(use_grid, x_grid, x), np.where(use_grid, best_grid, fx)
