"""Batched damped Newton iteration with least-norm steps.

All seeds advance in lockstep as numpy batches; the per-step linear solve is
a pseudo-inverse via batched SVD, so under- and overdetermined systems are
handled uniformly.  Chunking is independent of the worker count, which keeps
output byte-identical for any parallelism setting.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .calc import from_real, to_real

__all__ = ["NewtonOptions", "newton_batch", "newton_point"]

_CHUNK = 256


@dataclass
class NewtonOptions:
    max_iter: int = 60
    step_tol: float = 1e-13      # convergence on the Newton step length
    res_decrease: float = 0.25   # Armijo-style sufficient decrease factor
    backtracks: int = 5
    stall_limit: int = 3         # consecutive failed line searches before dropping
    escape_norm: float = 1e6     # iterate norm beyond which a seed is abandoned
    svd_cut: float = 1e-13       # relative singular-value cutoff for the pseudo-step


def _pinv_step(J, R, cut):
    """Least-norm solution of J d = -R for a batch of small systems."""
    U, S, Vt = np.linalg.svd(J, full_matrices=False)
    smax = S[:, :1]
    inv = np.zeros_like(S)
    np.divide(1.0, S, out=inv, where=S > cut * np.maximum(smax, 1e-300))
    return -np.einsum("bij,bj->bi", Vt.transpose(0, 2, 1), inv * np.einsum("bij,bi->bj", U, R))


def newton_batch(system, seeds, options=None, workers=1):
    """Run damped Newton from every seed; return (points, converged, info).

    system(Z) must return real residuals (B, m) and Jacobians (B, m, 2n) in
    interleaved real coordinates.  Convergence is declared when the step
    length falls below step_tol * (1 + |z|); acceptance of the result is the
    caller's business (the solver does not know the problem's tolerances).
    """
    options = options or NewtonOptions()
    seeds = np.asarray(seeds, dtype=np.complex128)
    chunks = [seeds[i : i + _CHUNK] for i in range(0, len(seeds), _CHUNK)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda c: _newton_chunk(system, c, options), chunks))
    else:
        results = [_newton_chunk(system, c, options) for c in chunks]
    points = np.concatenate([r[0] for r in results], axis=0)
    converged = np.concatenate([r[1] for r in results], axis=0)
    iters = np.concatenate([r[2] for r in results], axis=0)
    return points, converged, {"iterations": iters}


def _newton_chunk(system, seeds, opt):
    Z = seeds.copy()
    B = Z.shape[0]
    active = np.ones(B, dtype=bool)
    converged = np.zeros(B, dtype=bool)
    stalls = np.zeros(B, dtype=np.int64)
    iters = np.zeros(B, dtype=np.int64)
    if B == 0:
        return Z, converged, iters

    R, J = system(Z)
    res_norm = np.linalg.norm(R, axis=1)
    for _ in range(opt.max_iter):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        step = _pinv_step(J[idx], R[idx], opt.svd_cut)
        Y = to_real(Z[idx])
        znorm = np.linalg.norm(Y, axis=1)
        step_len = np.linalg.norm(step, axis=1)

        # a full step below tolerance means we are at the root already;
        # requiring residual decrease there fights the roundoff floor
        at_root = step_len <= opt.step_tol * (1.0 + znorm)
        converged[idx[at_root]] = True
        active[idx[at_root]] = False
        if at_root.all():
            break
        idx = idx[~at_root]
        step = step[~at_root]
        Y = Y[~at_root]
        znorm = znorm[~at_root]
        step_len = step_len[~at_root]

        # backtracking line search on the residual norm
        alpha = np.ones(len(idx))
        accepted = np.zeros(len(idx), dtype=bool)
        best_Y = Y.copy()
        best_R = R[idx].copy()
        best_J = J[idx].copy()
        for _bt in range(opt.backtracks):
            trial = np.nonzero(~accepted)[0]
            if trial.size == 0:
                break
            Yt = Y[trial] + alpha[trial, None] * step[trial]
            Rt, Jt = system(from_real(Yt))
            ok = np.linalg.norm(Rt, axis=1) <= (
                1.0 - opt.res_decrease * alpha[trial]
            ) * res_norm[idx[trial]] + 1e-300
            hit = trial[ok]
            accepted[hit] = True
            best_Y[hit] = Yt[ok]
            best_R[hit] = Rt[ok]
            best_J[hit] = Jt[ok]
            alpha[trial[~ok]] *= 0.5

        stalls[idx[~accepted]] += 1
        stalls[idx[accepted]] = 0
        Z[idx[accepted]] = from_real(best_Y[accepted])
        R[idx[accepted]] = best_R[accepted]
        J[idx[accepted]] = best_J[accepted]
        res_norm[idx[accepted]] = np.linalg.norm(best_R[accepted], axis=1)
        iters[idx] += 1

        done = accepted & (alpha * step_len <= opt.step_tol * (1.0 + znorm))
        converged[idx[done]] = True
        drop = (stalls[idx] >= opt.stall_limit) | (
            np.linalg.norm(Z[idx], axis=1) > opt.escape_norm
        )
        active[idx[done]] = False
        active[idx[drop & ~done]] = False
    return Z, converged, iters


def newton_point(system, z0, options=None):
    """Single-point convenience wrapper; returns (z, converged)."""
    pts, conv, _ = newton_batch(system, np.asarray(z0)[None, :], options)
    return pts[0], bool(conv[0])
