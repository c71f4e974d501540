"""Transversality of the foliation and the polar set at contact points.

Two independent checks are run: the rank of the contact Jacobian restricted to
the real span of the tangent frame (the block that coincides with the leafwise
Hessian in a foliated chart), and the principal angles between the tangent
space and the numerical kernel of the full Jacobian.  When the verdicts
disagree near the threshold the point is flagged borderline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calc import to_real
from .foliation import tangent_basis
from .polar import SolveOptions, contact_jacobian, smoothness_check

__all__ = ["TransversalityResult", "is_transversal"]

_ANGLE_TOL = 1e-8


@dataclass(frozen=True)
class TransversalityResult:
    applicable: bool      # False when the polar set is not smooth/reduced here
    transversal: bool
    tangent_rank: int
    kernel_overlap: float  # largest principal-angle cosine, tangent vs kernel
    borderline: bool


def _real_span(basis):
    """Real 2n x 2d matrix of columns vec(b_i), vec(i b_i)."""
    d, n = basis.shape
    T = np.empty((2 * n, 2 * d))
    for i in range(d):
        T[:, 2 * i] = to_real(basis[i])
        T[:, 2 * i + 1] = to_real(1j * basis[i])
    return T


def is_transversal(model, g, z, opts=None):
    """Transversality verdict at a contact point.

    Requires the point to lie on the polar set; when the smoothness test
    fails the verdict is reported as not applicable rather than a boolean.
    """
    opts = opts or SolveOptions()
    sm = smoothness_check(model, g, z, opts)
    frame = tangent_basis(model, z)
    J = contact_jacobian(model, g, z, frame=frame)
    T = _real_span(frame.basis)

    block = J @ T
    sigma = np.linalg.svd(block, compute_uv=False)
    smax = sigma[0] if sigma[0] > 0 else 1.0
    block_ok = bool(sigma[-1] / smax > opts.rank_tol)
    rank = int(np.sum(sigma > opts.rank_tol * smax))

    _, S, Vt = np.linalg.svd(J)
    jmax = S[0] if len(S) and S[0] > 0 else 1.0
    jrank = int(np.sum(S > opts.rank_tol * jmax))
    K = Vt[jrank:].T
    if K.shape[1] == 0:
        overlap = 0.0
    else:
        Q, _ = np.linalg.qr(T)
        cos = np.linalg.svd(Q.T @ K, compute_uv=False)
        overlap = float(cos[0]) if len(cos) else 0.0
    angle_ok = overlap < 1.0 - _ANGLE_TOL

    if not sm["smooth_reduced"]:
        return TransversalityResult(
            applicable=False,
            transversal=False,
            tangent_rank=rank,
            kernel_overlap=overlap,
            borderline=False,
        )
    return TransversalityResult(
        applicable=True,
        transversal=block_ok,
        tangent_rank=rank,
        kernel_overlap=overlap,
        borderline=bool(block_ok != angle_ok),
    )
