"""Raw contact equations and their analytic Jacobians, batched over points.

The raw residual rows come straight from the holomorphic tangent generators:

* vector_field:    r = sum_j F_j dg/dz_j
* linear_action:   r_i = sum_j lam^i_j z_j dg/dz_j
* first_integral:  r_k = f_k dg/dz_p - f_p dg/dz_k  (pivot p, one trivial row)

Every row is a real-analytic function of (z, zbar); the Jacobian with respect
to the interleaved real coordinates is assembled from the Wirtinger pair
U = dr/dz, W = dr/dzbar.  Zero sets agree with the orthonormal-frame residual
of the polar module wherever the generators have full rank.
"""

from __future__ import annotations

import numpy as np

from .calc import eval_poly, jacobian_poly, morse_jet_batch, poly_second

__all__ = ["raw_contact_rows", "realify_rows", "real_gradient_rows", "ContactSystem"]


def realify_rows(res, U, W):
    """Complex residual rows -> stacked real rows (Re, Im per complex row).

    res: (B, m) complex; U, W: (B, m, n) complex Wirtinger derivatives.
    Returns (B, 2m) real residuals and (B, 2m, 2n) real Jacobian with columns
    interleaved (x_1, y_1, ..., x_n, y_n).
    """
    B, m = res.shape
    n = U.shape[2]
    out_res = np.empty((B, 2 * m))
    out_res[:, 0::2] = res.real
    out_res[:, 1::2] = res.imag
    plus = U + W
    minus = U - W
    jac = np.empty((B, 2 * m, 2 * n))
    jac[:, 0::2, 0::2] = plus.real
    jac[:, 0::2, 1::2] = -minus.imag
    jac[:, 1::2, 0::2] = plus.imag
    jac[:, 1::2, 1::2] = minus.real
    return out_res, jac


def real_gradient_rows(val, dz):
    """Real residual c = val and its gradient row from a Wirtinger gradient."""
    B, n = dz.shape
    row = np.empty((B, 1, 2 * n))
    row[:, 0, 0::2] = 2 * dz.real
    row[:, 0, 1::2] = -2 * dz.imag
    return val[:, None], row


def raw_contact_rows(model, g, Z):
    """Raw residual rows and Wirtinger derivatives for a batch Z (B, n).

    Returns (res (B,m), U (B,m,n), W (B,m,n), jet) where jet is the morse jet
    tuple for reuse.  For first integrals m = n and the pivot row is
    identically zero, which keeps the batch shape uniform.
    """
    Z = np.asarray(Z, dtype=np.complex128)
    B, n = Z.shape
    val, dz, dzz, dzzbar = morse_jet_batch(g, Z)
    jet = (val, dz, dzz, dzzbar)

    if model.kind == "vector_field":
        F = eval_poly(model.field, Z)
        JF = jacobian_poly(model.field, Z)
        res = np.einsum("bj,bj->b", F, dz)[:, None]
        U = (
            np.einsum("bjl,bj->bl", JF, dz)
            + np.einsum("bj,bjl->bl", F, dzz)
        )[:, None, :]
        W = np.einsum("bj,bjl->bl", F, dzzbar)[:, None, :]
        return res, U, W, jet

    if model.kind == "linear_action":
        lam = model.action  # (m, n)
        Fz = lam[None, :, :] * Z[:, None, :]  # (B, m, n)
        res = np.einsum("bij,bj->bi", Fz, dz)
        U = lam[None, :, :] * dz[:, None, :] + np.einsum("bij,bjl->bil", Fz, dzz)
        W = np.einsum("bij,bjl->bil", Fz, dzzbar)
        return res, U, W, jet

    # first integral with per-point pivot
    fz = jacobian_poly(model.integral, Z)[:, 0, :]      # (B, n)
    fzz = poly_second(model.integral, Z)[:, 0, :, :]    # (B, n, n)
    piv = np.argmax(np.abs(fz), axis=1)                 # (B,)
    ar = np.arange(B)
    fp = fz[ar, piv]                                    # (B,)
    dzp = dz[ar, piv]
    gzz_p = dzz[ar, piv, :]                             # (B, n) row g_{z_p z_l}
    gzw_p = dzzbar[ar, piv, :]
    fzz_p = fzz[ar, piv, :]                             # (B, n) row f_{z_p z_l}
    res = fz * dzp[:, None] - fp[:, None] * dz
    U = (
        fzz * dzp[:, None, None]
        + np.einsum("bk,bl->bkl", fz, gzz_p)
        - np.einsum("bl,bk->bkl", fzz_p, dz)
        - fp[:, None, None] * dzz
    )
    W = np.einsum("bk,bl->bkl", fz, gzw_p) - fp[:, None, None] * dzzbar
    return res, U, W, jet


class ContactSystem:
    """Callable residual/Jacobian system for the Newton engine.

    constraint = ("sphere", eps) adds g(z) - eps^2 as one real row;
    constraint = ("fiber", t) adds f(z) - t as a complex row (first integral
    required); extra_rows is an optional callable appending custom rows.
    fixed_coords pins selected complex coordinates (their columns are zeroed
    so Newton steps stay inside the slice).
    """

    def __init__(self, model, g, constraint=None, extra_rows=None, fixed_coords=()):
        self.model = model
        self.g = g
        self.constraint = constraint
        self.extra_rows = extra_rows
        self.fixed_coords = tuple(fixed_coords)
        if constraint is not None and constraint[0] == "fiber":
            if model.integral is None:
                raise ValueError("fiber constraint needs a model with a first integral")

    def __call__(self, Z):
        res_c, U, W, jet = raw_contact_rows(self.model, self.g, Z)
        res, jac = realify_rows(res_c, U, W)
        blocks_r = [res]
        blocks_j = [jac]
        if self.constraint is not None:
            kind, target = self.constraint
            if kind == "sphere":
                val, dz = jet[0], jet[1]
                c, row = real_gradient_rows(val - target**2, dz)
                blocks_r.append(c)
                blocks_j.append(row)
            elif kind == "fiber":
                fval = eval_poly(self.model.integral, Z)[:, 0]
                fz = jacobian_poly(self.model.integral, Z)[:, 0, :]
                c, row = realify_rows(
                    (fval - target)[:, None],
                    fz[:, None, :],
                    np.zeros_like(fz)[:, None, :],
                )
                blocks_r.append(c)
                blocks_j.append(row)
            else:
                raise ValueError(f"unknown constraint {kind!r}")
        if self.extra_rows is not None:
            c, row = self.extra_rows(Z, jet)
            blocks_r.append(c)
            blocks_j.append(row)
        R = np.concatenate(blocks_r, axis=1)
        J = np.concatenate(blocks_j, axis=1)
        for k in self.fixed_coords:
            J[:, :, 2 * k : 2 * k + 2] = 0.0
        return R, J
