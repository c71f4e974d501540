"""Wirtinger calculus for sparse polynomial maps and real-analytic Morse models.

All derivatives are assembled analytically from term lists; finite differences
are never used outside the test oracles.  Complex scalars are numpy complex128
(pairs of 64-bit floats).

Conventions
-----------
* A point of C^n is a 1-d complex128 array ``z`` of length n (the "CVec").
* For a real-valued g(z, zbar), ``dz[j] = dg/dz_j``; the conjugate gradient is
  ``conj(dz)`` and the real gradient in R^{2n} ~ C^n is ``2*conj(dz)``.
* ``dzz[j,k] = d^2 g/dz_j dz_k`` (symmetric), ``dzzbar[j,k] = d^2 g/dz_j dzbar_k``
  (Hermitian).
* Real coordinates are interleaved: (x_1, y_1, ..., x_n, y_n).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InputError, ModelError

__all__ = [
    "PolyMap",
    "MorseModel",
    "WirtingerJet2",
    "as_cvec",
    "eval_poly",
    "jacobian_poly",
    "poly_second",
    "morse_jet",
    "real_hessian_from_pair",
    "to_real",
    "from_real",
]


def as_cvec(z, n=None):
    """Coerce to a finite 1-d complex128 array, optionally checking its length."""
    z = np.asarray(z, dtype=np.complex128)
    if z.ndim != 1:
        raise InputError(f"expected a 1-d complex vector, got shape {z.shape}")
    if n is not None and z.shape[0] != n:
        raise InputError(f"dimension mismatch: expected {n} entries, got {z.shape[0]}")
    if not np.all(np.isfinite(z)):
        raise InputError("non-finite entries in point")
    return z


def to_real(z):
    """Complex n-vector -> interleaved real 2n-vector (x1, y1, x2, y2, ...)."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def from_real(y):
    """Interleaved real 2n-vector -> complex n-vector."""
    y = np.asarray(y, dtype=float)
    return y[..., 0::2] + 1j * y[..., 1::2]


def _pack_terms(terms, n):
    """Term list [(coeff, expo)] -> (coeffs (T,), expos (T,n)) arrays."""
    if len(terms) == 0:
        return np.zeros(0, dtype=np.complex128), np.zeros((0, n), dtype=np.int64)
    coeffs = np.array([c for c, _ in terms], dtype=np.complex128)
    expos = np.array([e for _, e in terms], dtype=np.int64).reshape(len(terms), n)
    return coeffs, expos


def _eval_pack(coeffs, expos, Z):
    """Evaluate one packed component at a batch Z of shape (B, n) -> (B,)."""
    if coeffs.size == 0:
        return np.zeros(Z.shape[0], dtype=np.complex128)
    mono = np.prod(Z[:, None, :] ** expos[None, :, :], axis=2)
    return mono @ coeffs


def _diff_pack(coeffs, expos, j):
    """Differentiate a packed component with respect to variable j."""
    keep = expos[:, j] > 0
    c = coeffs[keep] * expos[keep, j]
    e = expos[keep].copy()
    e[:, j] -= 1
    return c, e


@dataclass(frozen=True)
class PolyMap:
    """Sparse holomorphic polynomial map C^n_in -> C^n_out.

    ``terms[i]`` is a tuple of (coefficient, exponent-tuple) pairs for output
    component i.  Exponent vectors must be unique within a component and the
    total degree of the map must be at least 1.
    """

    n_in: int
    n_out: int
    terms: tuple

    def __post_init__(self):
        if self.n_in < 1 or self.n_out < 1:
            raise InputError("PolyMap needs n_in >= 1 and n_out >= 1")
        if len(self.terms) != self.n_out:
            raise InputError("terms must have one entry per output component")
        deg = 0
        norm = []
        for comp in self.terms:
            seen = set()
            comp_norm = []
            for coeff, expo in comp:
                expo = tuple(int(e) for e in expo)
                if len(expo) != self.n_in:
                    raise InputError("exponent vector length mismatch")
                if any(e < 0 for e in expo):
                    raise InputError("negative exponent")
                if expo in seen:
                    raise InputError(f"duplicate exponent vector {expo}")
                seen.add(expo)
                comp_norm.append((complex(coeff), expo))
                deg = max(deg, sum(expo))
            norm.append(tuple(comp_norm))
        if deg < 1:
            raise InputError("PolyMap must have degree >= 1")
        object.__setattr__(self, "terms", tuple(norm))

    @classmethod
    def scalar(cls, n, terms):
        """Convenience constructor for a map C^n -> C."""
        return cls(n_in=n, n_out=1, terms=(tuple(terms),))

    @property
    def degree(self):
        return max(sum(e) for comp in self.terms for _, e in comp)

    def is_homogeneous(self):
        """True when every term of every component has the same total degree."""
        degs = {sum(e) for comp in self.terms for _, e in comp}
        return len(degs) == 1

    @cached_property
    def _packs(self):
        return [_pack_terms(comp, self.n_in) for comp in self.terms]

    @cached_property
    def _jac_packs(self):
        return [
            [_diff_pack(c, e, j) for j in range(self.n_in)]
            for c, e in self._packs
        ]

    @cached_property
    def _hess_packs(self):
        out = []
        for row in self._jac_packs:
            out.append(
                [
                    [_diff_pack(c, e, k) for k in range(self.n_in)]
                    for c, e in row
                ]
            )
        return out


def _batchify(z, n):
    z = np.asarray(z, dtype=np.complex128)
    if z.ndim == 1:
        return z[None, :], True
    if z.ndim == 2:
        return z, False
    raise InputError(f"expected point or batch of points, got shape {z.shape}")


def eval_poly(pmap, z):
    """Evaluate the map at z.  Accepts (n,) or a batch (B, n)."""
    Z, single = _batchify(z, pmap.n_in)
    if Z.shape[1] != pmap.n_in:
        raise InputError(f"dimension mismatch: map expects {pmap.n_in} inputs")
    out = np.stack([_eval_pack(c, e, Z) for c, e in pmap._packs], axis=1)
    return out[0] if single else out


def jacobian_poly(pmap, z):
    """Analytic Jacobian d(component i)/dz_j, shape (n_out, n_in) (or batched)."""
    Z, single = _batchify(z, pmap.n_in)
    if Z.shape[1] != pmap.n_in:
        raise InputError(f"dimension mismatch: map expects {pmap.n_in} inputs")
    B = Z.shape[0]
    out = np.zeros((B, pmap.n_out, pmap.n_in), dtype=np.complex128)
    for i, row in enumerate(pmap._jac_packs):
        for j, (c, e) in enumerate(row):
            if c.size:
                out[:, i, j] = _eval_pack(c, e, Z)
    return out[0] if single else out


def poly_second(pmap, z):
    """Second derivatives d^2(component i)/dz_j dz_k, shape (n_out, n, n)."""
    Z, single = _batchify(z, pmap.n_in)
    if Z.shape[1] != pmap.n_in:
        raise InputError(f"dimension mismatch: map expects {pmap.n_in} inputs")
    B, n = Z.shape[0], pmap.n_in
    out = np.zeros((B, pmap.n_out, n, n), dtype=np.complex128)
    for i, row in enumerate(pmap._hess_packs):
        for j in range(n):
            for k in range(j, n):
                c, e = row[j][k]
                if c.size:
                    val = _eval_pack(c, e, Z)
                    out[:, i, j, k] = val
                    if k != j:
                        out[:, i, k, j] = val
    return out[0] if single else out


@dataclass(frozen=True)
class WirtingerJet2:
    """Value and first/second Wirtinger derivatives of a real function at a point."""

    value: float
    dz: np.ndarray       # (n,)   dg/dz_j
    dzz: np.ndarray      # (n,n)  d2g/dz_j dz_k, symmetric
    dzzbar: np.ndarray   # (n,n)  d2g/dz_j dzbar_k, Hermitian


@dataclass(frozen=True)
class MorseModel:
    """Real-analytic Morse function with index 0 at the origin.

    kind = "round":    g = sum |z_j|^2
    kind = "weighted": g = sum a_j x_j^2 + b_j y_j^2, all a_j, b_j > 0
    kind = "general":  sparse real polynomial in (z, zbar); ``terms`` holds
                       (coeff, z-exponents, zbar-exponents) with conjugate
                       symmetric coefficients.
    """

    kind: str
    n: int
    a: tuple = ()
    b: tuple = ()
    terms: tuple = ()

    def __post_init__(self):
        if self.n < 2:
            raise ModelError("Morse model needs n >= 2")
        if self.kind == "round":
            pass
        elif self.kind == "weighted":
            if len(self.a) != self.n or len(self.b) != self.n:
                raise ModelError("weighted Morse model needs n values in a and b")
            if any(x <= 0 for x in self.a) or any(x <= 0 for x in self.b):
                raise ModelError("weighted Morse coefficients must be positive")
            object.__setattr__(self, "a", tuple(float(x) for x in self.a))
            object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        elif self.kind == "general":
            self._validate_general()
        else:
            raise ModelError(f"unknown Morse kind {self.kind!r}")

    def _validate_general(self):
        norm = []
        table = {}
        for coeff, ze, we in self.terms:
            ze = tuple(int(x) for x in ze)
            we = tuple(int(x) for x in we)
            if len(ze) != self.n or len(we) != self.n:
                raise ModelError("exponent vectors must have length n")
            if any(x < 0 for x in ze + we):
                raise ModelError("negative exponent in Morse term")
            key = (ze, we)
            if key in table:
                raise ModelError(f"duplicate Morse term {key}")
            table[key] = complex(coeff)
            norm.append((complex(coeff), ze, we))
        for (ze, we), coeff in table.items():
            mirror = table.get((we, ze))
            if mirror is None or abs(np.conj(coeff) - mirror) > 1e-12 * max(1.0, abs(coeff)):
                raise ModelError(
                    "general Morse polynomial is not real: conjugate symmetry "
                    f"fails for term z^{ze} zbar^{we}"
                )
            total = sum(ze) + sum(we)
            if total == 0 and abs(coeff) > 0:
                raise ModelError("Morse function must vanish at the origin")
            if total == 1 and abs(coeff) > 0:
                raise ModelError("Morse function must be critical at the origin")
        object.__setattr__(self, "terms", tuple(norm))
        jet = morse_jet(self, np.zeros(self.n, dtype=np.complex128))
        hess0 = real_hessian_from_pair(jet.dzz, jet.dzzbar)
        eigs = np.linalg.eigvalsh(hess0)
        if eigs[0] <= 0:
            raise ModelError(
                f"Hessian at the origin is not positive definite (min eig {eigs[0]:.3e}); "
                "the critical point does not have Morse index 0"
            )

    @classmethod
    def round(cls, n):
        return cls(kind="round", n=n)

    @classmethod
    def weighted(cls, a, b):
        return cls(kind="weighted", n=len(a), a=tuple(a), b=tuple(b))

    @classmethod
    def general(cls, n, terms):
        return cls(kind="general", n=n, terms=tuple(terms))

    @cached_property
    def _packs(self):
        """Packed arrays (coeffs, zexp, wexp) for the general kind."""
        if self.kind != "general":
            return None
        coeffs = np.array([c for c, _, _ in self.terms], dtype=np.complex128)
        zexp = np.array([z for _, z, _ in self.terms], dtype=np.int64).reshape(-1, self.n)
        wexp = np.array([w for _, _, w in self.terms], dtype=np.int64).reshape(-1, self.n)
        return coeffs, zexp, wexp


def _general_eval(coeffs, zexp, wexp, Z):
    Zc = np.conj(Z)
    mono = np.prod(Z[:, None, :] ** zexp[None], axis=2)
    mono = mono * np.prod(Zc[:, None, :] ** wexp[None], axis=2)
    return mono @ coeffs


def morse_jet_batch(g, Z):
    """Jet data for a batch Z of shape (B, n).

    Returns (value (B,), dz (B,n), dzz (B,n,n), dzzbar (B,n,n)); the second
    derivative arrays are broadcast views when they are point-independent.
    """
    Z = np.asarray(Z, dtype=np.complex128)
    B, n = Z.shape
    if n != g.n:
        raise InputError(f"dimension mismatch: Morse model lives on C^{g.n}")
    if g.kind == "round":
        val = np.sum(np.abs(Z) ** 2, axis=1)
        dz = np.conj(Z)
        dzz = np.broadcast_to(np.zeros((n, n), dtype=np.complex128), (B, n, n))
        dzzbar = np.broadcast_to(np.eye(n, dtype=np.complex128), (B, n, n))
        return val, dz, dzz, dzzbar
    if g.kind == "weighted":
        a = np.asarray(g.a)
        b = np.asarray(g.b)
        x, y = Z.real, Z.imag
        val = np.sum(a * x**2 + b * y**2, axis=1)
        dz = a * x - 1j * b * y
        dzz = np.broadcast_to(np.diag((a - b) / 2.0).astype(np.complex128), (B, n, n))
        dzzbar = np.broadcast_to(np.diag((a + b) / 2.0).astype(np.complex128), (B, n, n))
        return val, dz, dzz, dzzbar
    coeffs, zexp, wexp = g._packs
    val = _general_eval(coeffs, zexp, wexp, Z).real
    dz = np.zeros((B, n), dtype=np.complex128)
    dzz = np.zeros((B, n, n), dtype=np.complex128)
    dzzbar = np.zeros((B, n, n), dtype=np.complex128)
    for j in range(n):
        cj, zj = _diff_pack(coeffs, zexp, j)
        wj = wexp[zexp[:, j] > 0]
        if cj.size:
            dz[:, j] = _general_eval(cj, zj, wj, Z)
        for k in range(j, n):
            ck, zk = _diff_pack(cj, zj, k)
            wk = wj[zj[:, k] > 0]
            if ck.size:
                v = _general_eval(ck, zk, wk, Z)
                dzz[:, j, k] = v
                if k != j:
                    dzz[:, k, j] = v
        for k in range(n):
            keep = wj[:, k] > 0
            ck = cj[keep] * wj[keep, k]
            zk = zj[keep]
            wk = wj[keep].copy()
            if ck.size:
                wk[:, k] -= 1
                dzzbar[:, j, k] = _general_eval(ck, zk, wk, Z)
    return val, dz, dzz, dzzbar


def morse_jet(g, z):
    """Second-order Wirtinger jet of the Morse model at a single point."""
    z = as_cvec(z, g.n)
    val, dz, dzz, dzzbar = morse_jet_batch(g, z[None, :])
    return WirtingerJet2(
        value=float(val[0]),
        dz=dz[0],
        dzz=np.array(dzz[0]),
        dzzbar=np.array(dzzbar[0]),
    )


def real_hessian_from_pair(A, Bh):
    """Real symmetric matrix from Wirtinger pair (A = d^2/dw dw, Bh = d^2/dw dwbar).

    Coordinates are interleaved (u_1, v_1, ..., u_d, v_d) with w_i = u_i + i v_i:
        d^2/du_i du_j =  2 Re A + 2 Re Bh
        d^2/dv_i dv_j = -2 Re A + 2 Re Bh
        d^2/du_i dv_j = -2 Im A + 2 Im Bh
    """
    A = np.asarray(A, dtype=np.complex128)
    Bh = np.asarray(Bh, dtype=np.complex128)
    d = A.shape[0]
    H = np.empty((2 * d, 2 * d))
    H[0::2, 0::2] = 2 * A.real + 2 * Bh.real
    H[1::2, 1::2] = -2 * A.real + 2 * Bh.real
    H[0::2, 1::2] = -2 * A.imag + 2 * Bh.imag
    H[1::2, 0::2] = -2 * A.imag - 2 * Bh.imag
    return H
