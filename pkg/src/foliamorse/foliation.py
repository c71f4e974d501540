"""Foliation germ models and tangent-space computation at regular points.

Three model shapes are supported:

* ``vector_field``   -- dimension-1 foliation spanned by a holomorphic field F;
* ``first_integral`` -- codimension-1 foliation given by the fibers of f;
* ``linear_action``  -- dimension-m foliation of m commuting diagonal linear
  fields F_j = (lam_1^j z_1, ..., lam_n^j z_n).

A ``vector_field`` model may carry a known holomorphic first integral, used
for leaf bookkeeping (grouping contacts by fiber, drift monitoring).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calc import PolyMap, as_cvec, eval_poly, jacobian_poly, poly_second
from .errors import (
    DegenerateDistributionError,
    ModelError,
    NearCriticalError,
    SingularPointError,
)

__all__ = ["FoliationModel", "TangentFrame", "ChartDescriptor", "tangent_basis", "leaf_chart"]

_GEN_FLOOR = 1e-14       # all generators below this norm -> singular point
_PIVOT_FLOOR = 1e-12     # all first-integral partials below this -> no chart


@dataclass(frozen=True)
class FoliationModel:
    kind: str                  # vector_field | first_integral | linear_action
    n: int
    dim: int                   # leaf complex dimension d, 1 <= d < n
    field: PolyMap = None      # payload for vector_field
    integral: PolyMap = None   # payload for first_integral; optional otherwise
    action: np.ndarray = None  # (m, n) eigenvalue rows for linear_action

    def __post_init__(self):
        if self.n < 2:
            raise ModelError("foliation models need n >= 2")
        if not (1 <= self.dim < self.n):
            raise ModelError(f"leaf dimension must satisfy 1 <= d < n, got {self.dim}")
        if self.kind == "vector_field":
            if self.field is None or self.field.n_in != self.n or self.field.n_out != self.n:
                raise ModelError("vector_field payload must be a PolyMap C^n -> C^n")
            if self.dim != 1:
                raise ModelError("vector_field models have leaf dimension 1")
        elif self.kind == "first_integral":
            if self.integral is None or self.integral.n_in != self.n or self.integral.n_out != 1:
                raise ModelError("first_integral payload must be a PolyMap C^n -> C")
            if self.dim != self.n - 1:
                raise ModelError("first_integral models have leaf dimension n-1")
        elif self.kind == "linear_action":
            act = np.asarray(self.action, dtype=np.complex128)
            if act.ndim != 2 or act.shape != (self.dim, self.n):
                raise ModelError("linear_action payload must be an (m, n) matrix")
            object.__setattr__(self, "action", act)
            act.setflags(write=False)
        else:
            raise ModelError(f"unknown foliation kind {self.kind!r}")
        if self.integral is not None and (
            self.integral.n_in != self.n or self.integral.n_out != 1
        ):
            raise ModelError("attached first integral must map C^n -> C")

    @classmethod
    def from_vector_field(cls, field, integral=None):
        return cls(kind="vector_field", n=field.n_in, dim=1, field=field, integral=integral)

    @classmethod
    def from_first_integral(cls, f):
        return cls(kind="first_integral", n=f.n_in, dim=f.n_in - 1, integral=f)

    @classmethod
    def from_linear_action(cls, lam):
        lam = np.asarray(lam, dtype=np.complex128)
        if lam.ndim == 1:
            lam = lam[None, :]
        return cls(kind="linear_action", n=lam.shape[1], dim=lam.shape[0], action=lam)

    def is_homogeneous(self):
        """True when the tangent generators are homogeneous of one degree."""
        if self.kind == "vector_field":
            return self.field.is_homogeneous()
        if self.kind == "first_integral":
            return self.integral.is_homogeneous()
        return True  # linear action

    def quasi_weights(self):
        """Positive integer weights w with F_j quasi-homogeneous, or None.

        When they exist (and g is the round metric) the polar set is invariant
        under the circle action z_j -> exp(i w_j t) z_j, so the weighted phase
        orbit of a contact stays inside its component.
        """
        if self.kind == "linear_action":
            return (1,) * self.n
        rows = []
        if self.kind == "vector_field":
            for j, comp in enumerate(self.field.terms):
                for _, e in comp:
                    row = [float(x) for x in e]
                    row[j] -= 1.0
                    rows.append(row + [-1.0])
        else:
            for _, e in self.integral.terms[0]:
                rows.append([float(x) for x in e] + [-1.0])
        A = np.array(rows)
        _, S, Vt = np.linalg.svd(A)
        null = Vt[np.sum(S > 1e-10 * max(S[0], 1e-300)) :]
        for v in list(null) + [null.sum(axis=0)] if len(null) else []:
            w = v[:-1]
            if np.all(w > 1e-9) or np.all(w < -1e-9):
                w = np.abs(w)
                w = w / np.min(w)
                cand = np.round(w * np.arange(1, 13)[:, None])  # small rational scale
                for row in cand:
                    if np.max(row) <= 24 and np.all(row >= 1):
                        scale = row[0] / w[0]
                        if np.allclose(w * scale, row, atol=1e-8):
                            ints = tuple(int(x) for x in row)
                            delta = float(A[0, :-1] @ row)
                            if np.allclose(A @ np.concatenate([row, [delta]]), 0, atol=1e-8):
                                return ints
        return None

    def validate(self, rng_seed=0, samples=32):
        """Numerical sanity checks on the stated invariants.

        Samples random points z != 0 and requires that tangent_basis succeeds,
        i.e. the singular set does not show up at generic points.  If the model
        carries an attached integral, it is checked to be constant along the
        field (df(F) = 0 at the samples).
        """
        rng = np.random.default_rng(rng_seed)
        for _ in range(samples):
            z = rng.standard_normal(self.n) + 1j * rng.standard_normal(self.n)
            z /= np.linalg.norm(z)
            z *= rng.uniform(0.3, 1.5)
            tangent_basis(self, z)
            if self.kind == "vector_field" and self.integral is not None:
                df = jacobian_poly(self.integral, z)[0]
                F = eval_poly(self.field, z)
                drift = abs(df @ F)
                scale = np.linalg.norm(df) * np.linalg.norm(F)
                if drift > 1e-9 * max(scale, 1e-30):
                    raise ModelError(
                        "attached integral is not constant along the field "
                        f"(|df(F)| = {drift:.3e} at a sample point)"
                    )
        return self


@dataclass(frozen=True)
class TangentFrame:
    """Orthonormal complex basis of T_z L_z plus the raw generators used."""

    point: np.ndarray           # (n,)
    basis: np.ndarray           # (d, n), Hermitian-orthonormal rows
    raw_generators: np.ndarray  # (k, n)
    pivot: int = None           # first-integral pivot index, when applicable


@dataclass(frozen=True)
class ChartDescriptor:
    """Second-order data of a holomorphic chart w -> gamma(w) onto the leaf.

    gamma1[i, a] = d gamma_a / d w_i at w = 0
    gamma2[i, l, a] = d^2 gamma_a / d w_i d w_l at w = 0
    """

    point: np.ndarray
    gamma1: np.ndarray  # (d, n)
    gamma2: np.ndarray  # (d, d, n)
    pivot: int = None
    coords: tuple = ()  # ambient indices serving as chart coordinates (first_integral)


def raw_generators(model, z, pivot=None):
    """Unreduced tangent generators at z (rows).

    For first integrals this is the pivot family v_{p,k}, k != p, where
    p = argmax_j |df/dz_j| with lowest-index tie break.  A pivot may be forced
    to keep the family smooth across argmax switches.  Returns (rows, pivot).
    """
    z = as_cvec(z, model.n)
    if model.kind == "vector_field":
        return eval_poly(model.field, z)[None, :], None
    if model.kind == "linear_action":
        return model.action * z[None, :], None
    df = jacobian_poly(model.integral, z)[0]
    if pivot is None:
        pivot = int(np.argmax(np.abs(df)))  # argmax takes the lowest index on ties
    rows = np.zeros((model.n - 1, model.n), dtype=np.complex128)
    for i, k in enumerate(idx for idx in range(model.n) if idx != pivot):
        rows[i, pivot] = df[k]
        rows[i, k] = -df[pivot]
    return rows, pivot


def _full_generators(model, z):
    """All n(n-1)/2 pair generators of a first-integral model."""
    df = jacobian_poly(model.integral, z)[0]
    n = model.n
    rows = []
    for j in range(n):
        for k in range(j + 1, n):
            v = np.zeros(n, dtype=np.complex128)
            v[j] = df[k]
            v[k] = -df[j]
            rows.append(v)
    return np.array(rows)


def _mgs(rows, d, rank_tol=1e-12):
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    Returns up to d orthonormal rows; vectors that drop below rank_tol of
    their original norm are discarded as dependent.
    """
    basis = []
    for v in rows:
        norm0 = np.linalg.norm(v)
        if norm0 < _GEN_FLOOR:
            continue
        w = v.copy()
        for _ in range(2):  # re-orthogonalize for stability near dependence
            for b in basis:
                w = w - (w @ np.conj(b)) * b
        norm = np.linalg.norm(w)
        if norm > rank_tol * norm0:
            basis.append(w / norm)
        if len(basis) == d:
            break
    return np.array(basis) if basis else np.zeros((0, rows.shape[1]), dtype=np.complex128)


def tangent_basis(model, z, pivot=None):
    """Orthonormal basis of the leaf tangent space at a regular point z."""
    z = as_cvec(z, model.n)
    if np.linalg.norm(z) == 0.0:
        raise SingularPointError("tangent space is 0-dimensional at the origin")
    rows, pivot = raw_generators(model, z, pivot=pivot)
    norms = np.linalg.norm(rows, axis=1)
    if np.all(norms < _GEN_FLOOR):
        raise SingularPointError(
            f"all tangent generators vanish at {z} (norm < {_GEN_FLOOR:g})"
        )
    basis = _mgs(rows, model.dim)
    if basis.shape[0] < model.dim and model.kind == "first_integral":
        # pivot family degenerated; fall back to the full pair family
        rows = _full_generators(model, z)
        basis = _mgs(rows, model.dim)
    if basis.shape[0] < model.dim:
        raise DegenerateDistributionError(
            f"tangent generators have numerical rank {basis.shape[0]} < {model.dim}",
            rank=basis.shape[0],
        )
    return TangentFrame(point=z, basis=basis, raw_generators=rows, pivot=pivot)


def leaf_chart(model, z):
    """Second-order holomorphic chart of the leaf through z.

    first_integral: the implicit chart solving f = const for the pivot
    coordinate; vector_field: the flow-time chart of F; linear_action: the
    m-parameter orbit chart z -> z * exp(sum w_i lam^i).
    """
    z = as_cvec(z, model.n)
    n, d = model.n, model.dim
    if model.kind == "vector_field":
        F = eval_poly(model.field, z)
        JF = jacobian_poly(model.field, z)
        return ChartDescriptor(
            point=z,
            gamma1=F[None, :],
            gamma2=(JF @ F)[None, None, :],
        )
    if model.kind == "linear_action":
        g1 = model.action * z[None, :]
        g2 = np.einsum("ia,la,a->ila", model.action, model.action, z)
        return ChartDescriptor(point=z, gamma1=g1, gamma2=g2)
    df = jacobian_poly(model.integral, z)[0]
    if np.all(np.abs(df) < _PIVOT_FLOOR):
        raise NearCriticalError(
            f"no chart pivot: all |df/dz_j| < {_PIVOT_FLOOR:g} at {z}"
        )
    p = int(np.argmax(np.abs(df)))
    d2f = poly_second(model.integral, z)[0]
    coords = tuple(k for k in range(n) if k != p)
    w = -df[list(coords)] / df[p]  # implicit first derivatives dz_p/dz_k
    g1 = np.zeros((d, n), dtype=np.complex128)
    for i, k in enumerate(coords):
        g1[i, k] = 1.0
        g1[i, p] = w[i]
    # second implicit derivatives: differentiate f(z) = c twice
    g2 = np.zeros((d, d, n), dtype=np.complex128)
    for i, k in enumerate(coords):
        for l, m in enumerate(coords):
            s = -(
                d2f[k, m]
                + d2f[k, p] * w[l]
                + d2f[m, p] * w[i]
                + d2f[p, p] * w[i] * w[l]
            ) / df[p]
            g2[i, l, p] = s
    return ChartDescriptor(point=z, gamma1=g1, gamma2=g2, pivot=p, coords=coords)
