"""Builders for the model families used throughout the experiments and CLI."""

from __future__ import annotations

import numpy as np

from .calc import MorseModel, PolyMap
from .errors import InputError
from .foliation import FoliationModel

__all__ = [
    "fermat",
    "pham_brieskorn",
    "pham_brieskorn_field",
    "rotation_field",
    "weighted_quadric",
    "weighted_quadric_morse",
    "linear_flow",
    "linear_action_model",
    "twisted_cycle",
    "monomial_pair",
    "meersseman_example",
    "linear_domain",
    "siegel_condition",
    "weak_hyperbolicity",
]


def _expo(n, idx, p):
    e = [0] * n
    e[idx] = p
    return tuple(e)


def fermat(n, k, lam=None):
    """Codimension-1 foliation of lam_1 z_1^k + ... + lam_n z_n^k."""
    if k < 2:
        raise InputError("Fermat family needs k >= 2")
    lam = [1.0] * n if lam is None else list(lam)
    if len(lam) != n:
        raise InputError("need one coefficient per variable")
    terms = [(lam[j], _expo(n, j, k)) for j in range(n)]
    return FoliationModel.from_first_integral(PolyMap.scalar(n, terms))


def pham_brieskorn(p, q):
    """Plane-curve family z_1^p - z_2^q as a first integral (p, q >= 2)."""
    if p < 2 or q < 2:
        raise InputError("Pham-Brieskorn family needs p, q >= 2")
    f = PolyMap.scalar(2, [(1.0, (p, 0)), (-1.0, (0, q))])
    return FoliationModel.from_first_integral(f)


def pham_brieskorn_field(p, q):
    """The same foliation as a vector field (q z_2^{q-1}, p z_1^{p-1})."""
    if p < 2 or q < 2:
        raise InputError("Pham-Brieskorn family needs p, q >= 2")
    F = PolyMap(
        n_in=2,
        n_out=2,
        terms=(
            ((float(q), (0, q - 1)),),
            ((float(p), (p - 1, 0)),),
        ),
    )
    f = PolyMap.scalar(2, [(1.0, (p, 0)), (-1.0, (0, q))])
    return FoliationModel.from_vector_field(F, integral=f)


def rotation_field():
    """The linear rotation field (-z_2, z_1); first integral z_1^2 + z_2^2."""
    F = PolyMap(n_in=2, n_out=2, terms=(((-1.0, (0, 1)),), ((1.0, (1, 0)),)))
    f = PolyMap.scalar(2, [(1.0, (2, 0)), (1.0, (0, 2))])
    return FoliationModel.from_vector_field(F, integral=f)


def weighted_quadric():
    """First integral z_1^2 + z_2^2 (paired with an anisotropic metric)."""
    f = PolyMap.scalar(2, [(1.0, (2, 0)), (1.0, (0, 2))])
    return FoliationModel.from_first_integral(f)


def weighted_quadric_morse(a=(2.0, 1.0), b=(2.0, 1.0)):
    """The anisotropic Morse function that splits the quadric's contacts."""
    return MorseModel.weighted(a, b)


def linear_flow(lams):
    """Diagonal linear vector field with the given eigenvalues (dimension 1)."""
    return FoliationModel.from_linear_action(np.asarray(lams, dtype=np.complex128))


def linear_action_model(lam_matrix):
    """Linear C^m-action from an (m, n) eigenvalue matrix."""
    return FoliationModel.from_linear_action(np.asarray(lam_matrix, dtype=np.complex128))


def twisted_cycle(lams, power=2):
    """Cyclic monomial field (lam_1 z_2^a, lam_2 z_3^a, ..., lam_n z_1^a)."""
    lams = list(lams)
    n = len(lams)
    if n < 2:
        raise InputError("twisted cycle needs at least 2 coordinates")
    if power < 2:
        raise InputError("twisted cycle needs power >= 2")
    comps = []
    for j in range(n):
        comps.append(((complex(lams[j]), _expo(n, (j + 1) % n, power)),))
    return FoliationModel.from_vector_field(PolyMap(n_in=n, n_out=n, terms=tuple(comps)))


def monomial_pair(lam1, lam2, a1, a2, swapped=False):
    """Plane fields (lam_1 z_1^{a_1}, lam_2 z_2^{a_2}) or the swapped variant."""
    if a1 < 2 or a2 < 2:
        raise InputError("monomial pair needs exponents >= 2")
    if swapped:
        comps = (((complex(lam1), (0, a2)),), ((complex(lam2), (a1, 0)),))
    else:
        comps = (((complex(lam1), (a1, 0)),), ((complex(lam2), (0, a2)),))
    return FoliationModel.from_vector_field(PolyMap(n_in=2, n_out=2, terms=comps))


def meersseman_example():
    """A generic linear C^2-action on C^5 in the Siegel domain.

    The eigenvalue columns are (zeta^k, zeta^{2k}) for the fifth roots of
    unity; their barycenter is 0, which puts the action in the Siegel domain,
    and no affine hyperplane through four of the five points passes through 0.
    """
    zeta = np.exp(2j * np.pi / 5)
    k = np.arange(1, 6)
    lam = np.vstack([zeta**k, zeta ** (2 * k)])
    return FoliationModel.from_linear_action(lam)


def linear_domain(lams, tol=1e-12):
    """Poincare or Siegel domain of a 1-dimensional linear field.

    0 lies in the convex hull of the eigenvalues exactly when no open
    half-plane contains them all, i.e. the largest angular gap is <= pi.
    """
    lams = np.asarray(lams, dtype=np.complex128)
    lams = lams[np.abs(lams) > tol]
    if len(lams) == 0:
        return "siegel"
    angles = np.sort(np.angle(lams))
    gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * np.pi]]))
    return "siegel" if np.max(gaps) <= np.pi + 1e-12 else "poincare"


def siegel_condition(lam_matrix):
    """0 in the convex hull of the eigenvalue columns (linear feasibility)."""
    from scipy.optimize import linprog

    lam = np.asarray(lam_matrix, dtype=np.complex128)
    m, n = lam.shape
    pts = np.concatenate([lam.real, lam.imag], axis=0)  # (2m, n)
    A_eq = np.vstack([pts, np.ones((1, n))])
    b_eq = np.concatenate([np.zeros(2 * m), [1.0]])
    res = linprog(np.zeros(n), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * n)
    return bool(res.status == 0)


def weak_hyperbolicity(lam_matrix, tol=1e-9):
    """No affine hyperplane through 2m of the n eigenvalue points contains 0."""
    from itertools import combinations

    lam = np.asarray(lam_matrix, dtype=np.complex128)
    m, n = lam.shape
    pts = np.concatenate([lam.real.T, lam.imag.T], axis=1)  # (n, 2m)
    for subset in combinations(range(n), 2 * m):
        P = pts[list(subset)]
        # hyperplane a . x = c through the 2m points: solve [P, -1] (a, c) = 0
        Mrows = np.concatenate([P, -np.ones((2 * m, 1))], axis=1)
        _, S, Vt = np.linalg.svd(Mrows)
        sol = Vt[-1]
        a, c = sol[:-1], sol[-1]
        norm = np.linalg.norm(a)
        if norm < tol:  # points affinely degenerate; hyperplane undetermined
            return False
        if abs(c) / norm < tol * max(1.0, np.max(np.abs(P))):
            return False
    return True
