"""Restricted Hessian of g on leaves, Morse-index classification, signed counts.

The Hessian of the restriction g|_leaf is assembled through a holomorphic leaf
chart gamma:

    A_il = sum_ab g_{z_a z_b} gamma1[i,a] gamma1[l,b] + sum_a g_{z_a} gamma2[i,l,a]
    B_il = sum_ab g_{z_a zbar_b} gamma1[i,a] conj(gamma1[l,b])

and converted to a real symmetric 2d x 2d matrix in interleaved chart
coordinates.  Eigenvalue signs (hence the index) do not depend on the chart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calc import morse_jet, real_hessian_from_pair
from .errors import DegenerateContactError, PreconditionError
from .foliation import leaf_chart

__all__ = [
    "RestrictedHessian",
    "Classification",
    "restricted_hessian",
    "classify_contact",
    "euler_count",
    "group_by_leaf",
]


@dataclass(frozen=True)
class RestrictedHessian:
    matrix: np.ndarray       # real symmetric (2d, 2d)
    eigenvalues: np.ndarray  # ascending
    chart: object


@dataclass(frozen=True)
class Classification:
    index: int          # None when degenerate
    eigenvalues: np.ndarray
    degenerate: bool


def restricted_hessian(model, g, z, chart=None):
    """Hessian of g restricted to the leaf through z, at z.

    z must be a regular point of the foliation; it need not lie on the polar
    set (off it the matrix is simply the second-order part of g along the
    chart).
    """
    chart = chart or leaf_chart(model, z)
    jet = morse_jet(g, chart.point)
    g1, g2 = chart.gamma1, chart.gamma2
    A = np.einsum("ab,ia,lb->il", jet.dzz, g1, g1) + np.einsum(
        "a,ila->il", jet.dz, g2
    )
    B = np.einsum("ab,ia,lb->il", jet.dzzbar, g1, np.conj(g1))
    H = real_hessian_from_pair(A, B)
    H = 0.5 * (H + H.T)  # symmetrize away rounding
    return RestrictedHessian(matrix=H, eigenvalues=np.linalg.eigvalsh(H), chart=chart)


def _require_on_polar_set(model, g, z, on_tol):
    from .polar import contact_residual

    res = contact_residual(model, g, z)
    jet = morse_jet(g, z)
    scale = max(1.0, float(np.linalg.norm(jet.dz)))
    rnorm = float(np.linalg.norm(res))
    if rnorm > on_tol * scale:
        raise PreconditionError(
            f"point is not a contact (residual {rnorm:.3e})", residual=rnorm
        )


def classify_contact(model, g, z, tol=1e-7, opts=None):
    """Morse data of a contact: index, eigenvalues, degeneracy flag.

    index counts eigenvalues below -tol * spectral norm; the contact is
    degenerate when some eigenvalue has magnitude <= tol * spectral norm.
    """
    on_tol = opts.on_m_tol if opts is not None else 1e-8
    _require_on_polar_set(model, g, z, on_tol)
    hess = restricted_hessian(model, g, z)
    eigs = hess.eigenvalues
    scale = float(np.max(np.abs(eigs)))
    if scale == 0.0:
        return Classification(index=None, eigenvalues=eigs, degenerate=True)
    degenerate = bool(np.min(np.abs(eigs)) <= tol * scale)
    index = None if degenerate else int(np.sum(eigs < -tol * scale))
    return Classification(index=index, eigenvalues=eigs, degenerate=degenerate)


def euler_count(contacts):
    """Signed count over the contacts of one leaf: +1 even index, -1 odd.

    Refuses when any contact is degenerate; the count has no meaning then.
    """
    bad = [p for p in contacts if p.degenerate or p.morse_index is None]
    if bad:
        raise DegenerateContactError(
            f"{len(bad)} degenerate contact(s); signed count undefined", points=bad
        )
    return int(sum(1 if p.morse_index % 2 == 0 else -1 for p in contacts))


def group_by_leaf(points, model, tol=1e-8):
    """Partition contacts by leaf.

    With a first integral available the fiber value indexes the leaf; points
    whose f-values differ by less than tol (relative) share a leaf.  Returns
    a list of lists.
    """
    from .calc import eval_poly

    if model.integral is None:
        raise PreconditionError(
            "leaf grouping without a first integral needs flow connectivity; "
            "attach an integral or group orbits yourself"
        )
    values = [complex(eval_poly(model.integral, p.z)[0]) for p in points]
    scale = max([abs(v) for v in values] + [1.0])
    groups = []
    anchors = []
    for p, v in sorted(zip(points, values), key=lambda t: (t[1].real, t[1].imag)):
        for gi, a in enumerate(anchors):
            if abs(v - a) <= tol * scale:
                groups[gi].append(p)
                break
        else:
            anchors.append(v)
            groups.append([p])
    return groups
