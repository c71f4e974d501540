"""Locate and diagnose the polar variety: contacts of the foliation with the
level sets of the Morse function.

A point z is a contact exactly when every tangent frame vector pairs to zero
with the gradient of g, i.e. the complex numbers r_i = sum_j b_ij dg/dz_j all
vanish.  Newton root finding runs on the raw polynomial equations (holomorphic
generators contracted with the gradient) augmented with the sphere or fiber
constraint; the reported residual uses the orthonormal frame so tolerances are
scale-free.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import ndtri
from scipy.stats import qmc

from .calc import eval_poly, from_real, morse_jet, morse_jet_batch, to_real
from .errors import InputError, PreconditionError
from .foliation import tangent_basis
from .solver import NewtonOptions, newton_batch
from .systems import ContactSystem, raw_contact_rows, realify_rows

__all__ = [
    "ContactPoint",
    "SolveOptions",
    "ContactsResult",
    "ComponentCensus",
    "contact_residual",
    "contact_jacobian",
    "find_contacts_on_sphere",
    "find_contacts_on_fiber",
    "cluster_components",
    "smoothness_check",
    "contacts_to_jsonl",
    "contacts_from_jsonl",
]


@dataclass
class SolveOptions:
    tol: float = 1e-10            # acceptance threshold on the frame residual
    dedup: float = None           # duplicate radius; default 1e-6 * eps
    trust_radius: float = 1.0     # largest eps the germ analysis accepts
    rank_tol: float = 1e-8        # numerical-rank cutoff for smoothness
    degeneracy_tol: float = 1e-7  # relative eigenvalue cutoff for Morse classification
    on_m_tol: float = 1e-8        # how close a point must be to M for diagnostics
    link_scale: float = 3.0       # proximity-graph linking factor for clustering
    max_iter: int = 60
    workers: int = 1
    rng_seed: int = 0
    structured_seeds: bool = True
    classify: bool = True         # attach index/transversality to found points


@dataclass
class ContactPoint:
    """A located tangency of the foliation with a level set of g."""

    z: np.ndarray
    radius: float                  # sphere label eps, with g(z) = eps^2
    residual_norm: float
    morse_index: int = None        # None encodes a degenerate contact
    degenerate: bool = False
    eigenvalues: np.ndarray = None
    component_id: int = -1
    transversal: bool = False
    rank_ratio: float = 0.0
    smooth_reduced: bool = False
    tangent_rank: int = 0
    kernel_overlap: float = 0.0
    borderline: bool = False
    transversal_applicable: bool = True
    fiber_value: complex = None


@dataclass
class ComponentCensus:
    component_id: int
    size: int
    index_histogram: dict
    line_flag: bool
    line_residual: float
    all_transversal: bool
    all_smooth: bool


@dataclass
class ContactsResult:
    points: list
    census: list
    diagnostics: dict

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


# ---------------------------------------------------------------------------
# residual and jacobian at a single point
# ---------------------------------------------------------------------------

def contact_residual(model, g, z, frame=None):
    """Real 2d-vector (Re r_1, Im r_1, ...) of frame-gradient pairings."""
    frame = frame or tangent_basis(model, z)
    jet = morse_jet(g, frame.point)
    r = frame.basis @ jet.dz
    out = np.empty(2 * len(r))
    out[0::2] = r.real
    out[1::2] = r.imag
    return out


def _frame_coefficients(frame):
    """Matrix C with basis = C @ raw_generators (exact on the row space)."""
    return frame.basis @ np.linalg.pinv(frame.raw_generators)


def contact_jacobian(model, g, z, frame=None):
    """Derivative of contact_residual in the 2n interleaved real coordinates.

    The orthonormal frame is extended smoothly by letting the raw holomorphic
    generators vary while the Gram-Schmidt coefficients stay frozen at z; on
    the polar set this gives the exact derivative of any smooth frame choice.
    """
    frame = frame or tangent_basis(model, z)
    res_c, U, W, _ = raw_contact_rows(model, g, frame.point[None, :])
    if model.kind == "first_integral":
        keep = [k for k in range(model.n) if k != frame.pivot]
        res_c, U, W = res_c[:, keep], U[:, keep, :], W[:, keep, :]
    C = _frame_coefficients(frame)
    res_o = res_c[0] @ C.T
    Uo = np.einsum("ik,kl->il", C, U[0])
    Wo = np.einsum("ik,kl->il", C, W[0])
    _, J = realify_rows(res_o[None, :], Uo[None, :, :], Wo[None, :, :])
    return J[0]


def smoothness_check(model, g, z, opts=None):
    """SVD rank test of the contact Jacobian at a point of the polar set.

    Returns a dict with smooth_reduced, rank and rank_ratio (sigma_2d/sigma_1).
    """
    opts = opts or SolveOptions()
    frame = tangent_basis(model, z)
    res = contact_residual(model, g, z, frame=frame)
    jet = morse_jet(g, frame.point)
    scale = max(1.0, np.linalg.norm(jet.dz))
    rnorm = float(np.linalg.norm(res))
    if rnorm > opts.on_m_tol * scale:
        raise PreconditionError(
            f"point is not on the polar set (residual {rnorm:.3e})", residual=rnorm
        )
    J = contact_jacobian(model, g, z, frame=frame)
    sigma = np.linalg.svd(J, compute_uv=False)
    smax = sigma[0] if sigma[0] > 0 else 1.0
    rank = int(np.sum(sigma > opts.rank_tol * smax))
    full = 2 * model.dim
    ratio = float(sigma[full - 1] / smax) if len(sigma) >= full else 0.0
    return {
        "smooth_reduced": bool(rank == full and ratio > opts.rank_tol),
        "rank": rank,
        "rank_ratio": ratio,
    }


# ---------------------------------------------------------------------------
# seeding
# ---------------------------------------------------------------------------

def _unit_roots(k):
    return np.exp(2j * np.pi * np.arange(k) / k)


def structured_directions(n):
    """Axes, phase-decorated pair diagonals and full diagonals on S^{2n-1}."""
    dirs = [np.eye(n, dtype=np.complex128)[j] for j in range(n)]
    for j in range(n):
        for k in range(j + 1, n):
            for zeta in _unit_roots(12):
                v = np.zeros(n, dtype=np.complex128)
                v[j] = 1.0
                v[k] = zeta
                dirs.append(v / np.sqrt(2))
    if n > 2:
        roots = _unit_roots(6)
        grids = np.stack(
            np.meshgrid(*([roots] * (n - 1)), indexing="ij"), axis=-1
        ).reshape(-1, n - 1)
        ones = np.ones((grids.shape[0], 1), dtype=np.complex128)
        dirs.extend(np.concatenate([ones, grids], axis=1) / np.sqrt(n))
    return np.array(dirs)


def low_discrepancy_directions(n, count, rng_seed):
    """Deterministic Halton points pushed to uniform directions on S^{2n-1}."""
    sampler = qmc.Halton(d=2 * n, scramble=True, seed=rng_seed)
    x = sampler.random(count)
    u = ndtri(np.clip(x, 1e-12, 1 - 1e-12))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return from_real(u)


def scale_to_sphere(g, dirs, eps, newton_iters=12):
    """Scale unit directions u to points with g(t u) = eps^2."""
    val0, _, _, _ = morse_jet_batch(g, dirs)
    t = eps / np.sqrt(np.maximum(val0, 1e-300))
    if g.kind in ("round", "weighted"):
        return dirs * t[:, None]
    for _ in range(newton_iters):  # general g need not be quadratic
        Z = dirs * t[:, None]
        val, dz, _, _ = morse_jet_batch(g, Z)
        der = 2 * np.real(np.einsum("bj,bj->b", dz, dirs))
        t = t - (val - eps**2) / np.where(np.abs(der) > 1e-300, der, 1.0)
    return dirs * t[:, None]


def sphere_seeds(model, g, eps, n_seeds, opts):
    blocks = []
    if opts.structured_seeds:
        blocks.append(structured_directions(model.n))
    if n_seeds > 0:
        blocks.append(low_discrepancy_directions(model.n, n_seeds, opts.rng_seed))
    dirs = np.concatenate(blocks, axis=0)
    return scale_to_sphere(g, dirs, eps)


def _axis_seeds(f, t):
    """Exact fiber points on coordinate axes where f restricts to a monomial."""
    seeds = []
    n = f.n_in
    for j in range(n):
        axis_terms = [
            (c, e) for c, e in f.terms[0] if all(e[i] == 0 for i in range(n) if i != j)
        ]
        axis_terms = [(c, e) for c, e in axis_terms if sum(e) > 0]
        if len(axis_terms) != 1:
            continue
        c, e = axis_terms[0]
        k = e[j]
        if abs(c) < 1e-300:
            continue
        base = (t / c) ** (1.0 / k)
        for l in range(k):
            z = np.zeros(n, dtype=np.complex128)
            z[j] = base * np.exp(2j * np.pi * l / k)
            seeds.append(z)
    return seeds


def fiber_seeds(model, g, t, n_seeds, opts, extra=None):
    f = model.integral
    deg = max(1, f.degree)
    r_star = max(abs(t), 1e-6) ** (1.0 / deg)
    dirs = low_discrepancy_directions(model.n, n_seeds, opts.rng_seed)
    radii = r_star * np.exp(
        np.linspace(np.log(0.35), np.log(2.8), len(dirs))
    )
    blocks = [dirs * radii[:, None]]
    axis = _axis_seeds(f, t)
    if axis:
        blocks.append(np.array(axis))
    if opts.structured_seeds:
        blocks.append(structured_directions(model.n) * r_star)
    if extra is not None and len(extra):
        blocks.append(np.asarray(extra, dtype=np.complex128))
    return np.concatenate(blocks, axis=0)


# ---------------------------------------------------------------------------
# deduplication and clustering
# ---------------------------------------------------------------------------

class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            # keep the smaller index as representative (canonical order)
            if ri < rj:
                self.parent[rj] = ri
            else:
                self.parent[ri] = rj


def _canonical_order(Z):
    keys = [tuple(np.round(to_real(z), 12)) for z in Z]
    return sorted(range(len(Z)), key=lambda i: keys[i])


def _dedup(Z, system, dedup_radius, pair_window, rank_tol=1e-8):
    """Collapse duplicates after projecting differences off the local kernel.

    Points whose difference lies along the tangent of the solution manifold
    (the kernel of the augmented Jacobian) are distinct samples of a contact
    curve and are kept apart; only the transverse part of the difference is
    compared against the dedup radius.
    """
    if len(Z) == 0:
        return Z
    order = _canonical_order(Z)
    Z = Z[order]
    Y = to_real(Z)
    tree = cKDTree(Y)
    pairs = sorted(tree.query_pairs(pair_window))
    uf = _UnionFind(len(Z))
    kernels = {}

    def kernel(i):
        if i not in kernels:
            _, J = system(Z[i][None, :])
            _, S, Vt = np.linalg.svd(J[0])
            smax = S[0] if len(S) and S[0] > 0 else 1.0
            rank = int(np.sum(S > rank_tol * smax))
            kernels[i] = Vt[rank:].T
        return kernels[i]

    for i, j in pairs:
        d = Y[j] - Y[i]
        if np.linalg.norm(d) < dedup_radius:
            uf.union(i, j)
            continue
        K = kernel(min(i, j))
        perp = d - K @ (K.T @ d)
        if np.linalg.norm(perp) < dedup_radius:
            uf.union(i, j)
    reps = sorted({uf.find(i) for i in range(len(Z))})
    return Z[reps]


def _same_orbit(zi, zj, weights, tol=1e-7):
    """True when zj lies on the weighted phase orbit of zi.

    The orbit is {(exp(i w_k t) z_k)}; moduli must match and a common phase t
    must reconcile all coordinates.  Candidate values of t come from the
    best-conditioned coordinate.
    """
    scale = max(np.max(np.abs(zi)), 1e-300)
    if np.max(np.abs(np.abs(zi) - np.abs(zj))) > tol * scale:
        return False
    live = np.abs(zi) > tol * scale
    if not np.any(live):
        return True
    phi = np.angle(zj[live] / zi[live])
    w = np.asarray(weights, dtype=float)[live]
    j0 = int(np.argmax(np.abs(zi)[live]))
    w0 = int(round(w[j0]))
    for k in range(w0):
        t = (phi[j0] + 2 * np.pi * k) / w0
        err = np.angle(np.exp(1j * (w * t - phi)))
        if np.max(np.abs(err)) < 1e-6:
            return True
    return False


def cluster_components(points, opts=None, symmetry=None):
    """Union-find on the proximity graph; labels points in place.

    Edges link points closer than link_scale times the smaller of the two
    local nearest-neighbour spacings, so an isolated point never swallows a
    densely sampled curve.  A phase symmetry of the polar set, when the model
    has one ("torus" for diagonal linear actions with the round metric,
    ("cone", weights) for quasi-homogeneous models), links whole orbits; that
    linking is exact, not heuristic, since orbits stay inside one component.
    Returns the census list.
    """
    opts = opts or SolveOptions()
    if not points:
        return []
    Z = np.array([p.z for p in points])
    Y = to_real(Z)
    m = len(points)
    uf = _UnionFind(m)
    if m > 1:
        tree = cKDTree(Y)
        nn_dist, _ = tree.query(Y, k=2)
        spacing = nn_dist[:, 1]
        cap = opts.link_scale * np.max(spacing)
        for i, j in sorted(tree.query_pairs(cap)):
            if np.linalg.norm(Y[i] - Y[j]) < opts.link_scale * min(spacing[i], spacing[j]):
                uf.union(i, j)
        if symmetry is not None:
            kind = symmetry[0]
            moduli = np.abs(Z)
            scale = np.max(moduli)
            order = np.lexsort(np.round(moduli / max(scale, 1e-300), 6).T)
            for a in range(m - 1):  # moduli-sorted sweep keeps this near-linear
                i = order[a]
                for b in range(a + 1, m):
                    j = order[b]
                    if uf.find(i) == uf.find(j):
                        continue
                    if np.max(np.abs(moduli[i] - moduli[j])) > 1e-6 * scale:
                        break
                    if kind == "torus":
                        uf.union(i, j)
                    elif _same_orbit(Z[i], Z[j], symmetry[1]):
                        uf.union(i, j)
    roots = {}
    for i, p in enumerate(points):
        r = uf.find(i)
        if r not in roots:
            roots[r] = len(roots)
        p.component_id = roots[r]
    return _census(points)


def polar_symmetry(model, g):
    """Phase symmetry of the polar set, if one is known to exist."""
    if g.kind != "round":
        return None
    if model.kind == "linear_action":
        return ("torus",)
    w = model.quasi_weights()
    return ("cone", w) if w is not None else None


def _census(points):
    comps = {}
    for p in points:
        comps.setdefault(p.component_id, []).append(p)
    out = []
    for cid in sorted(comps):
        members = comps[cid]
        hist = {}
        for p in members:
            if p.degenerate:
                key = "degenerate"
            elif p.morse_index is None:
                key = "unclassified"
            else:
                key = int(p.morse_index)
            hist[key] = hist.get(key, 0) + 1
        Z = np.array([p.z for p in members])
        if len(members) >= 2:
            s = np.linalg.svd(Z, compute_uv=False)
            line_res = float(s[1] / s[0]) if s[0] > 0 else 0.0
        else:
            line_res = 0.0
        out.append(
            ComponentCensus(
                component_id=cid,
                size=len(members),
                index_histogram=hist,
                line_flag=line_res < 1e-8,
                line_residual=line_res,
                all_transversal=all(p.transversal for p in members),
                all_smooth=all(p.smooth_reduced for p in members),
            )
        )
    return out


# ---------------------------------------------------------------------------
# the solvers
# ---------------------------------------------------------------------------

def _accept_contacts(model, g, Z, check):
    """Filter converged iterates by the frame residual and constraint error."""
    kept = []
    residuals = []
    for z in Z:
        try:
            frame = tangent_basis(model, z)
        except Exception:
            continue
        res = contact_residual(model, g, z, frame=frame)
        rnorm = float(np.linalg.norm(res))
        if not check(z, rnorm):
            continue
        kept.append(z)
        residuals.append(rnorm)
    if kept:
        return np.array(kept), np.array(residuals)
    return np.zeros((0, model.n), dtype=np.complex128), np.zeros(0)


def _enrich(model, g, Z, radius, opts, fiber_value=None):
    """Build classified ContactPoint records for deduplicated solutions."""
    from .morse import classify_contact   # late import, avoids a cycle
    from .transversality import is_transversal

    points = []
    for z in Z:
        frame = tangent_basis(model, z)
        res = contact_residual(model, g, z, frame=frame)
        p = ContactPoint(
            z=z,
            radius=float(np.sqrt(max(morse_jet(g, z).value, 0.0))),
            residual_norm=float(np.linalg.norm(res)),
            fiber_value=fiber_value,
        )
        if opts.classify:
            sm = smoothness_check(model, g, z, opts)
            p.smooth_reduced = sm["smooth_reduced"]
            p.rank_ratio = sm["rank_ratio"]
            p.tangent_rank = sm["rank"]
            cls = classify_contact(model, g, z, tol=opts.degeneracy_tol, opts=opts)
            p.morse_index = cls.index
            p.degenerate = cls.degenerate
            p.eigenvalues = cls.eigenvalues
            tv = is_transversal(model, g, z, opts=opts)
            p.transversal_applicable = tv.applicable
            p.transversal = bool(tv.applicable and tv.transversal)
            p.kernel_overlap = tv.kernel_overlap
            p.borderline = tv.borderline
        points.append(p)
    return points


def find_contacts_on_sphere(model, g, eps, n_seeds=1024, opts=None):
    """Newton search for the polar set on the g-sphere of label eps.

    Returns a ContactsResult; an empty point list with a diagnostics record
    (not an error) when no seed converges.
    """
    opts = opts or SolveOptions()
    if eps <= 0 or eps > opts.trust_radius:
        raise InputError(
            f"eps = {eps} is outside the trust radius {opts.trust_radius}"
        )
    system = ContactSystem(model, g, constraint=("sphere", eps))
    seeds = sphere_seeds(model, g, eps, n_seeds, opts)
    newton = NewtonOptions(max_iter=opts.max_iter)
    sols, converged, info = newton_batch(system, seeds, newton, workers=opts.workers)
    sols = sols[converged]

    def check(z, rnorm):
        val = morse_jet(g, z).value
        return rnorm < opts.tol and abs(val - eps**2) <= 1e-10 * eps**2

    Z, _ = _accept_contacts(model, g, sols, check)
    dedup = opts.dedup if opts.dedup is not None else 1e-6 * eps
    Z = _dedup(Z, system, dedup, pair_window=max(50 * dedup, 1e-2 * eps))
    points = _enrich(model, g, Z, eps, opts)
    census = cluster_components(points, opts, symmetry=polar_symmetry(model, g))
    diagnostics = {
        "eps": eps,
        "n_seeds": int(len(seeds)),
        "n_converged": int(np.sum(converged)),
        "n_accepted": int(len(Z)),
        "mode": "sphere",
    }
    if not points:
        diagnostics["note"] = _emptiness_note(model)
    return ContactsResult(points=points, census=census, diagnostics=diagnostics)


def find_contacts_on_fiber(model, g, t, n_seeds=2048, opts=None, extra_seeds=None):
    """Contacts restricted to one leaf f = t of a model with a first integral."""
    opts = opts or SolveOptions()
    if model.integral is None:
        raise InputError("fiber search needs a model with a first integral")
    if abs(t) == 0:
        raise InputError("fiber value 0 is the singular fiber")
    system = ContactSystem(model, g, constraint=("fiber", t))
    seeds = fiber_seeds(model, g, t, n_seeds, opts, extra=extra_seeds)
    newton = NewtonOptions(max_iter=opts.max_iter)
    sols, converged, _ = newton_batch(system, seeds, newton, workers=opts.workers)
    sols = sols[converged]

    def check(z, rnorm):
        fval = complex(eval_poly(model.integral, z)[0])
        return rnorm < opts.tol and abs(fval - t) <= 1e-10 * max(abs(t), 1.0)

    Z, _ = _accept_contacts(model, g, sols, check)
    dedup = opts.dedup if opts.dedup is not None else 1e-6 * max(abs(t) ** 0.5, 1.0)
    Z = _dedup(Z, system, dedup, pair_window=max(50 * dedup, 1e-2))
    points = _enrich(model, g, Z, None, opts, fiber_value=complex(t))
    census = cluster_components(points, opts)
    diagnostics = {
        "fiber": [t.real if isinstance(t, complex) else float(t),
                  t.imag if isinstance(t, complex) else 0.0],
        "n_seeds": int(len(seeds)),
        "n_converged": int(np.sum(converged)),
        "n_accepted": int(len(Z)),
        "mode": "fiber",
    }
    return ContactsResult(points=points, census=census, diagnostics=diagnostics)


def _emptiness_note(model):
    if model.kind == "linear_action" and model.dim == 1:
        from .models import linear_domain

        domain = linear_domain(model.action[0])
        if domain == "poincare":
            return (
                "empty polar set is expected: the eigenvalues lie in the "
                "Poincare domain (convex hull misses 0)"
            )
    return "no seed converged to a contact"


# ---------------------------------------------------------------------------
# serialization (JSON lines, fixed schema)
# ---------------------------------------------------------------------------

def contact_to_record(p):
    return {
        "z_re": [float(x) for x in p.z.real],
        "z_im": [float(x) for x in p.z.imag],
        "radius": float(p.radius),
        "residual": float(p.residual_norm),
        "index": None if p.degenerate else int(p.morse_index),
        "degenerate": bool(p.degenerate),
        "component": int(p.component_id),
        "transversal": bool(p.transversal),
        "rank_ratio": float(p.rank_ratio),
    }


def contacts_to_jsonl(points):
    return "".join(json.dumps(contact_to_record(p)) + "\n" for p in points)


def contacts_from_jsonl(text):
    records = []
    for line in text.splitlines():
        line = line.strip()
        if line:
            records.append(json.loads(line))
    return records
