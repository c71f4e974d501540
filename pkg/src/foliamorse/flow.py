"""Gradient flow on the leaves: tangent projection of grad g, orbit
integration, alpha-limit classification.

Orbits are integrated with an embedded Dormand-Prince 5(4) pair.  Backward
integration follows -proj(grad g), so the Morse value decreases along the
orbit; a step is only accepted when both the local error test and the
monotonicity of g pass.  For first-integral models every accepted step is
followed by one Newton correction of the pivot coordinate back onto the leaf.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calc import eval_poly, jacobian_poly, morse_jet, to_real
from .errors import InputError
from .foliation import tangent_basis
from .polar import SolveOptions, contact_residual, _enrich
from .solver import NewtonOptions, newton_point
from .systems import ContactSystem

__all__ = ["FlowOptions", "OrbitTrace", "leaf_gradient", "integrate_orbit", "classify_alpha_limit"]

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


@dataclass
class FlowOptions:
    origin_radius: float = None   # default 1e-4 * sqrt(g(z0))
    exit_radius: float = None     # default 10 * sqrt(g(z0))
    budget: int = 10**6
    fixpoint_tol: float = 1e-9
    drift_tol: float = 1e-8
    rtol: float = 1e-10
    atol: float = 1e-12
    max_time: float = 1e6
    max_samples: int = 4096


@dataclass
class OrbitTrace:
    samples: list                 # (time, z, g_value) triples
    termination: str              # origin | contact | leaf_exit | budget_exhausted | inconclusive
    contact: object = None        # ContactPoint when termination == "contact"
    invariant_drift: float = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def times(self):
        return np.array([s[0] for s in self.samples])

    @property
    def g_values(self):
        return np.array([s[2] for s in self.samples])


def leaf_gradient_c(model, g, z, frame=None):
    """Projection of grad g onto the leaf tangent space, as a complex vector."""
    frame = frame or tangent_basis(model, z)
    jet = morse_jet(g, frame.point)
    grad = 2.0 * np.conj(jet.dz)
    coeff = frame.basis.conj() @ grad   # <grad, b_i> = sum_j grad_j conj(b_ij)
    return coeff @ frame.basis


def leaf_gradient(model, g, z):
    """Leaf-tangent part of the gradient of g, in interleaved real coordinates."""
    return to_real(leaf_gradient_c(model, g, z))


def _confirm_contact(model, g, z, opts, solve_opts):
    """Polish a suspected fixed point into a classified ContactPoint."""
    system = ContactSystem(model, g)
    sol, converged = newton_point(system, z, NewtonOptions(max_iter=40))
    if not converged:
        return None
    if np.linalg.norm(sol - z) > 0.5 * max(np.linalg.norm(z), 1e-6):
        return None
    res = contact_residual(model, g, sol)
    if np.linalg.norm(res) > solve_opts.tol * 10:
        return None
    fiber = None
    if model.integral is not None:
        fiber = complex(eval_poly(model.integral, sol)[0])
    return _enrich(model, g, sol[None, :], None, solve_opts, fiber_value=fiber)[0]


def integrate_orbit(model, g, z0, direction="backward", opts=None, solve_opts=None):
    """Integrate the leaf gradient flow from z0 until a terminal event.

    direction "backward" descends g (the alpha-limit direction); "forward"
    ascends it.  Sample times are emitted negative for backward orbits.
    """
    if direction not in ("backward", "forward"):
        raise InputError(f"direction must be backward or forward, not {direction!r}")
    opts = opts or FlowOptions()
    solve_opts = solve_opts or SolveOptions()
    z = np.asarray(z0, dtype=np.complex128).copy()
    sign = -1.0 if direction == "backward" else 1.0

    g0 = morse_jet(g, z).value
    eps0 = float(np.sqrt(max(g0, 0.0)))
    origin_radius = opts.origin_radius if opts.origin_radius is not None else 1e-4 * eps0
    exit_radius = opts.exit_radius if opts.exit_radius is not None else 10.0 * eps0

    # re-project whenever a leaf equation is available; pure vector-field
    # models have none, so there drift is only monitored, never corrected
    c_leaf = None
    if model.integral is not None:
        c_leaf = complex(eval_poly(model.integral, z)[0])
    project = model.integral is not None

    def rhs(y):
        return sign * leaf_gradient_c(model, g, y)

    samples = [(0.0, z.copy(), g0)]
    stride = 1
    t = 0.0
    drift = 0.0
    gcur = g0
    k1 = rhs(z)
    vnorm = np.linalg.norm(k1)
    h = 0.01 * (1.0 + np.linalg.norm(z)) / max(vnorm, 1e-12)
    termination = None
    contact = None
    diag = {}
    steps = 0

    while steps < opts.budget:
        znorm = np.linalg.norm(z)
        if znorm < origin_radius:
            termination = "origin"
            break
        if znorm > exit_radius:
            termination = "leaf_exit"
            break
        if np.linalg.norm(k1) < opts.fixpoint_tol:
            contact = _confirm_contact(model, g, z, opts, solve_opts)
            if contact is not None:
                termination = "contact"
            else:
                termination = "inconclusive"
                diag["reason"] = "gradient vanished but no contact confirmed nearby"
            break
        if abs(t) > opts.max_time:
            termination = "budget_exhausted"
            break

        # one embedded DP54 step
        k = [k1]
        for i in range(1, 7):
            zi = z + h * sum(a * ki for a, ki in zip(_A[i], k))
            k.append(rhs(zi))
        k = np.array(k)
        z5 = z + h * (_B5 @ k)
        z4 = z + h * (_B4 @ k)
        scale = opts.atol + opts.rtol * max(np.linalg.norm(z), np.linalg.norm(z5))
        err = np.linalg.norm(z5 - z4) / scale
        if err > 1.0:
            h *= max(0.2, 0.9 * err ** (-0.2))
            steps += 1
            if h < 1e-15 * (1.0 + np.linalg.norm(z)):
                termination = "inconclusive"
                diag["reason"] = "step size underflow (likely a degenerate contact)"
                break
            continue

        gnew = morse_jet(g, z5).value
        slack = 1e-12 * max(1.0, abs(gcur))
        monotone = gnew <= gcur + slack if direction == "backward" else gnew >= gcur - slack
        if not monotone:
            h *= 0.5
            steps += 1
            if h < 1e-15 * (1.0 + np.linalg.norm(z)):
                termination = "inconclusive"
                diag["reason"] = "monotonicity could not be maintained"
                break
            continue

        z = z5
        if project and c_leaf is not None:
            fz = jacobian_poly(model.integral, z)[0]
            p = int(np.argmax(np.abs(fz)))
            fval = complex(eval_poly(model.integral, z)[0])
            if abs(fz[p]) > 1e-300:
                z[p] -= (fval - c_leaf) / fz[p]
        if c_leaf is not None:
            fval = complex(eval_poly(model.integral, z)[0])
            drift = max(drift, abs(fval - c_leaf))
        t += sign * h
        gcur = morse_jet(g, z).value
        k1 = rhs(z)  # not FSAL after projection; recompute
        steps += 1
        if steps % stride == 0:
            samples.append((t, z.copy(), gcur))
            if len(samples) > opts.max_samples:
                samples = samples[::2]
                stride *= 2
        h *= min(5.0, max(0.2, 0.9 * err ** (-0.2))) if err > 0 else 5.0

    if termination is None:
        termination = "budget_exhausted"
    if not samples or not np.array_equal(samples[-1][1], z):
        samples.append((t, z.copy(), gcur))
    diag["steps"] = steps
    return OrbitTrace(
        samples=samples,
        termination=termination,
        contact=contact,
        invariant_drift=drift if c_leaf is not None else None,
        diagnostics=diag,
    )


def classify_alpha_limit(model, g, z0, opts=None, solve_opts=None):
    """Verdict on the backward limit of the orbit through z0.

    Returns (verdict, trace) with verdict one of origin, contact,
    inconclusive; contact traces carry the classified ContactPoint.
    """
    trace = integrate_orbit(model, g, z0, "backward", opts, solve_opts)
    if trace.termination in ("origin", "contact"):
        return trace.termination, trace
    return "inconclusive", trace
