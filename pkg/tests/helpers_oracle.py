"""Independent oracles used by the tests: finite differences and
numerically-integrated leaf charts.  Nothing here touches the analytic
derivative paths it is meant to check.
"""

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from foliamorse.calc import eval_poly, jacobian_poly, morse_jet, to_real, from_real
from foliamorse.foliation import leaf_chart


def fd_gradient(fun, y0, h=1e-5):
    """Central-difference gradient of a scalar function of a real vector."""
    y0 = np.asarray(y0, dtype=float)
    out = np.zeros_like(y0)
    for i in range(len(y0)):
        yp, ym = y0.copy(), y0.copy()
        yp[i] += h
        ym[i] -= h
        out[i] = (fun(yp) - fun(ym)) / (2 * h)
    return out


def fd_jacobian(fun, y0, h=1e-6):
    """Central-difference Jacobian of a vector function of a real vector."""
    y0 = np.asarray(y0, dtype=float)
    f0 = np.asarray(fun(y0))
    J = np.zeros((len(f0), len(y0)))
    for i in range(len(y0)):
        yp, ym = y0.copy(), y0.copy()
        yp[i] += h
        ym[i] -= h
        J[:, i] = (np.asarray(fun(yp)) - np.asarray(fun(ym))) / (2 * h)
    return J


def fd_hessian(fun, dim, h=1e-2):
    """Richardson-extrapolated second differences of fun: R^dim -> R at 0."""

    def d2(i, j, step):
        if i == j:
            e = np.zeros(dim)
            e[i] = step
            return (fun(e) - 2 * fun(np.zeros(dim)) + fun(-e)) / step**2
        ei = np.zeros(dim)
        ej = np.zeros(dim)
        ei[i] = step
        ej[j] = step
        return (
            fun(ei + ej) - fun(ei - ej) - fun(-ei + ej) + fun(-ei - ej)
        ) / (4 * step**2)

    H = np.zeros((dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            coarse = d2(i, j, h)
            fine = d2(i, j, h / 2)
            H[i, j] = H[j, i] = (4 * fine - coarse) / 3
    return H


def chart_map(model, z0):
    """Numerical leaf chart w -> gamma(w), independent of the analytic one.

    first_integral: non-pivot coordinates move by w, the pivot coordinate is
    recovered by a scalar Newton solve of f = f(z0).  linear_action: the
    exact exponential orbit map.  Linear vector fields: matrix exponential.
    Nonlinear vector fields: high-accuracy ODE integration of gamma' = w F.
    """
    n = model.n
    if model.kind == "first_integral":
        ch = leaf_chart(model, z0)
        p, coords = ch.pivot, list(ch.coords)
        f = model.integral
        c0 = complex(eval_poly(f, z0)[0])

        def gamma(w):
            z = np.array(z0, dtype=np.complex128)
            z[coords] += np.asarray(w, dtype=np.complex128)
            for _ in range(60):
                val = complex(eval_poly(f, z)[0]) - c0
                der = jacobian_poly(f, z)[0, p]
                step = val / der
                z[p] -= step
                if abs(step) < 1e-15 * (1 + abs(z[p])):
                    break
            return z

        return gamma, len(coords)

    if model.kind == "linear_action":
        lam = model.action

        def gamma(w):
            w = np.asarray(w, dtype=np.complex128)
            return z0 * np.exp(w @ lam)

        return gamma, lam.shape[0]

    # vector field
    if model.field.degree == 1:
        A = jacobian_poly(model.field, np.zeros(n, dtype=np.complex128))

        def gamma(w):
            return expm(complex(w[0]) * A) @ z0

        return gamma, 1

    def gamma(w):
        wc = complex(w[0])
        if wc == 0:
            return np.array(z0)

        def rhs(_s, y):
            return to_real(wc * eval_poly(model.field, from_real(y)[None, :])[0])

        sol = solve_ivp(
            rhs, (0.0, 1.0), to_real(z0), method="DOP853", rtol=1e-12, atol=1e-14
        )
        return from_real(sol.y[:, -1])

    return gamma, 1


def chart_hessian_oracle(model, g, z0, h=None):
    """FD Hessian of g along the numerically integrated leaf chart."""
    gamma, d = chart_map(model, z0)
    scale = max(np.linalg.norm(z0), 1e-3)
    if h is None:
        h = 1e-2 * scale

    def h_real(u):
        w = u[0::2] + 1j * u[1::2]
        return morse_jet(g, gamma(w)).value

    return fd_hessian(h_real, 2 * d, h=h)
