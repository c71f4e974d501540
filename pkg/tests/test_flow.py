import numpy as np
import pytest

from foliamorse import models
from foliamorse.calc import MorseModel, eval_poly, to_real
from foliamorse.errors import InputError
from foliamorse.flow import (
    FlowOptions,
    classify_alpha_limit,
    integrate_orbit,
    leaf_gradient,
    leaf_gradient_c,
)
from foliamorse.polar import SolveOptions, find_contacts_on_fiber

G2 = MorseModel.round(2)
G3 = MorseModel.round(3)
CUBE_ROOTS = np.exp(2j * np.pi * np.arange(3) / 3)


def test_radial_gradient_is_twice_z():
    m = models.linear_flow([1.0, 1.0])
    z = np.array([0.3 + 0.1j, -0.2])
    assert np.allclose(leaf_gradient(m, G2, z), to_real(2 * z))


def test_gradient_vanishes_at_contacts():
    m = models.rotation_field()
    assert np.linalg.norm(leaf_gradient(m, G2, [1.0, 1.0])) < 1e-12
    mp = models.pham_brieskorn_field(3, 4)
    assert np.linalg.norm(leaf_gradient(mp, G2, [0.5, 0.0])) < 1e-12


def test_projection_idempotent():
    rng = np.random.default_rng(1)
    m = models.fermat(3, 3)
    for _ in range(50):
        z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        v = leaf_gradient_c(m, G3, z)
        from foliamorse.foliation import tangent_basis

        fr = tangent_basis(m, z)
        v2 = (fr.basis.conj() @ v) @ fr.basis
        assert np.linalg.norm(v2 - v) < 1e-12 * max(1.0, np.linalg.norm(v))


def test_backward_orbit_poincare_reaches_origin():
    m = models.linear_flow([1.0, 2.0])
    tr = integrate_orbit(m, G2, [0.5, 0.5], "backward")
    assert tr.termination == "origin"
    g = tr.g_values
    assert np.all(np.diff(g) <= 1e-12 * np.maximum(1.0, np.abs(g[:-1])))
    assert np.all(np.diff(tr.times) < 0)  # backward time decreases


def test_forward_orbit_exits():
    m = models.linear_flow([1.0, 2.0])
    tr = integrate_orbit(m, G2, [0.5, 0.5], "forward")
    assert tr.termination == "leaf_exit"
    g = tr.g_values
    assert np.all(np.diff(g) >= -1e-12 * np.maximum(1.0, np.abs(g[:-1])))


def test_orbit_from_contact_is_fixed():
    m = models.pham_brieskorn_field(3, 4)
    tr = integrate_orbit(m, G2, [0.7, 0.0], "backward")
    assert tr.termination == "contact"
    assert len(tr.samples) == 1


def test_bad_direction():
    with pytest.raises(InputError):
        integrate_orbit(models.rotation_field(), G2, [1.0, 0.0], "sideways")


def test_quadric_orbit_hits_fiber_contact():
    m = models.weighted_quadric()
    g = models.weighted_quadric_morse()
    z0 = np.array([0.8 + 0.1j, 0.3 - 0.4j])
    c = complex(eval_poly(m.integral, z0)[0])
    verdict, tr = classify_alpha_limit(m, g, z0)
    assert verdict == "contact"
    assert tr.invariant_drift < 1e-8
    # the limit lies among the four contacts of this leaf
    target = find_contacts_on_fiber(m, g, c, n_seeds=600, opts=SolveOptions(rng_seed=2))
    dists = [np.linalg.norm(tr.contact.z - p.z) for p in target.points]
    assert min(dists) < 1e-6


def test_siegel_leaf_minimum():
    m = models.linear_flow(CUBE_ROOTS)
    z0 = np.ones(3) / np.sqrt(3) + np.array([0.05, -0.02, 0.01 + 0.03j])
    verdict, tr = classify_alpha_limit(m, G3, z0)
    assert verdict == "contact"
    assert tr.contact.morse_index == 0


def test_poincare_alpha_limit_origin():
    m = models.linear_flow([1.0, 1.0 + 1.0j])
    rng = np.random.default_rng(3)
    for _ in range(5):
        z0 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        z0 /= np.linalg.norm(z0)
        verdict, _ = classify_alpha_limit(m, G2, z0)
        assert verdict == "origin"


def test_pham_separatrix_to_origin():
    m = models.pham_brieskorn_field(3, 4)
    s = 0.6
    z0 = np.array([s ** (4 / 3), s])  # z1^3 = z2^4
    verdict, tr = classify_alpha_limit(m, G2, z0)
    assert verdict == "origin"
    assert tr.invariant_drift < 1e-10


def test_sphere_transversality_away_from_contacts():
    # with residual norm > 0.1 the g-derivative along the flow is >= 4 r^2
    from foliamorse.polar import contact_residual

    rng = np.random.default_rng(4)
    m = models.fermat(2, 3)
    checked = 0
    while checked < 500:
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        r = np.linalg.norm(contact_residual(m, G2, z))
        if r <= 0.1:
            continue
        v = leaf_gradient_c(m, G2, z)
        dgdt = np.linalg.norm(v) ** 2
        assert dgdt > 0.04 - 1e-12
        checked += 1


def test_drift_control_on_unit_time_orbits():
    m = models.fermat(2, 4)
    rng = np.random.default_rng(5)
    for _ in range(10):
        z0 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        z0 *= rng.uniform(0.1, 1.0) / np.linalg.norm(z0)
        tr = integrate_orbit(m, G2, z0, "backward", FlowOptions(max_time=1.0))
        assert tr.invariant_drift < 1e-8
