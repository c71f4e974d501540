import numpy as np
import pytest

from foliamorse import models
from foliamorse.calc import MorseModel, eval_poly, morse_jet, to_real, from_real
from foliamorse.errors import InputError, PreconditionError
from foliamorse.foliation import tangent_basis
from foliamorse.polar import (
    SolveOptions,
    cluster_components,
    contact_residual,
    contact_jacobian,
    contacts_to_jsonl,
    contacts_from_jsonl,
    find_contacts_on_fiber,
    find_contacts_on_sphere,
    smoothness_check,
)

from helpers_oracle import fd_jacobian

G2 = MorseModel.round(2)
G3 = MorseModel.round(3)
CUBE_ROOTS = np.exp(2j * np.pi * np.arange(3) / 3)


def test_residual_linear_axis_point():
    # <F(z), z> with lam = (1, 2) at (1, 0): frame-normalized residual is 1
    m = models.linear_flow([1.0, 2.0])
    r = contact_residual(m, G2, [1.0, 0.0])
    assert np.linalg.norm(r) == pytest.approx(1.0)


def test_residual_fermat_diagonal_zero():
    m = models.fermat(2, 3)
    assert np.linalg.norm(contact_residual(m, G2, [1.0, 1.0])) < 1e-14


def test_residual_pham_axis_zero():
    m = models.pham_brieskorn_field(3, 4)
    assert np.linalg.norm(contact_residual(m, G2, [0.5, 0.0])) < 1e-14


def test_residual_is_field_pairing_for_dim_one():
    # 2d-residual vanishes iff <F(z), z> = 0, and the norms agree after
    # normalizing by |F| (dim 1, round metric)
    rng = np.random.default_rng(0)
    m = models.pham_brieskorn_field(3, 4)
    for _ in range(1000):
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        F = eval_poly(m.field, z)
        pairing = abs(F @ np.conj(z)) / np.linalg.norm(F)
        r = np.linalg.norm(contact_residual(m, G2, z))
        assert abs(r - pairing) < 1e-10 * max(1.0, pairing)


def test_jacobian_degenerate_linear():
    m = models.linear_flow([1.0, -1.0])
    J = contact_jacobian(m, G2, [1.0, 1.0])
    s = np.linalg.svd(J, compute_uv=False)
    assert s[0] > 1e-3 and s[1] < 1e-12  # rank 1 < 2d


def test_jacobian_rotation_real_part_identically_zero():
    m = models.rotation_field()
    rng = np.random.default_rng(1)
    for _ in range(20):
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        r = contact_residual(m, G2, z)
        assert abs(r[0]) < 1e-13 * max(1.0, np.linalg.norm(z) ** 2)
        J = contact_jacobian(m, G2, z)
        assert np.linalg.norm(J[0]) < 1e-12


def test_jacobian_fermat_full_rank_and_fd_oracle():
    m = models.fermat(2, 3)
    z0 = np.array([1.0, 1.0]) / np.sqrt(2)
    J = contact_jacobian(m, G2, z0)
    s = np.linalg.svd(J, compute_uv=False)
    assert s[1] / s[0] > 1e-3

    pivot = tangent_basis(m, z0).pivot
    fd = fd_jacobian(
        lambda y: contact_residual(
            m, G2, from_real(y), frame=tangent_basis(m, from_real(y), pivot=pivot)
        ),
        to_real(z0),
    )
    assert np.max(np.abs(J - fd)) < 1e-8


def test_fermat_sphere_five_circles():
    res = find_contacts_on_sphere(
        models.fermat(2, 3), G2, 1.0, n_seeds=500, opts=SolveOptions(rng_seed=1)
    )
    assert len(res.census) == 5
    for comp in res.census:
        assert comp.line_flag
        assert len([k for k in comp.index_histogram]) == 1  # constant index


def test_poincare_sphere_empty_with_note():
    res = find_contacts_on_sphere(
        models.linear_flow([1.0, 1.0 + 1.0j]), G2, 1.0,
        n_seeds=1500, opts=SolveOptions(rng_seed=1),
    )
    assert len(res.points) == 0
    assert "poincare" in res.diagnostics["note"].lower()


def test_siegel_sphere_contains_diagonal():
    res = find_contacts_on_sphere(
        models.linear_flow(CUBE_ROOTS), G3, 1.0, n_seeds=400, opts=SolveOptions(rng_seed=1)
    )
    diag = np.ones(3) / np.sqrt(3)
    assert min(np.linalg.norm(p.z - diag) for p in res.points) < 1e-10
    assert len(res.census) == 1


def test_sphere_constraint_satisfied():
    res = find_contacts_on_sphere(
        models.fermat(2, 3), G2, 0.5, n_seeds=200, opts=SolveOptions(rng_seed=2)
    )
    for p in res.points:
        assert abs(morse_jet(G2, p.z).value - 0.25) <= 1e-10 * 0.25


def test_eps_outside_trust_radius():
    with pytest.raises(InputError):
        find_contacts_on_sphere(models.fermat(2, 3), G2, 2.0)


def test_homogeneity_of_contact_locus():
    # residual(z) = 0 => residual(lam z) = 0 for homogeneous models, round g
    rng = np.random.default_rng(5)
    cases = [models.fermat(2, 3), models.fermat(3, 3),
             models.pham_brieskorn_field(3, 3), models.linear_flow(CUBE_ROOTS)]
    gs = {2: G2, 3: G3}
    for m in cases:
        g = gs[m.n]
        res = find_contacts_on_sphere(m, g, 1.0, n_seeds=100, opts=SolveOptions(rng_seed=3))
        pts = res.points[:5]
        for p in pts:
            for _ in range(100):
                lam = rng.standard_normal() + 1j * rng.standard_normal()
                r = contact_residual(m, g, lam * p.z)
                scale = np.linalg.norm(morse_jet(g, lam * p.z).dz)
                assert np.linalg.norm(r) < 1e-8 * max(scale, 1e-10)


def test_pham_fiber_census():
    m = models.pham_brieskorn(3, 4)
    res = find_contacts_on_fiber(m, G2, 0.3, n_seeds=2000, opts=SolveOptions(rng_seed=3))
    assert len(res.points) == 19
    assert max(p.residual_norm for p in res.points) < 1e-10


def test_fiber_value_zero_rejected():
    with pytest.raises(InputError):
        find_contacts_on_fiber(models.pham_brieskorn(3, 4), G2, 0.0)


def test_smoothness_check_cases():
    out = smoothness_check(models.fermat(2, 3), G2, np.array([1.0, 1.0]) / np.sqrt(2))
    assert out["smooth_reduced"] and out["rank"] == 2

    out = smoothness_check(models.rotation_field(), G2, np.array([1.0, 1.0]) / np.sqrt(2))
    assert not out["smooth_reduced"] and out["rank"] == 1

    z = np.array([1.0, 1.0]) / np.sqrt(2)
    out = smoothness_check(models.linear_flow([1.0, -1.0]), G2, z)
    assert out["rank"] < 2


def test_smoothness_check_requires_on_polar_set():
    with pytest.raises(PreconditionError):
        smoothness_check(models.fermat(2, 3), G2, [1.0, 0.3])


def test_cluster_singleton():
    from foliamorse.polar import ContactPoint

    p = ContactPoint(z=np.array([1.0, 0.0 + 0j]), radius=1.0, residual_norm=0.0,
                     morse_index=0)
    census = cluster_components([p])
    assert len(census) == 1 and census[0].size == 1


def test_jsonl_round_trip_schema():
    res = find_contacts_on_sphere(
        models.fermat(2, 3), G2, 1.0, n_seeds=120, opts=SolveOptions(rng_seed=4)
    )
    text = contacts_to_jsonl(res.points)
    records = contacts_from_jsonl(text)
    assert len(records) == len(res.points)
    expected_fields = {
        "z_re", "z_im", "radius", "residual", "index", "degenerate",
        "component", "transversal", "rank_ratio",
    }
    for rec in records:
        assert set(rec) == expected_fields


def test_deterministic_output_across_worker_counts():
    a = find_contacts_on_sphere(
        models.fermat(2, 3), G2, 1.0, n_seeds=300,
        opts=SolveOptions(rng_seed=6, workers=1),
    )
    b = find_contacts_on_sphere(
        models.fermat(2, 3), G2, 1.0, n_seeds=300,
        opts=SolveOptions(rng_seed=6, workers=4),
    )
    assert contacts_to_jsonl(a.points) == contacts_to_jsonl(b.points)
