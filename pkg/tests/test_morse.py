import numpy as np
import pytest

from foliamorse import models
from foliamorse.calc import MorseModel, PolyMap
from foliamorse.errors import DegenerateContactError, PreconditionError
from foliamorse.foliation import FoliationModel
from foliamorse.morse import (
    classify_contact,
    euler_count,
    group_by_leaf,
    restricted_hessian,
)
from foliamorse.polar import SolveOptions, find_contacts_on_fiber, find_contacts_on_sphere

from helpers_oracle import chart_hessian_oracle

G2 = MorseModel.round(2)


def test_weighted_quadric_saddle_eigenvalues():
    # worked by hand: h(z2) = 2 - x^2 + 3y^2 + O(3) on the leaf f = 1
    H = restricted_hessian(models.weighted_quadric(), models.weighted_quadric_morse(),
                           [1.0, 0.0])
    assert np.allclose(H.eigenvalues, [-2.0, 6.0], atol=1e-12)


def test_hyperbola_degenerate_direction():
    # z = (e^w, e^-w): g restricted is 2 cosh(2u), eigenvalues (0, 8)
    m = FoliationModel.from_vector_field(
        PolyMap(n_in=2, n_out=2, terms=(((1.0, (1, 0)),), ((-1.0, (0, 1)),))),
        integral=PolyMap.scalar(2, [(1.0, (1, 1))]),
    )
    H = restricted_hessian(m, G2, [1.0, 1.0])
    assert np.allclose(H.eigenvalues, [0.0, 8.0], atol=1e-12)


def test_pham_axis_positive_definite():
    H = restricted_hessian(models.pham_brieskorn_field(3, 4), G2, [1.0, 0.0])
    assert np.all(H.eigenvalues > 0)


def test_classification_examples():
    m = models.pham_brieskorn(3, 4)
    res = find_contacts_on_fiber(m, G2, 0.3, n_seeds=1500, opts=SolveOptions(rng_seed=3))
    for p in res.points:
        onax = min(abs(p.z[0]), abs(p.z[1])) < 1e-8
        assert p.morse_index == (0 if onax else 1)

    gq = models.weighted_quadric_morse()
    res = find_contacts_on_fiber(models.weighted_quadric(), gq, 1.0,
                                 n_seeds=600, opts=SolveOptions(rng_seed=3))
    for p in res.points:
        assert p.morse_index == (1 if abs(p.z[1]) < 1e-8 else 0)


def test_classify_requires_contact():
    with pytest.raises(PreconditionError):
        classify_contact(models.fermat(2, 3), G2, [1.0, 0.5])


def test_euler_counts():
    m = models.pham_brieskorn(3, 4)
    res = find_contacts_on_fiber(m, G2, 0.3, n_seeds=1500, opts=SolveOptions(rng_seed=3))
    assert euler_count(res.points) == -5  # 1 - (p-1)(q-1)

    gq = models.weighted_quadric_morse()
    res = find_contacts_on_fiber(models.weighted_quadric(), gq, 1.0,
                                 n_seeds=600, opts=SolveOptions(rng_seed=3))
    assert euler_count(res.points) == 0

    lam = np.exp(2j * np.pi * np.arange(3) / 3)
    res = find_contacts_on_sphere(models.linear_flow(lam), MorseModel.round(3), 1.0,
                                  n_seeds=50, opts=SolveOptions(rng_seed=3))
    assert euler_count(res.points[:1]) == 1  # single minimum: chi(C^m) = 1


def test_euler_refuses_degenerate():
    res = find_contacts_on_fiber(models.rotation_field(), G2, 1.0,
                                 n_seeds=400, opts=SolveOptions(rng_seed=3))
    with pytest.raises(DegenerateContactError):
        euler_count(res.points)


def test_group_by_leaf():
    m = models.pham_brieskorn(3, 4)
    pts = []
    for t in (0.25, 0.4):
        pts += find_contacts_on_fiber(m, G2, t, n_seeds=1200,
                                      opts=SolveOptions(rng_seed=3)).points
    groups = group_by_leaf(pts, m)
    assert sorted(len(g) for g in groups) == [19, 19]


def test_index_at_most_leaf_dimension():
    # holomorphicity bound: no indices above d at nondegenerate contacts
    cases = [
        (models.fermat(2, 3), G2, "sphere", 1.0),
        (models.fermat(3, 3), MorseModel.round(3), "sphere", 1.0),
        (models.meersseman_example(), MorseModel.round(5), "sphere", 1.0),
        (models.pham_brieskorn(3, 4), G2, "fiber", 0.3),
    ]
    for m, g, mode, par in cases:
        if mode == "sphere":
            res = find_contacts_on_sphere(m, g, par, n_seeds=200, opts=SolveOptions(rng_seed=5))
        else:
            res = find_contacts_on_fiber(m, g, par, n_seeds=800, opts=SolveOptions(rng_seed=5))
        for p in res.points:
            if not p.degenerate:
                assert p.morse_index <= m.dim


def test_chart_independence_of_signs():
    # eigenvalue signs survive a pivot change at points with two pivots
    m = models.fermat(2, 3)
    z = np.array([1.0, 1.0]) / np.sqrt(2)
    h0 = restricted_hessian(m, G2, z)
    # force the other pivot through a rebuilt chart
    from foliamorse.foliation import ChartDescriptor
    from foliamorse.calc import jacobian_poly, poly_second

    df = jacobian_poly(m.integral, z)[0]
    d2f = poly_second(m.integral, z)[0]
    p = 1
    k = 0
    w = -df[k] / df[p]
    g1 = np.zeros((1, 2), dtype=complex)
    g1[0, k] = 1.0
    g1[0, p] = w
    s = -(d2f[k, k] + 2 * d2f[k, p] * w + d2f[p, p] * w * w) / df[p]
    g2 = np.zeros((1, 1, 2), dtype=complex)
    g2[0, 0, p] = s
    h1 = restricted_hessian(m, G2, z, chart=ChartDescriptor(point=z, gamma1=g1, gamma2=g2, pivot=p))
    assert np.sum(h0.eigenvalues < 0) == np.sum(h1.eigenvalues < 0)
    assert np.sum(h0.eigenvalues > 0) == np.sum(h1.eigenvalues > 0)


@pytest.mark.parametrize(
    "make_model,make_g,n",
    [
        (lambda: models.fermat(2, 3), lambda: MorseModel.round(2), 2),
        (lambda: models.fermat(3, 3), lambda: MorseModel.round(3), 3),
        (lambda: models.pham_brieskorn(3, 4), lambda: MorseModel.round(2), 2),
        (lambda: models.weighted_quadric(), models.weighted_quadric_morse, 2),
        (lambda: models.rotation_field(), lambda: MorseModel.round(2), 2),
        (lambda: models.linear_flow([1.0, 2.0 + 1.0j]), lambda: MorseModel.round(2), 2),
        (lambda: models.meersseman_example(), lambda: MorseModel.round(5), 5),
    ],
)
def test_hessian_matches_chart_oracle(make_model, make_g, n):
    m, g = make_model(), make_g()
    rng = np.random.default_rng(17)
    for _ in range(25):
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        z *= rng.uniform(0.5, 1.2) / np.linalg.norm(z)
        H = restricted_hessian(m, g, z).matrix
        H_fd = chart_hessian_oracle(m, g, z)
        err = np.max(np.abs(H - H_fd)) / max(np.max(np.abs(H)), 1e-10)
        assert err < 1e-5
