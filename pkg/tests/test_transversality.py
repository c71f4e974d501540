import numpy as np
import pytest

from foliamorse import models
from foliamorse.calc import MorseModel
from foliamorse.errors import PreconditionError
from foliamorse.morse import classify_contact
from foliamorse.polar import SolveOptions, find_contacts_on_sphere
from foliamorse.transversality import is_transversal


def twisted_degenerate_point(lams=(3, 1, 1, 1), minus_root=True):
    """Closed-form non-transversal contact of the cyclic field on z_4 = 0.

    With u = |z_2|^2, v = |z_1|^2 the defect condition on the polar set reads
    |lam_1|^2 u^2 - |lam_1|^2 uv + |lam_4|^2 v^2 = 0; take v = 1, u = a root,
    |z_3|^2 = |lam_1/lam_2| |z_1||z_2|, and phases with
    3*arg(z_2) - arg(z_1) - 2*arg(z_3) = pi.
    """
    l1, l4 = abs(lams[0]) ** 2, abs(lams[3]) ** 2
    disc = np.sqrt(l1**2 - 4 * l1 * l4)
    r = (l1 - disc) / (2 * l1) if minus_root else (l1 + disc) / (2 * l1)
    z2 = np.sqrt(r)
    z3 = np.sqrt(abs(lams[0] / lams[1]) * z2) * np.exp(-1j * np.pi / 2)
    return np.array([1.0, z2, z3, 0.0], dtype=complex), r


def test_twisted_case_iii_not_transversal():
    lams = (3, 1, 1, 1)
    m = models.twisted_cycle(lams)
    g = MorseModel.round(4)
    for minus in (True, False):
        z, r = twisted_degenerate_point(lams, minus)
        from foliamorse.polar import contact_residual

        assert np.linalg.norm(contact_residual(m, g, z)) < 1e-12
        out = is_transversal(m, g, z)
        assert out.applicable
        assert not out.transversal
        # Theorem-level equivalence: the contact must classify as degenerate
        cls = classify_contact(m, g, z)
        assert cls.degenerate


def test_twisted_cases_i_ii_transversal():
    g = MorseModel.round(2)
    for swapped in (False, True):
        m = models.monomial_pair(1.0, 1.0, 3, 4, swapped=swapped)
        res = find_contacts_on_sphere(m, g, 1.0, n_seeds=800, opts=SolveOptions(rng_seed=9))
        assert len(res.points) >= 100
        for p in res.points:
            assert p.transversal


def test_fermat_n3_transversal_everywhere():
    m = models.fermat(3, 3)
    g = MorseModel.round(3)
    res = find_contacts_on_sphere(m, g, 1.0, n_seeds=700, opts=SolveOptions(rng_seed=9))
    assert len(res.points) > 200
    assert all(p.transversal for p in res.points)


def test_nondegenerate_implies_transversal():
    # Fermat diagonal contact: nondegenerate Hessian, so transversal
    m = models.fermat(2, 3)
    g = MorseModel.round(2)
    z = np.array([1.0, 1.0]) / np.sqrt(2)
    cls = classify_contact(m, g, z)
    assert not cls.degenerate
    out = is_transversal(m, g, z)
    assert out.applicable and out.transversal
    assert out.kernel_overlap < 1.0 - 1e-8


def test_not_applicable_on_degenerate_polar_set():
    m = models.rotation_field()
    g = MorseModel.round(2)
    z = np.array([1.0, 1.0]) / np.sqrt(2)
    out = is_transversal(m, g, z)
    assert not out.applicable


def test_precondition_off_polar_set():
    with pytest.raises(PreconditionError):
        is_transversal(models.fermat(2, 3), MorseModel.round(2), [1.0, 0.5])


def test_agreement_with_classification():
    # verdict equals nondegeneracy at every smooth contact found
    m = models.fermat(2, 3)
    g = MorseModel.round(2)
    res = find_contacts_on_sphere(m, g, 1.0, n_seeds=300, opts=SolveOptions(rng_seed=10))
    for p in res.points:
        cls = classify_contact(m, g, p.z)
        out = is_transversal(m, g, p.z)
        if out.applicable:
            assert out.transversal == (not cls.degenerate)
