"""Numerical contact analysis of singular holomorphic foliation germs.

The package locates the polar variety of a foliation germ against a Morse
function, classifies the contacts by Morse index, tests smoothness and
transversality, integrates the leaf gradient flow, and reproduces the
worked example censuses.
"""

from .calc import MorseModel, PolyMap, WirtingerJet2, eval_poly, jacobian_poly, morse_jet, poly_second
from .errors import (
    DegenerateContactError,
    DegenerateDistributionError,
    FoliationError,
    InputError,
    ModelError,
    NearCriticalError,
    PreconditionError,
    SingularPointError,
)
from .flow import FlowOptions, OrbitTrace, classify_alpha_limit, integrate_orbit, leaf_gradient
from .foliation import ChartDescriptor, FoliationModel, TangentFrame, leaf_chart, tangent_basis
from .morse import RestrictedHessian, classify_contact, euler_count, restricted_hessian
from .polar import (
    ContactPoint,
    ContactsResult,
    SolveOptions,
    cluster_components,
    contact_jacobian,
    contact_residual,
    contacts_to_jsonl,
    find_contacts_on_fiber,
    find_contacts_on_sphere,
    smoothness_check,
)
from .transversality import TransversalityResult, is_transversal

__version__ = "0.1.0"
