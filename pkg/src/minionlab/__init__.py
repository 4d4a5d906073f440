"""Minion homomorphisms, quantum certificates and CSP relaxations at desk scale."""

from .errors import (
    ArityMismatch,
    MalformedInput,
    MembershipError,
    MinionLabError,
    NotAGraph,
    SignatureMismatch,
    SizeCapExceeded,
    VerificationFailure,
)
from .structures import (
    Signature,
    Structure,
    all_homomorphisms,
    direct_power,
    enumerate_polymorphisms,
    find_homomorphism,
    homomorphism_exists,
    is_bipartite,
    zoo,
    zoo_ref,
)
from .minions import DictatorElement, MatrixElement, MinorMap, SkeletalElement, check_minion_axioms, theta
from .quantum import (
    Certificate,
    QElement,
    SpaceConfig,
    cert_to_free_hom,
    free_hom_to_cert,
    free_relation_test,
    hopf_map,
    verify_certificate,
    xi_dictator,
    xi_sdp,
    xi_skeletal,
)
from .relaxations import clp_relax, k_consistency, sdp_relax
from .advantage import bounded_dictator_search, classify_graph, classify_pair

__version__ = "0.1.0"
