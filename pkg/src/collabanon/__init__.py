"""Neighborhood k-anonymity and l-diversity for labeled social networks,
collaborative merging with provenance, attack simulation, and IPv4 address
anonymization."""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .attacks import (
    AdversaryKnowledge,
    AttackResult,
    PublishedIndex,
    background_attack,
    embeds,
    homogeneity_attack,
    homogeneity_rate,
    neighborhood_attack,
    neighborhood_sweep,
    refinement_attack,
)
from .collab import (
    CollabNetwork,
    CollabStore,
    PartyNetwork,
    PrivacyLevel,
    UserQuery,
    flatten,
    merge,
    parse_contribution,
    query,
    revoke,
)
from .equivalence import (
    EquivalencePartition,
    automorphic_equivalence,
    reduction_network,
    stable_refinement,
    structural_equivalence,
    vertex_refinement,
)
from .errors import *  # noqa: F401,F403
from .graph import AnonymizationMapping, SocialNetwork, naive_anonymize, parse_network, serialize_network
from .hierarchy import LabelHierarchy, generalize_label, parse_hierarchy
from .kanon import KAnonConfig, anonymization_cost, anonymize_pair_2hop, k_anonymize, verify_k_anonymity
from .ldiversity import LDivConfig, check_l_diversity, enforce_k_and_l, enforce_l_diversity
from .neighborhood import codes_equal_iso, extract_neighborhood, min_dfs_code, neighborhood_code
from .utility import UtilityMetrics, utility_report
