"""Bucket elimination and mini-bucket bounds for discrete belief networks."""

from .elimination import elim_bel, elim_map, elim_mpe, super_bucket_grouping
from .errors import (
    BudgetExceededError,
    InfeasibleConfigError,
    MiniBucketError,
    ModelError,
    OrderingError,
    ParseError,
    ResourceLimitError,
)
from .bnet import load_network, save_network
from .factor import Factor
from .generators import GenSpec, gen_evidence, generate
from .minibucket import MiniBucketConfig, approx_bel, approx_map, approx_mpe, bound_ratios
from .network import BeliefNetwork, joint_probability, moral_graph
from .ordering import find_ordering, induced_width, legal_ordering
from .search import best_first_mpe

__all__ = [
    "BeliefNetwork",
    "BudgetExceededError",
    "Factor",
    "GenSpec",
    "InfeasibleConfigError",
    "MiniBucketConfig",
    "MiniBucketError",
    "ModelError",
    "OrderingError",
    "ParseError",
    "ResourceLimitError",
    "approx_bel",
    "approx_map",
    "approx_mpe",
    "best_first_mpe",
    "bound_ratios",
    "elim_bel",
    "elim_map",
    "elim_mpe",
    "find_ordering",
    "gen_evidence",
    "generate",
    "induced_width",
    "joint_probability",
    "legal_ordering",
    "load_network",
    "moral_graph",
    "save_network",
    "super_bucket_grouping",
]
