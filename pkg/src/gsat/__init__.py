"""Self-adjusting multiway search trees with baselines and a benchmark harness."""
from ._backend import BACKEND, available_backends
from .core import (GSATree, KeyRecord, build_ideal, check_ideal, depth_of, flatten,
                   node_search, rebuild)
from .errors import ConfigurationError, ContractViolation, ResourceError
from .policies import (DegreePolicy, get_policy, sa2t, sabt, sait, salt,
                       size_weighted_adapter)

__all__ = [
    "BACKEND", "available_backends", "GSATree", "KeyRecord", "build_ideal", "check_ideal",
    "depth_of", "flatten", "node_search", "rebuild", "ConfigurationError",
    "ContractViolation", "ResourceError", "DegreePolicy", "get_policy", "sa2t", "sabt",
    "sait", "salt", "size_weighted_adapter",
]
