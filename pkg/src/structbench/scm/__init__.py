"""Structural causal models: types, BIF/JSON parsing and prior sampling."""

from .bif import parse_bif
from .jsonio import dump_scm_json, load_scm, parse_scm_json, scm_to_dict
from .model import (
    Cpd,
    DiscreteCpd,
    LinearGaussianCpd,
    LinearMechanism,
    ScmModel,
    Task,
    parent_configurations,
    topological_order,
)
from .sampling import prior_sample, uniform_stream

__all__ = [
    "Cpd",
    "DiscreteCpd",
    "LinearGaussianCpd",
    "LinearMechanism",
    "ScmModel",
    "Task",
    "dump_scm_json",
    "load_scm",
    "parent_configurations",
    "parse_bif",
    "parse_scm_json",
    "prior_sample",
    "scm_to_dict",
    "topological_order",
    "uniform_stream",
]
