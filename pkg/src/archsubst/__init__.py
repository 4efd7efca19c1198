"""Substitutability checking for reconfigurable component architectures."""

from .consistency import ConsistencyReport, Violation, check_consistency, is_consistent
from .dsl import (
    ParseError,
    ScenarioScript,
    SourceText,
    load_model,
    parse_model,
    parse_scenario,
    parse_substitution,
    serialize_configuration,
    serialize_model,
)
from .engine import ModelSpec, Random, Scripted, apply, enabled, reachable_graph, run_path
from .fixpoint import BACKEND
from .model import Configuration, ConfigurationDeclaration, Identifier, PType, new_configuration
from .simulation import B4, PairedSystem, cross_validate, oracle_check, run_semi_algorithm
from .substitution import SubstMap, SubstReport, check_subst, validate_subst_map

__version__ = "0.1.0"

__all__ = [
    "B4",
    "BACKEND",
    "Configuration",
    "ConfigurationDeclaration",
    "ConsistencyReport",
    "Identifier",
    "ModelSpec",
    "PType",
    "PairedSystem",
    "ParseError",
    "Random",
    "ScenarioScript",
    "Scripted",
    "SourceText",
    "SubstMap",
    "SubstReport",
    "Violation",
    "apply",
    "check_consistency",
    "check_subst",
    "cross_validate",
    "enabled",
    "is_consistent",
    "load_model",
    "new_configuration",
    "oracle_check",
    "parse_model",
    "parse_scenario",
    "parse_substitution",
    "reachable_graph",
    "run_path",
    "run_semi_algorithm",
    "serialize_configuration",
    "serialize_model",
    "validate_subst_map",
]
