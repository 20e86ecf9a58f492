"""
Doctrina - sequent calculi generated from doctrines of universal properties.
"""

from doctrina.base import (
    BaseTheory,
    Linearity,
    Sign,
    StructuralMap,
    allowed,
    builtin_base,
    check_closure,
)
from doctrina.calculus import (
    Checker,
    CutRule,
    Entry,
    GenRule,
    IdRule,
    InvRule,
    NonInvRule,
    Sequent,
    StructRule,
    render_sequent,
)
from doctrina.completion import (
    completeness_report,
    enumerate_derivations,
    enumerate_homset,
    extremality_probe,
)
from doctrina.config_loader import Config, ConfigurationError, load_config
from doctrina.doctrine import (
    DiscreteCone,
    Doctrine,
    ValidationReport,
    builtin_doctrine,
    validate_doctrine,
)
from doctrina.errors import DoctrinaError, ParseError, ResourceLimit
from doctrina.report import Report, ReportItem, Status
from doctrina.rewrite import EqVerdict, beta_step, equal, normalize
from doctrina.search import SearchBudget, search
from doctrina.sketch import Sketch, coreflect, is_well_sorted, validate_sketch
from doctrina.syntax import format_term, parse_sequent, parse_term
from doctrina.translate import (
    DoctrineMap,
    push_sketch,
    pull_sketch,
    translate_derivation,
    validate_map,
)
from doctrina.types import Comp, Gen, enumerate_types
from doctrina.workspace import Workspace, load_workspace, parse_workspace

__version__ = "0.1.0"

__all__ = [
    # Base theories
    "BaseTheory",
    "Linearity",
    "Sign",
    "StructuralMap",
    "allowed",
    "builtin_base",
    "check_closure",
    # Doctrines
    "DiscreteCone",
    "Doctrine",
    "ValidationReport",
    "builtin_doctrine",
    "validate_doctrine",
    # Sketches and types
    "Sketch",
    "coreflect",
    "is_well_sorted",
    "validate_sketch",
    "Comp",
    "Gen",
    "enumerate_types",
    # Calculus
    "Checker",
    "CutRule",
    "Entry",
    "GenRule",
    "IdRule",
    "InvRule",
    "NonInvRule",
    "Sequent",
    "StructRule",
    "render_sequent",
    # Search, rewriting, completion
    "SearchBudget",
    "search",
    "EqVerdict",
    "beta_step",
    "equal",
    "normalize",
    "completeness_report",
    "enumerate_derivations",
    "enumerate_homset",
    "extremality_probe",
    # Translation
    "DoctrineMap",
    "push_sketch",
    "pull_sketch",
    "translate_derivation",
    "validate_map",
    # Workspaces and reports
    "Workspace",
    "load_workspace",
    "parse_workspace",
    "Report",
    "ReportItem",
    "Status",
    "format_term",
    "parse_sequent",
    "parse_term",
    # Config and errors
    "Config",
    "ConfigurationError",
    "load_config",
    "DoctrinaError",
    "ParseError",
    "ResourceLimit",
]
