"""Linear quantum lambda calculus: type checking, a wave-style token machine
with a quantum register, circuit extraction, an equational normalizer, and an
MLL token machine used as a cross-check."""

from .equational import SuperposedTerm, normalize, reduce_once, to_amplitude_vector
from .errors import InternalError, QlamError, UserError
from .generate import generate_term
from .machine import build_routing, extract_circuit, eval_circuit, run
from .mll import check_correspondence, translate_derivation, translate_type
from .quantum import (
    BUILTINS,
    GateDef,
    GateLibrary,
    Register,
    apply_lifted,
    apply_permutation,
    format_register,
    load_gate_library,
    parse_register,
)
from .syntax import parse, parse_type, pretty
from .typecheck import typecheck

__version__ = "0.1.0"

__all__ = [
    "BUILTINS", "GateDef", "GateLibrary", "InternalError", "QlamError", "Register",
    "SuperposedTerm", "UserError", "apply_lifted", "apply_permutation", "build_routing",
    "check_correspondence", "eval_circuit", "extract_circuit", "format_register",
    "generate_term", "load_gate_library", "normalize", "parse", "parse_register",
    "parse_type", "pretty", "reduce_once", "run", "to_amplitude_vector",
    "translate_derivation", "translate_type", "typecheck",
]
