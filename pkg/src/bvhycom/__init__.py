"""Exact computations with BV algebras, hypercommutative operations and mixed Hodge data on finite models."""

from .exactlin import I, ONE, ZERO, Matrix, Scalar, Subspace, sc
from .cdga import Algebra, Derivation, Element, Generator, Operator, Presentation
from .hodge import TransferDiagram, build_transfer
from .bv import BVAlgebra, check_bv, check_ddelta
from .hycom import HycomOps, build_ops, phi_n, verify_exp
from .models import ModelBundle, resolve_model
from .parsing import ParseError, parse_element, parse_presentation

__version__ = "0.1.0"

__all__ = [
    "Algebra",
    "BVAlgebra",
    "Derivation",
    "Element",
    "Generator",
    "HycomOps",
    "I",
    "Matrix",
    "ModelBundle",
    "ONE",
    "Operator",
    "ParseError",
    "Presentation",
    "Scalar",
    "Subspace",
    "TransferDiagram",
    "ZERO",
    "build_ops",
    "build_transfer",
    "check_bv",
    "check_ddelta",
    "parse_element",
    "parse_presentation",
    "phi_n",
    "resolve_model",
    "sc",
    "verify_exp",
]
