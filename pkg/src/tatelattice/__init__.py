"""Global lattices with an operator, built from local data at finitely many primes."""

from .engine import (
    ENGINE_VERSION,
    Block,
    Certificate,
    GlobalLattice,
    InvalidInstanceError,
    ProblemInstance,
    SolveUnknown,
    Verdict,
    solve,
    verify_certificate,
)
from .orders import Order, classify, make_order
from .padic import BadPrimeError, PadicContext, PadicMatrix, similarity
from .quaternion import QuaternionAlgebra, demo_counterexample, hilbert_symbol

__version__ = "0.1.0"

__all__ = [
    "ENGINE_VERSION",
    "BadPrimeError",
    "Block",
    "Certificate",
    "GlobalLattice",
    "InvalidInstanceError",
    "Order",
    "PadicContext",
    "PadicMatrix",
    "ProblemInstance",
    "QuaternionAlgebra",
    "SolveUnknown",
    "Verdict",
    "classify",
    "demo_counterexample",
    "hilbert_symbol",
    "make_order",
    "similarity",
    "solve",
    "verify_certificate",
]
