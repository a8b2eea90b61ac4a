"""Three-valued LTL checking of partial Kripke structures with topological proofs."""

from tpcheck.errors import (
    ModelError,
    ParseError,
    PreconditionError,
    ResourceLimitExceeded,
)
from tpcheck.tri import Tri

__version__ = "0.1.0"

__all__ = [
    "ModelError",
    "ParseError",
    "PreconditionError",
    "ResourceLimitExceeded",
    "Tri",
]
