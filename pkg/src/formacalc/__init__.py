"""Exact computations with formal differential forms and compactly supported dual forms."""

from .errors import (DegreeMismatch, DomainError, FormacalcError, HomotopyError,
                     InternalInconsistency, NotInvertible, OrderExhausted, SpaceMismatch)
from .formal import FormalFunction, Space

__all__ = ["DegreeMismatch", "DomainError", "FormacalcError", "FormalFunction",
           "HomotopyError", "InternalInconsistency", "NotInvertible", "OrderExhausted",
           "Space", "SpaceMismatch"]
