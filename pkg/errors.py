"""
Exceptions raised by the certifier.

None of these derive from ValueError: pydantic wraps ValueError raised inside
validators, and these must reach the caller unchanged.
"""

from typing import Any, Iterable, List, Sequence


class ProximityError(Exception):
    """Base class for every certifier failure"""


class ShapeError(ProximityError):
    """Matrix or vector has the wrong shape"""


class InvalidInputError(ProximityError):
    """Input violates the documented domain of an operation"""


class MetricViolationError(InvalidInputError):
    """Distance matrix fails one or more metric axioms"""

    def __init__(self, violations: Sequence[Any]):
        self.violations = list(violations)
        kinds = sorted({v.kind for v in self.violations})
        super().__init__(
            f"{len(self.violations)} metric violation(s): {', '.join(kinds)}"
        )


class IndexRangeError(InvalidInputError):
    """A point index lies outside 0..n-1"""


class InstanceParseError(InvalidInputError):
    """Instance file could not be parsed"""


class PreconditionError(ProximityError):
    """An operation was called outside its precondition"""


class NonUniquePreimageError(PreconditionError):
    """Some x in A0 has more than one proximal preimage"""

    def __init__(self, x: int, preimages: Iterable[int]):
        self.x = x
        self.preimages: List[int] = sorted(preimages)
        super().__init__(
            f"point {x} has {len(self.preimages)} proximal preimages {self.preimages}; "
            "T cannot be a p-proximal contraction"
        )


class DomainError(ProximityError):
    """Numeric argument outside the domain of a formula"""


class HuntInvariantError(ProximityError):
    """A hunt record contradicts the best proximity theorem"""

    def __init__(self, record: Any, instance: Any, reason: str):
        self.record = record
        self.instance = instance
        self.reason = reason
        super().__init__(f"trial {record.trial} (seed {record.seed}): {reason}")
