"""
Proximal structure of a non-self map T: A -> B on a finite metric space.

d(A, B), the proximal sets A0 and B0, proximal preimages, the precondition
report and the induced self-map S1 of A0 all live here.
"""

import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from config import Config
from errors import (
    IndexRangeError,
    InvalidInputError,
    NonUniquePreimageError,
    PreconditionError,
)
from metric_core import FiniteMetricSpace

logger = logging.getLogger(__name__)

APPROX_COMPACT_NOTE = (
    "approximative compactness holds: every sequence in a finite set has an "
    "eventually constant, hence convergent, subsequence"
)
CLOSEDNESS_NOTE = "A0 is closed: every subset of a finite metric space is closed"


def _index_tuple(name: str, values: Sequence[int], n: int) -> Tuple[int, ...]:
    out = tuple(sorted(set(int(v) for v in values)))
    if len(out) != len(values):
        raise InvalidInputError(f"{name} lists a point more than once")
    if not out:
        raise InvalidInputError(f"{name} must be nonempty")
    bad = [v for v in out if not 0 <= v < n]
    if bad:
        raise IndexRangeError(f"{name} references indices {bad} outside 0..{n - 1}")
    return out


@dataclass(frozen=True, eq=False)
class PairInstance:
    """A metric space, index sets A and B, and a map table T: A -> B"""

    space: FiniteMetricSpace
    A: Tuple[int, ...]
    B: Tuple[int, ...]
    T: Mapping[int, int]
    eps_prox: float = field(default_factory=lambda: Config.EPS_PROX)
    same_set: bool = False

    def __post_init__(self):
        n = self.space.n
        A = _index_tuple("A", self.A, n)
        B = _index_tuple("B", self.B, n)
        if self.same_set:
            if A != B:
                raise InvalidInputError("instance flagged A=B but A and B differ")
        elif set(A) & set(B):
            raise InvalidInputError(
                f"A and B share points {sorted(set(A) & set(B))}; flag same_set for self-maps"
            )
        if self.eps_prox < 0:
            raise InvalidInputError(f"eps_prox must be nonnegative, got {self.eps_prox}")

        table = {int(k): int(v) for k, v in dict(self.T).items()}
        out_of_range = [k for k, v in table.items() if not (0 <= k < n and 0 <= v < n)]
        if out_of_range:
            raise IndexRangeError(f"T has entries outside 0..{n - 1} at {sorted(out_of_range)}")
        if set(table) != set(A):
            missing = sorted(set(A) - set(table))
            extra = sorted(set(table) - set(A))
            raise InvalidInputError(f"T must be total on A (missing {missing}, extra {extra})")
        outside = sorted(x for x, y in table.items() if y not in set(B))
        if outside:
            raise InvalidInputError(f"T sends {outside} outside B")

        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "T", MappingProxyType(dict(sorted(table.items()))))

    def d(self, i: int, j: int) -> float:
        return float(self.space.dist[i, j])


@dataclass(frozen=True)
class ProximalStructure:
    dAB: float
    A0: Tuple[int, ...]
    B0: Tuple[int, ...]
    eps_prox: float


class PreconditionReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    a0_nonempty: bool
    t_maps_a0_into_b0: bool
    approx_compact: bool
    violations: List[int]
    notes: List[str]

    @property
    def ok(self) -> bool:
        return self.a0_nonempty and self.t_maps_a0_into_b0 and self.approx_compact


@dataclass(frozen=True, eq=False)
class InducedMap:
    """S1: A0 -> A0, x goes to the unique u with d(u, T x) = d(A, B)"""

    table: Mapping[int, int]
    source: PairInstance
    structure: ProximalStructure

    def __call__(self, x: int) -> int:
        return self.table[x]

    @property
    def domain(self) -> Tuple[int, ...]:
        return self.structure.A0


def pair_distance(instance: PairInstance) -> float:
    """d(A, B); on finite sets the infimum is a minimum"""
    d = instance.space.dist
    return float(d[np.ix_(instance.A, instance.B)].min())


def proximal_sets(instance: PairInstance) -> ProximalStructure:
    dAB = pair_distance(instance)
    A = np.array(instance.A)
    B = np.array(instance.B)
    close = np.abs(instance.space.dist[np.ix_(A, B)] - dAB) <= instance.eps_prox
    return ProximalStructure(
        dAB=dAB,
        A0=tuple(A[close.any(axis=1)].tolist()),
        B0=tuple(B[close.any(axis=0)].tolist()),
        eps_prox=instance.eps_prox,
    )


def check_preconditions(instance: PairInstance, ps: ProximalStructure) -> PreconditionReport:
    b0 = set(ps.B0)
    escaping = [x for x in ps.A0 if instance.T[x] not in b0]
    return PreconditionReport(
        a0_nonempty=bool(ps.A0),
        t_maps_a0_into_b0=not escaping,
        approx_compact=True,
        violations=escaping,
        notes=[APPROX_COMPACT_NOTE, CLOSEDNESS_NOTE],
    )


def _preimages_of(instance: PairInstance, ps: ProximalStructure, y: int) -> Tuple[int, ...]:
    A = np.array(instance.A)
    hit = np.abs(instance.space.dist[A, y] - ps.dAB) <= ps.eps_prox
    return tuple(A[hit].tolist())


def proximal_preimages(instance: PairInstance, ps: ProximalStructure, x: int) -> Tuple[int, ...]:
    """Every u in A with d(u, T x) = d(A, B) within eps_prox"""
    if x not in ps.A0:
        raise PreconditionError(f"point {x} is not in A0")
    if instance.T[x] not in ps.B0:
        raise PreconditionError(f"T({x}) = {instance.T[x]} is not in B0")
    return _preimages_of(instance, ps, instance.T[x])


def proximal_preimage_sets(
    instance: PairInstance, ps: ProximalStructure, full_domain: bool = False
) -> Dict[int, Tuple[int, ...]]:
    """
    Preimage sets keyed by x. By default x ranges over A0; with full_domain it
    ranges over every x in A whose image lies in B0.
    """
    b0 = set(ps.B0)
    domain = instance.A if full_domain else ps.A0
    return {
        x: _preimages_of(instance, ps, instance.T[x])
        for x in domain
        if instance.T[x] in b0
    }


def require_preconditions(instance: PairInstance, ps: ProximalStructure) -> None:
    report = check_preconditions(instance, ps)
    if not report.ok:
        raise PreconditionError(f"T does not map A0 into B0 at points {report.violations}")


def induced_map(instance: PairInstance, ps: ProximalStructure) -> InducedMap:
    require_preconditions(instance, ps)
    table: Dict[int, int] = {}
    for x, pre in proximal_preimage_sets(instance, ps).items():
        if len(pre) != 1:
            logger.debug(f"non-unique proximal preimages for {x}: {list(pre)}")
            raise NonUniquePreimageError(x, pre)
        table[x] = pre[0]
    return InducedMap(table=MappingProxyType(table), source=instance, structure=ps)


def self_map_instance(
    space: FiniteMetricSpace, table: Mapping[int, int], eps_prox: Optional[float] = 0.0
) -> PairInstance:
    """Encode a self-map of the whole space as an A=B pair instance"""
    everything = tuple(range(space.n))
    return PairInstance(
        space=space,
        A=everything,
        B=everything,
        T=table,
        eps_prox=Config.EPS_PROX if eps_prox is None else eps_prox,
        same_set=True,
    )
