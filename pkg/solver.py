"""
Picard iteration on the induced map S1, a-priori error bounds, and the
brute-force best proximity oracle.

On a finite A0 convergence means reaching an exact fixed point: a strict
contraction admits no cycle, so the orbit fixes within |A0| steps.
"""

import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from analysis import AdmissibilityReport, p_proximal_constant
from errors import DomainError, PreconditionError
from proximal import InducedMap, PairInstance, ProximalStructure

logger = logging.getLogger(__name__)


class BoundCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    dist_to_final: float
    bound: float


class SolveResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    trace: List[int]
    z: int
    converged: bool
    steps: int
    proximity_gap: float
    q: Optional[float] = None
    bound_checks: List[BoundCheck] = []

    @property
    def start(self) -> int:
        return self.trace[0]


class OracleResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    argmin_set: List[int]
    argmin_labels: List[str]
    min_value: float
    is_best_proximity: bool
    unique: bool


def apriori_error_bound(q: float, d01: float, n: int) -> float:
    """Banach bound d(x_n, z) <= q^n d(x_0, x_1) / (1 - q)"""
    if not 0 < q < 1:
        raise DomainError(f"apriori_error_bound needs 0 < q < 1, got {q}")
    if d01 < 0 or n < 0:
        raise DomainError(f"apriori_error_bound needs d01 >= 0 and n >= 0, got {d01}, {n}")
    return q**n * d01 / (1 - q)


def _contraction_factor(admissibility: AdmissibilityReport) -> Optional[float]:
    k = admissibility.k_min
    if 0 < k < 1 / 3:
        return 2 * k / (1 - k)
    return None


def picard_solve(
    instance: PairInstance,
    im: InducedMap,
    x0: int,
    max_iter: Optional[int] = None,
    admissibility: Optional[AdmissibilityReport] = None,
) -> SolveResult:
    """
    Iterate S1 from x0 until a fixed point or max_iter steps (default |A0| + 1).
    A cycle is reported as converged=False, never raised.
    """
    if x0 not in im.table:
        raise PreconditionError(f"start point {x0} is not in A0")
    if max_iter is None:
        max_iter = len(im.domain) + 1
    if max_iter < 1:
        raise PreconditionError(f"max_iter must be at least 1, got {max_iter}")

    trace = [x0]
    current = x0
    converged = False
    for _ in range(max_iter):
        nxt = im(current)
        if nxt == current:
            converged = True
            break
        logger.debug(f"picard step {len(trace)}: {current} -> {nxt}")
        trace.append(nxt)
        current = nxt
    else:
        converged = im(current) == current

    z = trace[-1]
    dist = instance.space.dist
    gap = float(dist[z, instance.T[z]]) - im.structure.dAB

    if admissibility is None:
        admissibility = p_proximal_constant(instance, im.structure)
    q = _contraction_factor(admissibility)

    checks: List[BoundCheck] = []
    if converged and q is not None:
        d01 = float(dist[trace[0], trace[1]]) if len(trace) > 1 else 0.0
        checks = [
            BoundCheck(n=n, dist_to_final=float(dist[x, z]), bound=apriori_error_bound(q, d01, n))
            for n, x in enumerate(trace)
        ]

    if not converged:
        logger.info(f"picard from {x0} did not reach a fixed point in {max_iter} steps")
    return SolveResult(
        trace=trace,
        z=z,
        converged=converged,
        steps=len(trace) - 1,
        proximity_gap=gap,
        q=q,
        bound_checks=checks,
    )


def solve_all_starts(
    instance: PairInstance,
    im: InducedMap,
    max_iter: Optional[int] = None,
    admissibility: Optional[AdmissibilityReport] = None,
) -> List[SolveResult]:
    if admissibility is None:
        admissibility = p_proximal_constant(instance, im.structure)
    return [
        picard_solve(instance, im, x0, max_iter=max_iter, admissibility=admissibility)
        for x0 in im.domain
    ]


def best_proximity_oracle(instance: PairInstance, ps: ProximalStructure) -> OracleResult:
    """
    Exhaustive minimum of d(x, T x) over A. Reads only the instance and d(A, B),
    never the induced map or any contraction certificate.
    """
    A = np.array(instance.A)
    images = np.array([instance.T[x] for x in instance.A])
    gaps = instance.space.dist[A, images]
    low = float(gaps.min())
    argmin = A[gaps <= low + ps.eps_prox].tolist()
    return OracleResult(
        argmin_set=argmin,
        argmin_labels=[instance.space.label(x) for x in argmin],
        min_value=low,
        is_best_proximity=low <= ps.dAB + ps.eps_prox,
        unique=len(argmin) == 1,
    )


def verify_best_proximity(instance: PairInstance, ps: ProximalStructure, z: int) -> bool:
    if z not in instance.T:
        raise PreconditionError(f"point {z} is not in A")
    return abs(float(instance.space.dist[z, instance.T[z]]) - ps.dAB) <= ps.eps_prox
