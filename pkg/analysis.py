"""
Contraction certificates.

Every constant here is an attained maximum over a finite constraint set, with
0/0 taken as 0 and positive/0 as +inf. Ties go to the lexicographically
smallest witness.
"""

import logging
from typing import Literal, Mapping, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from config import Config
from errors import DomainError, InvalidInputError
from metric_core import FiniteMetricSpace
from proximal import (
    InducedMap,
    PairInstance,
    ProximalStructure,
    proximal_preimage_sets,
    require_preconditions,
)

logger = logging.getLogger(__name__)

Classification = Literal["admissible_lt_third", "admissible_third_to_one", "inadmissible"]


class AdmissibilityReport(BaseModel):
    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    k_min: float
    admissible: bool
    witness: Optional[Tuple[int, int, int, int]] = None
    quadruples_checked: int


class LipschitzReport(BaseModel):
    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    L: float
    witness: Optional[Tuple[int, int]] = None
    bound_q: Optional[float] = None
    bound_satisfied: Optional[bool] = None


def classify(k_min: float) -> Classification:
    if k_min < 1 / 3:
        return "admissible_lt_third"
    if k_min < 1:
        return "admissible_third_to_one"
    return "inadmissible"


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.where(num > 0, np.inf, 0.0)
    np.divide(num, den, out=out, where=den > 0)
    return out


def _constant_over_pairs(
    dist: np.ndarray, xs: np.ndarray, us: np.ndarray
) -> Tuple[float, Optional[Tuple[int, int, int, int]], int]:
    """
    max over ordered pairs (x1, u1), (x2, u2) of
    d(u1, u2) / (d(x1, x2) + |d(u1, x1) - d(u2, x2)|)
    """
    m = len(xs)
    if m == 0:
        return 0.0, None, 0
    offset = dist[us, xs]
    num = dist[np.ix_(us, us)]
    den = dist[np.ix_(xs, xs)] + np.abs(offset[:, None] - offset[None, :])
    ratio = _safe_ratio(num, den)

    flat = int(np.argmax(ratio))
    k = float(ratio.flat[flat])
    if k == 0:
        return 0.0, None, m * m
    a, b = divmod(flat, m)
    return k, (int(xs[a]), int(us[a]), int(xs[b]), int(us[b])), m * m


def _report(k: float, witness, checked: int) -> AdmissibilityReport:
    return AdmissibilityReport(
        k_min=k, admissible=k < 1, witness=witness, quadruples_checked=checked
    )


def p_proximal_constant(
    instance: PairInstance, ps: ProximalStructure, full_domain: bool = False
) -> AdmissibilityReport:
    """
    Smallest k for which T satisfies the p-proximal inequality on every
    constrained quadruple (x1, u1, x2, u2): x ranges over A0 (or all of A with
    full_domain) and u over the proximal preimages of T x.
    """
    require_preconditions(instance, ps)
    sets = proximal_preimage_sets(instance, ps, full_domain=full_domain)
    pairs = [(x, u) for x in sorted(sets) for u in sets[x]]
    xs = np.array([p[0] for p in pairs], dtype=int)
    us = np.array([p[1] for p in pairs], dtype=int)
    k, witness, checked = _constant_over_pairs(instance.space.dist, xs, us)
    logger.debug(f"p-proximal constant {k} over {checked} quadruples, witness {witness}")
    return _report(k, witness, checked)


def p_contraction_constant(
    space: FiniteMetricSpace, self_map: Mapping[int, int]
) -> AdmissibilityReport:
    """
    Smallest k with d(Tx, Ty) <= k (d(x, y) + |d(x, Tx) - d(y, Ty)|) for all x != y.
    Witnesses are reported as (x, Tx, y, Ty).
    """
    n = space.n
    table = {int(k): int(v) for k, v in self_map.items()}
    if set(table) != set(range(n)) or any(not 0 <= v < n for v in table.values()):
        raise InvalidInputError(f"self-map must be a total table on 0..{n - 1}")
    xs = np.arange(n)
    us = np.array([table[x] for x in range(n)], dtype=int)
    # x == y contributes 0/0, so the full square gives the same maximum
    k, witness, _ = _constant_over_pairs(space.dist, xs, us)
    return _report(k, witness, n * (n - 1))


def induced_bound(k: float) -> float:
    """q = 2k / (1 - k), the Lipschitz bound S1 inherits from T"""
    if not 0 < k < 1:
        raise DomainError(f"induced_bound needs 0 < k < 1, got {k}")
    return 2 * k / (1 - k)


def lipschitz_constant(
    im: InducedMap, admissibility: Optional[AdmissibilityReport] = None
) -> LipschitzReport:
    if admissibility is None:
        admissibility = p_proximal_constant(im.source, im.structure)

    pts = np.array(im.domain, dtype=int)
    L, witness = 0.0, None
    if len(pts) > 1:
        images = np.array([im(x) for x in pts], dtype=int)
        dist = im.source.space.dist
        num = dist[np.ix_(images, images)]
        den = dist[np.ix_(pts, pts)]
        ratio = np.zeros_like(num)
        np.divide(num, den, out=ratio, where=den > 0)
        flat = int(np.argmax(ratio))
        L = float(ratio.flat[flat])
        if L > 0:
            a, b = divmod(flat, len(pts))
            witness = (int(pts[a]), int(pts[b]))

    k = admissibility.k_min
    bound_q, satisfied = None, None
    if k < 1:
        bound_q = 2 * k / (1 - k)
        satisfied = L <= bound_q + Config.BOUND_SLACK
        if not satisfied:
            logger.warning(f"Lipschitz constant {L} exceeds induced bound {bound_q}")
    return LipschitzReport(L=L, witness=witness, bound_q=bound_q, bound_satisfied=satisfied)


def induced_p_contraction(im: InducedMap) -> AdmissibilityReport:
    """p-contraction constant of S1 as a self-map of the subspace A0"""
    sub, keep = im.source.space.subspace(im.domain)
    pos = {x: i for i, x in enumerate(keep)}
    report = p_contraction_constant(sub, {pos[x]: pos[im(x)] for x in keep})
    if report.witness is None:
        return report
    return report.model_copy(update={"witness": tuple(keep[i] for i in report.witness)})
