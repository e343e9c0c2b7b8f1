"""
Instance files, reference fixtures, strip generators and report writers.

Instance files are JSON with a "kind" discriminator ("finite" or "euclidean").
Indices, not labels, are authoritative. JSON floats use the shortest
round-trip representation; trace CSV floats use 17 significant digits.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Annotated, Dict, Iterable, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from analysis import (
    AdmissibilityReport,
    Classification,
    LipschitzReport,
    classify,
    induced_p_contraction,
    lipschitz_constant,
    p_proximal_constant,
)
from config import Config
from errors import DomainError, InstanceParseError, NonUniquePreimageError
from metric_core import FiniteMetricSpace, euclidean_embed
from proximal import (
    PairInstance,
    PreconditionReport,
    ProximalStructure,
    check_preconditions,
    induced_map,
    proximal_sets,
)
from solver import SolveResult

logger = logging.getLogger(__name__)

TRACE_HEADER = ["step", "point_index", "dist_to_final", "apriori_bound", "proximity_gap"]


class _InstanceFileBase(BaseModel):
    model_config = ConfigDict(extra="forbid")

    A: List[int]
    B: List[int]
    T: Dict[int, int]
    epsilon: float = Field(default_factory=lambda: Config.EPS_PROX, ge=0)
    same_set: bool = False
    labels: Optional[List[str]] = None


class FiniteInstanceFile(_InstanceFileBase):
    kind: Literal["finite"] = "finite"
    n: int = Field(gt=0)
    dist: List[List[float]]


class EuclideanInstanceFile(_InstanceFileBase):
    kind: Literal["euclidean"] = "euclidean"
    points: List[List[float]]


InstanceFile = Annotated[
    Union[FiniteInstanceFile, EuclideanInstanceFile], Field(discriminator="kind")
]
_instance_adapter = TypeAdapter(InstanceFile)


def instance_from_file(parsed: Union[FiniteInstanceFile, EuclideanInstanceFile]) -> PairInstance:
    if isinstance(parsed, FiniteInstanceFile):
        if len(parsed.dist) != parsed.n or any(len(row) != parsed.n for row in parsed.dist):
            raise InstanceParseError(f"dist must be an {parsed.n}x{parsed.n} matrix")
        space = FiniteMetricSpace(dist=parsed.dist, labels=parsed.labels)
    else:
        space = euclidean_embed(parsed.points, labels=parsed.labels)
    return PairInstance(
        space=space, A=parsed.A, B=parsed.B, T=parsed.T, eps_prox=parsed.epsilon, same_set=parsed.same_set
    )


def instance_to_file(instance: PairInstance) -> Union[FiniteInstanceFile, EuclideanInstanceFile]:
    space = instance.space
    common = dict(
        A=list(instance.A),
        B=list(instance.B),
        T=dict(instance.T),
        epsilon=instance.eps_prox,
        same_set=instance.same_set,
        labels=list(space.labels) if space.labels else None,
    )
    if space.coords is not None:
        return EuclideanInstanceFile(points=space.coords.tolist(), **common)
    return FiniteInstanceFile(n=space.n, dist=space.dist.tolist(), **common)


def load_instance(path: Union[str, Path]) -> PairInstance:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InstanceParseError(f"cannot read instance file {path}: {e}") from e
    try:
        parsed = _instance_adapter.validate_json(text)
    except ValidationError as e:
        raise InstanceParseError(f"invalid instance file {path}: {e}") from e
    instance = instance_from_file(parsed)
    logger.debug(f"loaded {parsed.kind} instance from {path}: n={instance.space.n}")
    return instance


def save_instance(instance: PairInstance, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(instance_to_file(instance).model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


# ====================
# Reference fixtures
# ====================

FOUR_CYCLE = [
    [0.0, 1.0, 1.0, 2.0],
    [1.0, 0.0, 2.0, 1.0],
    [1.0, 2.0, 0.0, 1.0],
    [2.0, 1.0, 1.0, 0.0],
]
FOUR_CYCLE_LABELS = ("a1", "a2", "b1", "b2")


def flat4() -> PairInstance:
    """Both A-points go to b1; S1 is the constant map a1"""
    space = FiniteMetricSpace(dist=FOUR_CYCLE, labels=FOUR_CYCLE_LABELS)
    return PairInstance(space=space, A=(0, 1), B=(2, 3), T={0: 2, 1: 2})


def swap4() -> PairInstance:
    """a1 -> b2, a2 -> b1; S1 swaps the A-points and k_min = 1"""
    space = FiniteMetricSpace(dist=FOUR_CYCLE, labels=FOUR_CYCLE_LABELS)
    return PairInstance(space=space, A=(0, 1), B=(2, 3), T={0: 3, 1: 2})


def gen_strip(n: int, c: int) -> PairInstance:
    """
    Parallel segments x=0 and x=1 sampled at heights i/n. T sends the A-point at
    height i/n to the B-point at height floor(i/c)/n.
    """
    if n < 1:
        raise DomainError(f"strip needs n >= 1, got {n}")
    if c < 2:
        raise DomainError(f"strip needs c >= 2, got {c}")
    heights = [i / n for i in range(n + 1)]
    points = [(0.0, h) for h in heights] + [(1.0, h) for h in heights]
    labels = [f"a{i}" for i in range(n + 1)] + [f"b{j}" for j in range(n + 1)]
    space = euclidean_embed(points, labels=labels)
    return PairInstance(
        space=space,
        A=tuple(range(n + 1)),
        B=tuple(range(n + 1, 2 * n + 2)),
        T={i: n + 1 + i // c for i in range(n + 1)},
    )


def gen_geometric_strip(m: int, c: int, eps_prox: Optional[float] = None) -> PairInstance:
    """
    Parallel segments sampled at heights 0, c^-(m-1), ..., c^-1, 1. T sends the
    A-point at height h to the B-point at height h/c, and the lowest positive
    height to 0. Certified k_min = 1/(2c-3) for c >= 3 and m >= 2, L = 1/(c-1).
    """
    eps = Config.EPS_PROX if eps_prox is None else eps_prox
    if m < 1:
        raise DomainError(f"geometric strip needs m >= 1, got {m}")
    if c < 2:
        raise DomainError(f"geometric strip needs c >= 2, got {c}")
    gap = float(c) ** -(m - 1)
    if math.hypot(1.0, gap) - 1.0 <= 2 * eps:
        raise DomainError(f"height gap {gap} is not resolvable against eps_prox={eps}; lower m")

    heights = [0.0] + [float(c) ** -(m - i) for i in range(1, m + 1)]
    points = [(0.0, h) for h in heights] + [(1.0, h) for h in heights]
    labels = [f"a{i}" for i in range(m + 1)] + [f"b{j}" for j in range(m + 1)]
    space = euclidean_embed(points, labels=labels)
    offset = m + 1
    return PairInstance(
        space=space,
        A=tuple(range(offset)),
        B=tuple(range(offset, 2 * offset)),
        T={i: offset + max(i - 1, 0) for i in range(offset)},
        eps_prox=eps,
    )


# ====================
# Reports
# ====================

class AnalysisReport(BaseModel):
    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    n: int
    dAB: float
    A0: List[int]
    B0: List[int]
    preconditions: PreconditionReport
    admissibility: Optional[AdmissibilityReport] = None
    classification: Optional[Classification] = None
    induced_map: Optional[Dict[int, int]] = None
    induced_map_error: Optional[str] = None
    lipschitz: Optional[LipschitzReport] = None
    s1_p_contraction: Optional[AdmissibilityReport] = None


def build_analysis_report(
    instance: PairInstance,
    ps: Optional[ProximalStructure] = None,
    full_domain: bool = False,
) -> AnalysisReport:
    ps = ps or proximal_sets(instance)
    pre = check_preconditions(instance, ps)
    fields = dict(n=instance.space.n, dAB=ps.dAB, A0=list(ps.A0), B0=list(ps.B0), preconditions=pre)
    if not pre.ok:
        return AnalysisReport(**fields)

    adm = p_proximal_constant(instance, ps, full_domain=full_domain)
    fields.update(admissibility=adm, classification=classify(adm.k_min))
    try:
        im = induced_map(instance, ps)
    except NonUniquePreimageError as e:
        return AnalysisReport(**fields, induced_map_error=str(e))
    return AnalysisReport(
        **fields,
        induced_map=dict(im.table),
        lipschitz=lipschitz_constant(im, adm),
        s1_p_contraction=induced_p_contraction(im),
    )


def _g17(value: float) -> str:
    return format(value, ".17g")


def write_json_report(model: BaseModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def write_trace_csv(
    result: SolveResult, instance: PairInstance, ps: ProximalStructure, path: Union[str, Path]
) -> Path:
    """One row per Picard step, starting at step 0"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dist = instance.space.dist
    bounds = {check.n: check.bound for check in result.bound_checks}
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for step, x in enumerate(result.trace):
            writer.writerow([
                step,
                x,
                _g17(float(dist[x, result.z])),
                _g17(bounds[step]) if step in bounds else "",
                _g17(float(dist[x, instance.T[x]]) - ps.dAB),
            ])
    return path


def write_jsonl(records: Iterable[BaseModel], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(record.model_dump_json() + "\n")
    return path


def read_jsonl(path: Union[str, Path]) -> List[dict]:
    with open(path, "r", encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]
