"""
Finite metric spaces: construction, validation, repair and random generation.

Distances are float64 matrices. Fixture values are integers or small dyadic
rationals, so equality assertions on them are exact.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field
from scipy.sparse.csgraph import floyd_warshall
from scipy.spatial.distance import cdist

from config import Config
from errors import InvalidInputError, MetricViolationError, ShapeError

logger = logging.getLogger(__name__)

ViolationKind = Literal[
    "asymmetry", "negative", "nonzero-diagonal", "triangle", "zero-offdiagonal"
]


class MetricViolation(BaseModel):
    """One failed metric axiom with a concrete witness"""

    model_config = ConfigDict(frozen=True)

    kind: ViolationKind
    witness: Tuple[int, ...]
    magnitude: float = Field(gt=0)


def _as_square(matrix: npt.ArrayLike) -> np.ndarray:
    try:
        arr = np.array(matrix, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise ShapeError(f"distance matrix is not rectangular: {e}") from e
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"distance matrix must be square, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ShapeError("distance matrix is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("distance matrix contains NaN or infinite entries")
    return arr


def validate_metric(
    matrix: npt.ArrayLike, eps_metric: Optional[float] = None
) -> List[MetricViolation]:
    """
    Check the four metric axioms on a square matrix.

    Pairs are reported once, as (i, j) with i < j. Triangle witnesses are
    (i, l, j) for d(i, j) > d(i, l) + d(l, j) + eps_metric, with the excess as
    magnitude.
    """
    eps = Config.EPS_METRIC if eps_metric is None else eps_metric
    d = _as_square(matrix)
    n = d.shape[0]
    violations: List[MetricViolation] = []

    for i in range(n):
        if abs(d[i, i]) > eps:
            violations.append(
                MetricViolation(kind="nonzero-diagonal", witness=(i, i), magnitude=abs(d[i, i]))
            )

    floor = max(eps, np.finfo(np.float64).tiny)
    iu, ju = np.triu_indices(n, 1)
    for i, j in zip(iu.tolist(), ju.tolist()):
        low = min(d[i, j], d[j, i])
        gap = abs(d[i, j] - d[j, i])
        if gap > eps:
            violations.append(MetricViolation(kind="asymmetry", witness=(i, j), magnitude=gap))
        if low < 0:
            violations.append(MetricViolation(kind="negative", witness=(i, j), magnitude=-low))
        elif low < floor:
            violations.append(
                MetricViolation(kind="zero-offdiagonal", witness=(i, j), magnitude=floor - low)
            )

    # excess[i, l, j] = d(i, j) - d(i, l) - d(l, j)
    excess = d[:, None, :] - d[:, :, None] - d[None, :, :]
    idx = np.arange(n)
    keep = (idx[:, None, None] < idx[None, None, :]) & (idx[:, None, None] != idx[None, :, None])
    keep &= idx[None, :, None] != idx[None, None, :]
    for i, l, j in np.argwhere(keep & (excess > eps)).tolist():
        violations.append(
            MetricViolation(kind="triangle", witness=(i, l, j), magnitude=float(excess[i, l, j]))
        )

    return violations


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """n distinct points with a validated distance matrix"""

    dist: np.ndarray
    labels: Optional[Tuple[str, ...]] = None
    coords: Optional[np.ndarray] = None
    eps_metric: float = field(default_factory=lambda: Config.EPS_METRIC)

    def __post_init__(self):
        dist = _as_square(self.dist)
        violations = validate_metric(dist, self.eps_metric)
        if violations:
            raise MetricViolationError(violations)
        dist.setflags(write=False)
        object.__setattr__(self, "dist", dist)

        if self.labels is not None:
            labels = tuple(str(l) for l in self.labels)
            if len(labels) != self.n:
                raise InvalidInputError(f"{len(labels)} labels for {self.n} points")
            object.__setattr__(self, "labels", labels)

        if self.coords is not None:
            coords = np.array(self.coords, dtype=np.float64)
            if coords.ndim != 2 or coords.shape[0] != self.n:
                raise ShapeError(f"coordinates of shape {coords.shape} for {self.n} points")
            coords.setflags(write=False)
            object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else str(i)

    def subspace(self, indices: Sequence[int]) -> Tuple["FiniteMetricSpace", Tuple[int, ...]]:
        """Restrict to `indices`; returns the subspace and the original index of each new point"""
        keep = tuple(sorted(set(int(i) for i in indices)))
        if not keep:
            raise InvalidInputError("subspace needs at least one point")
        sel = np.array(keep)
        return (
            FiniteMetricSpace(
                dist=self.dist[np.ix_(sel, sel)],
                labels=tuple(self.labels[i] for i in keep) if self.labels else None,
                coords=self.coords[sel] if self.coords is not None else None,
                eps_metric=self.eps_metric,
            ),
            keep,
        )

    def scaled(self, factor: float) -> "FiniteMetricSpace":
        if factor <= 0:
            raise InvalidInputError(f"scale factor must be positive, got {factor}")
        return FiniteMetricSpace(
            dist=self.dist * factor,
            labels=self.labels,
            coords=self.coords * factor if self.coords is not None else None,
            eps_metric=self.eps_metric,
        )


def metric_repair(matrix: npt.ArrayLike, eps_metric: Optional[float] = None) -> FiniteMetricSpace:
    """
    Replace every distance by the shortest path length through the complete
    graph the matrix describes. The result never exceeds the input entrywise and
    is the identity on matrices that already satisfy the triangle inequality.
    """
    eps = Config.EPS_METRIC if eps_metric is None else eps_metric
    d = _as_square(matrix)
    if np.any(d < 0):
        raise InvalidInputError("metric_repair needs nonnegative distances")
    if np.max(np.abs(d - d.T)) > eps:
        raise InvalidInputError("metric_repair needs a symmetric matrix")
    if np.any(np.diag(d) != 0):
        raise InvalidInputError("metric_repair needs a zero diagonal")
    off = ~np.eye(d.shape[0], dtype=bool)
    if np.any(d[off] == 0):
        raise InvalidInputError("metric_repair needs strictly positive off-diagonal distances")

    d = np.minimum(d, d.T)
    closed = floyd_warshall(d, directed=False)
    shortened = int(np.count_nonzero(closed < d))
    if shortened:
        logger.debug(f"metric_repair shortened {shortened} entries")
    return FiniteMetricSpace(dist=closed, eps_metric=eps)


def euclidean_embed(
    points: Sequence[Sequence[float]], labels: Optional[Sequence[str]] = None
) -> FiniteMetricSpace:
    """Pairwise Euclidean distances of a point cloud"""
    try:
        coords = np.array(points, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise InvalidInputError(f"points must share one dimension: {e}") from e
    if coords.ndim != 2 or coords.shape[0] == 0:
        raise InvalidInputError(f"expected a non-empty list of coordinate vectors, got shape {coords.shape}")

    d = cdist(coords, coords)
    dup = np.argwhere(np.triu(d == 0, k=1))
    if len(dup):
        i, j = dup[0].tolist()
        raise InvalidInputError(f"duplicate points {i} and {j} at {coords[i].tolist()}")
    return FiniteMetricSpace(
        dist=d, labels=tuple(labels) if labels is not None else None, coords=coords
    )


def random_metric(
    seed: int, n: int, scale: float = 1.0, levels: Optional[int] = None
) -> FiniteMetricSpace:
    """
    Deterministic random metric on n points.

    Off-diagonal entries are drawn uniformly in (0, scale], or from the lattice
    {scale/levels, ..., scale} when `levels` is given, then metric-repaired.
    """
    if n < 2:
        raise InvalidInputError(f"random_metric needs n >= 2, got {n}")
    if not scale > 0:
        raise InvalidInputError(f"scale must be positive, got {scale}")
    if levels is not None and levels < 1:
        raise InvalidInputError(f"levels must be positive, got {levels}")

    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, 1)
    if levels is None:
        draws = scale * (1.0 - rng.random(len(iu[0])))
    else:
        draws = rng.integers(1, levels + 1, size=len(iu[0])) * (scale / levels)

    d = np.zeros((n, n))
    d[iu] = draws
    d = d + d.T
    return metric_repair(d)
