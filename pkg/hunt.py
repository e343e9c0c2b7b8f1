"""
Hunt mode: random instances with T(A0) inside B0, certified end to end.

Each trial draws from its own generator seeded by (seed, trial), so any record
can be regenerated on its own and trials can run in any order or process.
Records with k_min < 1/3 must show the full best proximity theorem; a failure
aborts the hunt with the offending instance attached.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Collection, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from analysis import (
    Classification,
    classify,
    induced_p_contraction,
    lipschitz_constant,
    p_proximal_constant,
)
from config import Config
from errors import (
    HuntInvariantError,
    InvalidInputError,
    NonUniquePreimageError,
    PreconditionError,
    ProximityError,
)
from metric_core import euclidean_embed, random_metric
from proximal import PairInstance, induced_map, proximal_sets
from solver import best_proximity_oracle, solve_all_starts, verify_best_proximity

logger = logging.getLogger(__name__)

CLASSIFICATIONS: Tuple[Classification, ...] = (
    "admissible_lt_third",
    "admissible_third_to_one",
    "inadmissible",
)

DrawFamily = Literal["metric", "strip"]
DRAW_FAMILIES: Tuple[str, ...] = ("metric", "strip")

# smallest height step a strip draw may use; keeps every off-pair distance
# sqrt(1 + gap^2) resolvable from d(A, B) = 1 at the default eps_prox
MIN_STRIP_GAP = 3e-4
STRIP_MAX_POINTS = 24


class HuntRecord(BaseModel):
    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    seed: int
    trial: int
    n: int
    a0_size: int
    k_min: float
    L: Optional[float] = None
    q: Optional[float] = None
    preimage_unique: bool
    picard_all_converge: bool
    oracle_agrees: bool
    classification: Classification
    s1_p_constant: Optional[float] = None
    max_steps: Optional[int] = None


def _check_family(family: str, n_max: int) -> None:
    if family not in DRAW_FAMILIES:
        raise InvalidInputError(f"unknown draw family {family!r}, expected one of {DRAW_FAMILIES}")
    if family == "strip" and n_max > STRIP_MAX_POINTS:
        raise InvalidInputError(f"strip draws support at most {STRIP_MAX_POINTS} points, got n_max={n_max}")


def draw_trial(
    seed: int,
    trial: int,
    n_range: Tuple[int, int],
    scale: Optional[float] = None,
    levels: Optional[int] = None,
    family: DrawFamily = "metric",
) -> PairInstance:
    """
    One random instance. The "metric" family draws a random metric, a random
    nonempty split into A and B and a random T with images in B0; `scale` and
    `levels` apply to it only. The "strip" family draws parallel segments with
    a planted contraction ratio (see _draw_strip).
    """
    n_min, n_max = n_range
    _check_family(family, n_max)
    rng = np.random.default_rng([seed, trial])
    n = int(rng.integers(n_min, n_max + 1))
    if family == "strip":
        return _draw_strip(rng, n)

    space = random_metric(
        int(rng.integers(2**63 - 1)),
        n,
        scale=Config.HUNT_SCALE if scale is None else scale,
        levels=levels,
    )
    perm = rng.permutation(n)
    cut = int(rng.integers(1, n))
    A = tuple(sorted(perm[:cut].tolist()))
    B = tuple(sorted(perm[cut:].tolist()))

    # B0 depends on A and B only, so any provisional T will do
    provisional = PairInstance(space=space, A=A, B=B, T={x: B[0] for x in A})
    b0 = np.array(proximal_sets(provisional).B0)
    T = {x: int(rng.choice(b0)) for x in A}
    return PairInstance(space=space, A=A, B=B, T=T)


def _draw_strip(rng: np.random.Generator, n: int) -> PairInstance:
    """
    n // 2 points on each of the segments x = 0 (A) and x = 1 (B) at shared
    heights 0 < h1 < ... < 1, so d(A, B) = 1 and A0 = A. Consecutive heights
    shrink by a planted ratio jittered by up to 15% per step, and T sends each
    A-point to the B-point one height lower (the bottom one to its partner).
    An odd n adds one B-point above the top, outside B0.

    Without jitter k_min = ratio/(2 - 3 ratio) for ratios up to 1/2, so draws
    below 1/3 land in the Banach regime, draws in [1/3, 1/2) in the middle
    one, and larger ratios reach k_min = 1.
    """
    size = n // 2
    ratio = float(rng.uniform(0.05, 0.6))
    while True:
        steps = np.clip(ratio * rng.uniform(0.85, 1.15, size=max(size - 2, 0)), 0.02, 0.95)
        positive = np.cumprod(np.concatenate([[1.0], steps]))[: size - 1][::-1]
        heights = np.concatenate([[0.0], positive])
        if np.min(np.diff(heights), initial=np.inf) >= MIN_STRIP_GAP:
            break
        ratio = min(0.95, ratio * 1.25)

    points = [(0.0, h) for h in heights] + [(1.0, h) for h in heights]
    labels = [f"a{i}" for i in range(size)] + [f"b{j}" for j in range(size)]
    if n % 2:
        points.append((1.0, 1.0 + float(rng.uniform(0.25, 1.0))))
        labels.append(f"b{size}")
    return PairInstance(
        space=euclidean_embed(points, labels=labels),
        A=tuple(range(size)),
        B=tuple(range(size, n)),
        T={i: size + max(i - 1, 0) for i in range(size)},
    )


def evaluate_trial(instance: PairInstance, seed: int, trial: int) -> HuntRecord:
    ps = proximal_sets(instance)
    adm = p_proximal_constant(instance, ps)
    k = adm.k_min
    fields = dict(
        seed=seed,
        trial=trial,
        n=instance.space.n,
        a0_size=len(ps.A0),
        k_min=k,
        q=2 * k / (1 - k) if k < 1 else None,
        classification=classify(k),
    )

    try:
        im = induced_map(instance, ps)
    except NonUniquePreimageError:
        return HuntRecord(
            **fields, preimage_unique=False, picard_all_converge=False, oracle_agrees=False
        )

    lip = lipschitz_constant(im, adm)
    runs = solve_all_starts(instance, im, admissibility=adm)
    limits = {r.z for r in runs}
    all_converge = all(r.converged for r in runs) and len(limits) == 1

    agrees = False
    if all_converge:
        z = runs[0].z
        oracle = best_proximity_oracle(instance, ps)
        agrees = (
            oracle.is_best_proximity
            and oracle.argmin_set == [z]
            and verify_best_proximity(instance, ps, z)
        )

    return HuntRecord(
        **fields,
        L=lip.L,
        preimage_unique=True,
        picard_all_converge=all_converge,
        oracle_agrees=agrees,
        s1_p_constant=induced_p_contraction(im).k_min,
        max_steps=max(r.steps for r in runs),
    )


def _failed_record(instance: PairInstance, seed: int, trial: int) -> HuntRecord:
    return HuntRecord(
        seed=seed,
        trial=trial,
        n=instance.space.n,
        a0_size=0,
        k_min=float("inf"),
        preimage_unique=False,
        picard_all_converge=False,
        oracle_agrees=False,
        classification="inadmissible",
    )


def run_trial(instance: PairInstance, seed: int, trial: int) -> HuntRecord:
    try:
        return evaluate_trial(instance, seed, trial)
    except ProximityError as e:
        logger.warning(f"trial {trial} failed and is recorded as inadmissible: {e}")
        return _failed_record(instance, seed, trial)


def _random_trial(args) -> HuntRecord:
    seed, trial, n_range, scale, levels, family = args
    return run_trial(draw_trial(seed, trial, n_range, scale, levels, family), seed, trial)


def theorem_violation(record: HuntRecord) -> Optional[str]:
    """Why a k_min < 1/3 record contradicts the best proximity theorem, or None"""
    if record.classification != "admissible_lt_third":
        return None
    if not record.preimage_unique:
        return "proximal preimages are not unique"
    if record.L is None or record.q is None or record.L > record.q + Config.BOUND_SLACK:
        return f"Lipschitz constant {record.L} exceeds induced bound {record.q}"
    if not record.picard_all_converge:
        return "Picard iteration does not reach one common fixed point from every start"
    if not record.oracle_agrees:
        return "oracle does not confirm a unique best proximity point"
    return None


def _as_filter(filters: Union[None, str, Collection[str]]) -> Optional[Collection[str]]:
    if filters is None:
        return None
    wanted = {filters} if isinstance(filters, str) else set(filters)
    unknown = wanted - set(CLASSIFICATIONS)
    if unknown:
        raise InvalidInputError(f"unknown classification filter {sorted(unknown)}")
    return wanted


def hunt(
    seed: int,
    trials: int,
    n_range: Tuple[int, int],
    filters: Union[None, str, Collection[str]] = None,
    injected: Sequence[PairInstance] = (),
    scale: Optional[float] = None,
    levels: Optional[int] = None,
    workers: Optional[int] = None,
    family: DrawFamily = "metric",
) -> List[HuntRecord]:
    """
    Run `trials` random trials (after any injected instances, which take trial
    indices 0..len(injected)-1) and return the records matching `filters`, in
    trial order.
    """
    if trials < 1:
        raise PreconditionError(f"hunt needs at least one trial, got {trials}")
    n_min, n_max = n_range
    if n_min < 2 or n_max < n_min:
        raise InvalidInputError(f"point-count range must satisfy 2 <= n_min <= n_max, got {n_range}")
    _check_family(family, n_max)
    wanted = _as_filter(filters)
    workers = Config.HUNT_WORKERS if workers is None else workers

    instances: Dict[int, PairInstance] = {}
    records = []
    for trial, instance in enumerate(injected):
        instances[trial] = instance
        records.append(run_trial(instance, seed, trial))

    first = len(injected)
    jobs = [(seed, t, (n_min, n_max), scale, levels, family) for t in range(first, first + trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records.extend(pool.map(_random_trial, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        records.extend(_random_trial(job) for job in jobs)

    for record in records:
        reason = theorem_violation(record)
        if reason:
            instance = instances.get(record.trial) or draw_trial(
                seed, record.trial, (n_min, n_max), scale, levels, family
            )
            logger.error(f"trial {record.trial}: {reason}")
            raise HuntInvariantError(record, instance, reason)

    logger.info(f"hunt seed={seed} family={family}: {len(records)} trials, {summarize(records)['counts']}")
    if wanted is None:
        return records
    return [r for r in records if r.classification in wanted]


def summarize(records: Sequence[HuntRecord]) -> dict:
    counts = {c: 0 for c in CLASSIFICATIONS}
    for r in records:
        counts[r.classification] += 1

    def top(values):
        values = [v for v in values if v is not None]
        return max(values) if values else None

    middle = [r for r in records if r.classification == "admissible_third_to_one"]
    return {
        "records": len(records),
        "counts": counts,
        "max_L": top(r.L for r in records),
        "max_L_third_to_one": top(r.L for r in middle),
        "third_to_one_with_L_ge_1": sum(1 for r in middle if r.L is not None and r.L >= 1),
        "max_s1_p_constant_third_to_one": top(r.s1_p_constant for r in middle),
    }


def verify_record(
    record: HuntRecord,
    n_range: Tuple[int, int],
    scale: Optional[float] = None,
    levels: Optional[int] = None,
    instance: Optional[PairInstance] = None,
    family: DrawFamily = "metric",
) -> List[str]:
    """
    Re-derive a record from its (seed, trial) coordinates, or from `instance`
    when given, and list every inconsistency found.
    """
    issues = []
    if record.classification != classify(record.k_min):
        issues.append(f"classification {record.classification} does not match k_min {record.k_min}")
    if record.k_min < 1:
        expected_q = 2 * record.k_min / (1 - record.k_min)
        if record.q is None or abs(record.q - expected_q) > 1e-12:
            issues.append(f"q {record.q} does not match 2k/(1-k) = {expected_q}")
    elif record.q is not None:
        issues.append(f"q {record.q} reported for inadmissible k_min {record.k_min}")
    if record.k_min < 1 and not record.preimage_unique:
        issues.append("k_min < 1 but proximal preimages are not unique")
    if record.L is not None and record.q is not None and record.L > record.q + Config.BOUND_SLACK:
        issues.append(f"L {record.L} exceeds q {record.q}")

    if instance is None:
        instance = draw_trial(record.seed, record.trial, n_range, scale, levels, family)
    recomputed = run_trial(instance, record.seed, record.trial)
    if recomputed != record:
        issues.append(f"recomputation differs: {recomputed.model_dump()} != {record.model_dump()}")
    return issues
