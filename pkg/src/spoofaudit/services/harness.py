"""Evaluation-set construction and repeated-sampling bias studies.

Every set of a study pairs a sample of bona fide utterances from one demographic cell with
the same synthetic class (all spoof entries of the pool, in pool order). Repeat ``r`` draws
with seed ``base_seed + r``; each cell spawns its own stream from that seed.
"""

import logging
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Protocol

import numpy as np
import pandas as pd
from pydantic import ValidationError

from spoofaudit.errors import (
    DataError,
    InconsistentSetsError,
    InsufficientDataError,
    InvariantViolation,
    MissingScoresError,
    UndersizedPoolError,
)
from spoofaudit.models.demographics import Fluency, Label
from spoofaudit.models.metrics import METRIC_ORDER, ScoreSet
from spoofaudit.schemas.metrics import ThresholdSet
from spoofaudit.schemas.records import ScoreRecord
from spoofaudit.schemas.study import (
    STUTTERING_POOL_SIZE,
    ConditionResult,
    EvaluationSet,
    MetricQuadruple,
    SetResult,
    StudyResult,
    StudySpec,
    set_name,
)
from spoofaudit.services.metrics import compute_eer, delta, fpr_at_threshold
from spoofaudit.utils.provenance import build_provenance, ids_digest

logger = logging.getLogger(__name__)


class _Annotated(Protocol):
    utt_id: str
    label: Label
    validated: bool

    def attribute(self, name: str) -> str: ...


def _select(pool: Iterable[_Annotated], label: Label, **attributes: str) -> list[_Annotated]:
    return [
        item
        for item in pool
        if item.label is label
        and item.validated
        and all(item.attribute(k) == v for k, v in attributes.items())
    ]


def build_sets(
    pool: Iterable[_Annotated], spec: StudySpec, seed: int | None = None
) -> list[EvaluationSet]:
    """Sample every (cell, repeat) of a study without replacement.

    ``pool`` is a manifest or a list of score records. ``seed`` overrides ``spec.base_seed``.
    Sets are returned cell by cell, repeats in order.
    """
    items = list(pool)
    base_seed = spec.base_seed if seed is None else seed
    synthetic = tuple(item.utt_id for item in items if item.label is Label.SPOOF)
    if not synthetic:
        raise InsufficientDataError("pool has no spoof entries for the synthetic class")

    cells = []
    for group, value, attrs in spec.cells():
        name = set_name(attrs)
        ids = sorted(item.utt_id for item in _select(items, Label.BONAFIDE, **attrs))
        if len(ids) < group.samples_per_set:
            raise UndersizedPoolError(name, len(ids), group.samples_per_set)
        cells.append((name, group, value, ids))

    sets = []
    for cell_index, (name, group, value, ids) in enumerate(cells):
        for r in range(spec.repeats):
            stream = np.random.SeedSequence(base_seed + r, spawn_key=(cell_index,))
            rng = np.random.default_rng(stream)
            picked = np.sort(rng.choice(len(ids), size=group.samples_per_set, replace=False))
            sets.append(
                EvaluationSet(
                    name=name,
                    group=group.value,
                    value=value,
                    repeat_index=r,
                    seed=base_seed + r,
                    bona_ids=tuple(ids[i] for i in picked),
                    synthetic_ids=synthetic,
                )
            )
        logger.debug(f"{name}: pool {len(ids)}, {spec.repeats} x {group.samples_per_set} sampled")
    return sets


def _index(
    records: Iterable[ScoreRecord] | Mapping[str, ScoreRecord],
) -> Mapping[str, ScoreRecord]:
    if isinstance(records, Mapping):
        return records
    return {r.utt_id: r for r in records}


def quadruple(bona_scores, spoof_scores, thresholds: ThresholdSet) -> MetricQuadruple:
    """FPR at the three calibrated thresholds plus the EER of this bona/synthetic split."""
    bona = np.asarray(bona_scores, dtype=np.float64)
    spoof = np.asarray(spoof_scores, dtype=np.float64)
    eer, _ = compute_eer(ScoreSet(bona_scores=bona, spoof_scores=spoof))
    return MetricQuadruple(
        fpr1=fpr_at_threshold(bona, thresholds.t_eer),
        fpr2=fpr_at_threshold(bona, thresholds.t_fpr),
        fpr3=fpr_at_threshold(bona, thresholds.t_fnr),
        eer=eer,
    )


def _scores_for(index: Mapping[str, ScoreRecord], ids: Sequence[str], label: Label) -> np.ndarray:
    missing = [i for i in ids if i not in index]
    if missing:
        raise MissingScoresError(missing)
    wrong = [i for i in ids if index[i].label is not label]
    if wrong:
        raise InconsistentSetsError(
            f"{len(wrong)} id(s) expected as {label.value} carry another label, e.g. {wrong[0]}"
        )
    return np.fromiter((index[i].score for i in ids), dtype=np.float64, count=len(ids))


def evaluate_set(
    records: Iterable[ScoreRecord] | Mapping[str, ScoreRecord],
    eval_set: EvaluationSet,
    thresholds: ThresholdSet,
) -> MetricQuadruple:
    index = _index(records)
    bona = _scores_for(index, eval_set.bona_ids, Label.BONAFIDE)
    spoof = _scores_for(index, eval_set.synthetic_ids, Label.SPOOF)
    return quadruple(bona, spoof, thresholds)


# Worker state for process-parallel evaluation
_worker_index: Mapping[str, ScoreRecord] = {}
_worker_thresholds: ThresholdSet | None = None


def _init_worker(index: Mapping[str, ScoreRecord], thresholds: ThresholdSet) -> None:
    global _worker_index, _worker_thresholds
    _worker_index = index
    _worker_thresholds = thresholds


def _evaluate_in_worker(eval_set: EvaluationSet) -> MetricQuadruple:
    return evaluate_set(_worker_index, eval_set, _worker_thresholds)


def _evaluate_all(
    index: Mapping[str, ScoreRecord],
    sets: list[EvaluationSet],
    thresholds: ThresholdSet,
    jobs: int,
) -> list[MetricQuadruple]:
    if jobs <= 1 or len(sets) <= 1:
        return [evaluate_set(index, s, thresholds) for s in sets]
    with ProcessPoolExecutor(
        max_workers=jobs, initializer=_init_worker, initargs=(index, thresholds)
    ) as pool:
        return list(pool.map(_evaluate_in_worker, sets))


def _sd(values: list[float], ddof: int) -> float:
    if len(values) <= ddof:
        return 0.0
    return float(np.std(values, ddof=ddof))


def run_study(
    records: Iterable[ScoreRecord],
    spec: StudySpec,
    thresholds: ThresholdSet,
    seed: int | None = None,
    detector_id: str = "",
    jobs: int = 1,
) -> StudyResult:
    """Evaluate every set and repeat, aggregate over repeats and take Δ within each group."""
    index = _index(records)
    sets = build_sets(index.values(), spec, seed)
    base_seed = spec.base_seed if seed is None else seed

    synthetic = sets[0].synthetic_ids
    if any(s.synthetic_ids != synthetic for s in sets):
        raise InvariantViolation("evaluation sets of one study reference different synthetic ids")

    group_sizes = {str(g.value): g.samples_per_set for g in spec.groups}
    logger.info(
        f"Study {spec.name} ({spec.kind}): {len(sets) // spec.repeats} set(s) x {spec.repeats} "
        f"repeat(s), base seed {base_seed}, sizes {group_sizes}, synthetic class {len(synthetic)}, "
        f"thresholds t_eer={thresholds.t_eer:.6g} t_fpr={thresholds.t_fpr:.6g} "
        f"t_fnr={thresholds.t_fnr:.6g}"
    )

    quads = _evaluate_all(index, sets, thresholds, jobs)

    results: list[SetResult] = []
    for start in range(0, len(sets), spec.repeats):
        chunk = sets[start : start + spec.repeats]
        per_repeat = {
            m: [q.as_dict()[m] for q in quads[start : start + spec.repeats]] for m in METRIC_ORDER
        }
        results.append(
            SetResult(
                name=chunk[0].name,
                group=chunk[0].group,
                value=chunk[0].value,
                samples=len(chunk[0].bona_ids),
                per_repeat=per_repeat,
                mean={m: float(np.mean(v)) for m, v in per_repeat.items()},
                sd={m: _sd(v, spec.sd_ddof) for m, v in per_repeat.items()},
                sample_digests=[ids_digest(s.bona_ids) for s in chunk],
            )
        )

    results = _with_deltas(results)
    provenance = build_provenance(
        "study",
        {
            "spec": spec.model_dump(mode="json"),
            "base_seed": base_seed,
            "detector_id": detector_id,
            "thresholds": thresholds.model_dump(mode="json", exclude={"provenance"}),
        },
    )
    return StudyResult(
        detector_id=detector_id,
        spec=spec.model_copy(update={"base_seed": base_seed}),
        thresholds=thresholds,
        synthetic_count=len(synthetic),
        synthetic_digest=ids_digest(synthetic),
        sets=results,
        provenance=provenance,
    )


def _with_deltas(results: list[SetResult]) -> list[SetResult]:
    groups: dict[str | None, list[int]] = {}
    for i, r in enumerate(results):
        groups.setdefault(r.group, []).append(i)

    out = list(results)
    for members in groups.values():
        deltas = {m: delta([results[i].mean[m] for i in members]) for m in METRIC_ORDER}
        for pos, i in enumerate(members):
            d = {m: deltas[m][pos] for m in METRIC_ORDER}
            if any(v < 0 for v in d.values()):
                raise InvariantViolation(f"negative Δ for {results[i].name}: {d}")
            out[i] = results[i].model_copy(update={"delta": d})
    return out


def condition_study(
    records: Iterable[ScoreRecord],
    thresholds: ThresholdSet,
    condition: Fluency,
    detector_id: str = "",
) -> ConditionResult:
    """Absolute metrics for all bona fide speech of one fluency condition vs. the synthetic class.

    ``fluent`` takes every bona fide record not marked as stuttering.
    """
    items = list(records)
    if condition is Fluency.STUTTERING:
        bona = [r.score for r in items if r.label is Label.BONAFIDE and r.fluency is condition]
    else:
        bona = [
            r.score
            for r in items
            if r.label is Label.BONAFIDE and r.fluency is not Fluency.STUTTERING
        ]
    spoof = [r.score for r in items if r.label is Label.SPOOF]
    if not bona:
        raise InsufficientDataError(f"no bona fide records for condition {condition.value}")
    if not spoof:
        raise InsufficientDataError("no spoof records for the synthetic class")

    metrics = quadruple(bona, spoof, thresholds)
    logger.info(
        f"{condition.value} condition: {len(bona)} bona fide vs {len(spoof)} synthetic, "
        f"FPR1 {metrics.fpr1:.2%}, EER {metrics.eer:.2%}"
    )
    return ConditionResult(
        detector_id=detector_id,
        condition=condition.value,
        n_bona=len(bona),
        n_spoof=len(spoof),
        metrics=metrics,
        thresholds=thresholds,
        provenance=build_provenance(
            "fluency",
            {
                "condition": condition.value,
                "detector_id": detector_id,
                "thresholds": thresholds.model_dump(mode="json", exclude={"provenance"}),
            },
        ),
    )


def stuttering_study(
    records: Iterable[ScoreRecord],
    thresholds: ThresholdSet,
    expected_pool: int | None = STUTTERING_POOL_SIZE,
    detector_id: str = "",
) -> MetricQuadruple:
    """Absolute metrics with the bona fide class replaced by stuttering speech."""
    result = condition_study(records, thresholds, Fluency.STUTTERING, detector_id)
    check_stuttering_pool(result.n_bona, expected_pool)
    return result.metrics


def check_stuttering_pool(n_bona: int, expected: int | None = STUTTERING_POOL_SIZE) -> bool:
    """Warn when the stuttering pool size differs from the expected count."""
    if expected is None or n_bona == expected:
        return True
    logger.warning(f"Stuttering pool has {n_bona} bona fide utterances, expected {expected}")
    return False


def study_frame(result: StudyResult) -> pd.DataFrame:
    """One row per set x metric: detector, set, group, metric, mean, sd, delta."""
    rows = [
        {
            "detector": result.detector_id,
            "set": s.name,
            "group": "" if s.group is None else s.group,
            "metric": m.value,
            "mean": s.mean[m],
            "sd": s.sd[m],
            "delta": s.delta.get(m, 0.0),
        }
        for s in result.sets
        for m in METRIC_ORDER
    ]
    return pd.DataFrame(rows, columns=["detector", "set", "group", "metric", "mean", "sd", "delta"])


def write_study_result(result: StudyResult, path: Path) -> tuple[Path, Path]:
    """Write ``<path>`` (JSON) and the matching ``.csv`` next to it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(result.model_dump_json(indent=2) + "\n")
    csv_path = path.with_suffix(".csv")
    study_frame(result).to_csv(csv_path, index=False, float_format="%.17g")
    return path, csv_path


def load_study_result(path: Path) -> StudyResult:
    path = Path(path)
    try:
        return StudyResult.model_validate_json(path.read_text())
    except FileNotFoundError as e:
        raise DataError(f"Study result not found: {path}") from e
    except ValidationError as e:
        raise DataError(f"Invalid study result {path}: {e}") from e


def load_condition_result(path: Path) -> ConditionResult:
    path = Path(path)
    try:
        return ConditionResult.model_validate_json(path.read_text())
    except FileNotFoundError as e:
        raise DataError(f"Condition result not found: {path}") from e
    except ValidationError as e:
        raise DataError(f"Invalid condition result {path}: {e}") from e

