"""EER, FPR/FNR at fixed thresholds, reference calibration and Δ bias measures.

Scores are oriented so that higher means more synthetic. A score ``s`` is flagged synthetic
at threshold ``t`` iff ``s >= t``. All rates are fractions.
"""

import logging
from collections.abc import Mapping, Sequence

import numpy as np

from spoofaudit.errors import InsufficientDataError, UnattainableTargetError
from spoofaudit.models.metrics import Metric, ScoreSet
from spoofaudit.schemas.metrics import BiasMeasure, DetectionReport, ThresholdSet

logger = logging.getLogger(__name__)


def _scores(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise InsufficientDataError(f"{what} scores are empty")
    return arr


def candidate_thresholds(s: ScoreSet) -> np.ndarray:
    """Midpoints between consecutive distinct pooled scores, plus -inf and +inf."""
    pooled = np.unique(np.concatenate([s.bona_scores, s.spoof_scores]))
    mids = (pooled[:-1] + pooled[1:]) / 2.0
    return np.concatenate([[-np.inf], mids, [np.inf]])


def _rates(bona: np.ndarray, spoof: np.ndarray, thresholds: np.ndarray):
    bona_sorted = np.sort(bona)
    spoof_sorted = np.sort(spoof)
    flagged = bona_sorted.size - np.searchsorted(bona_sorted, thresholds, side="left")
    missed = np.searchsorted(spoof_sorted, thresholds, side="left")
    return flagged / bona_sorted.size, missed / spoof_sorted.size


def compute_eer(s: ScoreSet) -> tuple[float, float]:
    """EER at the candidate threshold where |FPR - FNR| is smallest (lowest threshold on ties).

    Returns ``(eer, threshold)``.
    """
    bona = _scores(s.bona_scores, "bona fide")
    spoof = _scores(s.spoof_scores, "spoof")
    thresholds = candidate_thresholds(s)
    fpr, fnr = _rates(bona, spoof, thresholds)
    idx = int(np.argmin(np.abs(fpr - fnr)))
    return float((fpr[idx] + fnr[idx]) / 2.0), float(thresholds[idx])


def fpr_at_threshold(bona_scores, t: float) -> float:
    bona = _scores(bona_scores, "bona fide")
    return int(np.count_nonzero(bona >= t)) / bona.size


def fnr_at_threshold(spoof_scores, t: float) -> float:
    spoof = _scores(spoof_scores, "spoof")
    return int(np.count_nonzero(spoof < t)) / spoof.size


def calibrate(
    reference: ScoreSet,
    fpr_target: float = 0.08,
    fnr_target: float = 0.08,
    reference_id: str = "",
) -> ThresholdSet:
    """Derive the three operating thresholds from a reference score set.

    ``t_fpr`` is the smallest candidate with FPR <= fpr_target and ``t_fnr`` the largest
    candidate with FNR <= fnr_target. Targets are fractions (0.08 is 8%).
    """
    bona = _scores(reference.bona_scores, "reference bona fide")
    spoof = _scores(reference.spoof_scores, "reference spoof")
    thresholds = candidate_thresholds(reference)
    fpr, fnr = _rates(bona, spoof, thresholds)

    eer, t_eer = compute_eer(reference)

    fpr_ok = np.flatnonzero(fpr <= fpr_target)
    if fpr_ok.size == 0:
        raise UnattainableTargetError(
            f"no threshold reaches FPR <= {fpr_target} on reference {reference_id or '<unnamed>'}"
        )
    fnr_ok = np.flatnonzero(fnr <= fnr_target)
    if fnr_ok.size == 0:
        raise UnattainableTargetError(
            f"no threshold reaches FNR <= {fnr_target} on reference {reference_id or '<unnamed>'}"
        )

    t_fpr = float(thresholds[fpr_ok[0]])
    t_fnr = float(thresholds[fnr_ok[-1]])
    logger.info(
        f"Calibrated on {reference_id or 'reference'} ({bona.size} bona fide, {spoof.size} spoof): "
        f"EER {eer:.4%} at {t_eer:.6g}; FPR {fpr[fpr_ok[0]]:.4%} at {t_fpr:.6g}; "
        f"FNR {fnr[fnr_ok[-1]]:.4%} at {t_fnr:.6g}"
    )
    return ThresholdSet(
        t_eer=t_eer,
        t_fpr=t_fpr,
        t_fnr=t_fnr,
        reference_id=reference_id,
        fpr_target=fpr_target,
        fnr_target=fnr_target,
        reference_eer=eer,
    )


def delta(values: Sequence[float]) -> list[float]:
    """Each value minus the minimum of the group."""
    if len(values) == 0:
        raise ValueError("delta needs at least one value")
    floor = min(values)
    return [v - floor for v in values]


def bias_measure(metric: Metric, values: Mapping[str, float]) -> BiasMeasure:
    names = list(values)
    deltas = delta([values[n] for n in names])
    return BiasMeasure(
        metric=metric, values=dict(values), deltas=dict(zip(names, deltas, strict=True))
    )


def detection_report(s: ScoreSet, partition: str = "") -> DetectionReport:
    eer, threshold = compute_eer(s)
    return DetectionReport(
        partition=partition,
        n_bona=s.n_bona,
        n_spoof=s.n_spoof,
        eer=eer,
        threshold=threshold,
    )
