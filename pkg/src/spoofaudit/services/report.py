"""Bias tables and fluency summaries.

Rendered numbers are percentages with two decimals, rounded half-even.
"""

import io
import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Literal

import pandas as pd

from spoofaudit.errors import InconsistentSetsError
from spoofaudit.models.metrics import METRIC_ORDER, Metric
from spoofaudit.schemas.study import ConditionResult, FluencyRow, MetricQuadruple, StudyResult

logger = logging.getLogger(__name__)

TableFormat = Literal["markdown", "csv"]
TableMode = Literal["delta", "absolute"]

ABSENT = "n/a"
CONDITIONS = ("fluent", "stuttering")


def percent(value: float) -> str:
    """Fraction -> percentage string with two decimals (half-even)."""
    if value is None or not math.isfinite(value):
        return ABSENT
    return str(Decimal(repr(value * 100)).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))


def _check_sets(results: Sequence[StudyResult]) -> list[str]:
    if not results:
        raise InconsistentSetsError("no study results to render")
    names = results[0].set_names
    for r in results[1:]:
        if r.set_names != names:
            raise InconsistentSetsError(
                f"detector {r.detector_id!r} covers sets {r.set_names}, "
                f"detector {results[0].detector_id!r} covers {names}"
            )
    ids = [r.detector_id for r in results]
    if len(set(ids)) != len(ids):
        raise InconsistentSetsError(f"duplicate detector ids: {ids}")
    return names


def _cells(results: Sequence[StudyResult], mode: TableMode):
    """(detector, metric, set, value, sd, most_biased) in render order."""
    for result in sorted(results, key=lambda r: r.detector_id):
        for metric in METRIC_ORDER:
            deltas = [s.delta.get(metric, 0.0) for s in result.sets]
            top = max(deltas)
            for s, d in zip(result.sets, deltas, strict=True):
                value = d if mode == "delta" else s.mean.get(metric)
                yield result.detector_id, metric, s.name, value, s.sd.get(metric), d == top


def _metric_label(metric: Metric, mode: TableMode) -> str:
    return f"Δ{metric.value}" if mode == "delta" else metric.value


def render_bias_table(
    results: Sequence[StudyResult],
    fmt: TableFormat = "markdown",
    mode: TableMode = "delta",
) -> str:
    """Render one row per (detector, metric) and one column per evaluation set.

    The most-biased set(s) of each row (largest Δ, ties included) are bold in markdown and
    flagged in CSV.
    """
    names = _check_sets(results)
    cells = list(_cells(results, mode))
    logger.debug(f"Rendering {len(results)} detector(s) x {len(names)} set(s), {mode} mode")

    if fmt == "csv":
        frame = pd.DataFrame(
            [
                {
                    "detector": det,
                    "metric": _metric_label(metric, mode),
                    "set": name,
                    "value": percent(value),
                    "sd": percent(sd),
                    "most_biased": "true" if marked else "false",
                }
                for det, metric, name, value, sd, marked in cells
            ],
            columns=["detector", "metric", "set", "value", "sd", "most_biased"],
        )
        buf = io.StringIO()
        frame.to_csv(buf, index=False, lineterminator="\n")
        return buf.getvalue()

    lines = [
        "| Detector | Metric | " + " | ".join(names) + " |",
        "|---|---|" + "---|" * len(names),
    ]
    row: list[str] = []
    for i, (det, metric, _, value, sd, marked) in enumerate(cells):
        text = f"{percent(value)} ± {percent(sd)}"
        row.append(f"**{text}**" if marked else text)
        if (i + 1) % len(names) == 0:
            label = _metric_label(metric, mode)
            lines.append(f"| {det or '-'} | {label} | " + " | ".join(row) + " |")
            row = []
    lines.append("")
    lines.append("Values are in %.")
    return "\n".join(lines) + "\n"


def fluency_inputs(results: Iterable[ConditionResult]) -> dict[str, dict[str, MetricQuadruple]]:
    """Group condition results as ``{detector: {condition: metrics}}``."""
    out: dict[str, dict[str, MetricQuadruple]] = {}
    for r in results:
        conditions = out.setdefault(r.detector_id, {})
        if r.condition in conditions:
            raise InconsistentSetsError(
                f"detector {r.detector_id!r} has two {r.condition} results"
            )
        conditions[r.condition] = r.metrics
    return out


def summarize_fluency(
    per_detector: Mapping[str, Mapping[str, MetricQuadruple]],
) -> list[FluencyRow]:
    """Mean of each metric over detectors, per condition."""
    if not per_detector:
        raise InconsistentSetsError("no detector results to summarize")
    for detector, conditions in per_detector.items():
        lacking = [c for c in CONDITIONS if c not in conditions]
        if lacking:
            raise InconsistentSetsError(
                f"detector {detector!r} has no {' / '.join(lacking)} result"
            )

    rows = []
    n = len(per_detector)
    for condition in CONDITIONS:
        for metric in METRIC_ORDER:
            values = [per_detector[d][condition].as_dict()[metric] for d in sorted(per_detector)]
            rows.append(
                FluencyRow(condition=condition, metric=metric, value=sum(values) / n, n_detectors=n)
            )
    return rows


def fluency_csv(rows: Iterable[FluencyRow]) -> str:
    """Plot-ready ``condition,metric,value`` CSV, values in percent."""
    frame = pd.DataFrame(
        [
            {"condition": r.condition, "metric": r.metric.value, "value": percent(r.value)}
            for r in rows
        ],
        columns=["condition", "metric", "value"],
    )
    buf = io.StringIO()
    frame.to_csv(buf, index=False, lineterminator="\n")
    return buf.getvalue()


def render_condition_table(
    per_detector: Mapping[str, Mapping[str, MetricQuadruple]], condition: str = "stuttering"
) -> str:
    """Per-detector absolute metrics under one condition, with a mean row."""
    present = {d: c[condition] for d, c in sorted(per_detector.items()) if condition in c}
    if not present:
        raise InconsistentSetsError(f"no {condition} results to render")

    header = "| Detector | " + " | ".join(m.value for m in METRIC_ORDER) + " |"
    lines = [header, "|---|" + "---|" * len(METRIC_ORDER)]
    for detector, quad in present.items():
        values = quad.as_dict()
        lines.append(
            f"| {detector} | " + " | ".join(percent(values[m]) for m in METRIC_ORDER) + " |"
        )
    means = [sum(q.as_dict()[m] for q in present.values()) / len(present) for m in METRIC_ORDER]
    lines.append("| Mean | " + " | ".join(percent(v) for v in means) + " |")
    return "\n".join(lines) + "\n"


def render_fluency_summary(rows: Iterable[FluencyRow]) -> str:
    """Markdown table of mean metrics, one row per condition."""
    by_condition: dict[str, dict[Metric, float]] = {}
    counts: dict[str, int] = {}
    for r in rows:
        by_condition.setdefault(r.condition, {})[r.metric] = r.value
        counts[r.condition] = r.n_detectors

    lines = [
        "| Condition | " + " | ".join(m.value for m in METRIC_ORDER) + " | Detectors |",
        "|---|" + "---|" * (len(METRIC_ORDER) + 1),
    ]
    for condition, values in by_condition.items():
        cells = [percent(values.get(m, math.nan)) for m in METRIC_ORDER]
        lines.append(f"| {condition} | " + " | ".join(cells) + f" | {counts[condition]} |")
    lines.append("")
    lines.append("Mean over detectors. Values are in %.")
    return "\n".join(lines) + "\n"
