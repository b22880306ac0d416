"""Importance scores, odds-ratio profiles by dream type, and trend series."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

log = logging.getLogger(__name__)


class AnalyticsError(Exception):
    pass


@dataclass
class OddsRatioRecord:
    dream_type: str
    entity: int
    or_value: float | None
    undefined_reason: str | None = None


@dataclass
class TrendSeries:
    entity: int
    months: list[str]
    importance: list[float]
    z: list[float]
    z_smoothed: list[float]


def importance(entity: int, sentence_entities: list[set[int]]) -> float:
    """Fraction of a document's sentences carrying the entity.

    sentence_entities holds, per surviving sentence, the set of entity ids
    (the assigned topic, or the topics' themes) it belongs to.
    """
    if not sentence_entities:
        raise AnalyticsError("document has no surviving sentences")
    matching = sum(1 for ids in sentence_entities if entity in ids)
    return matching / len(sentence_entities)


def odds_ratio(
    dream_type: str,
    entity: int,
    doc_importance: dict[str, float],
    type_docs: set[str],
    count_based: bool = False,
) -> OddsRatioRecord:
    """Odds ratio of entity association for a dream type, as displayed:

        [ sum of I over DT docs / #(DT docs without entity) ]
        -----------------------------------------------------
        [ sum of I over rest    / #(rest docs without entity) ]

    With count_based=True the numerator sums use presence (I > 0) instead of
    the importance values, for sensitivity analysis.
    """
    in_dt = {d: i for d, i in doc_importance.items() if d in type_docs}
    out_dt = {d: i for d, i in doc_importance.items() if d not in type_docs}
    if not in_dt or not out_dt:
        raise AnalyticsError(f"dream type {dream_type!r}: empty subset or complement")

    def value(i: float) -> float:
        return (1.0 if i > 0 else 0.0) if count_based else i

    num_sum = sum(value(i) for i in in_dt.values())
    num_absent = sum(1 for i in in_dt.values() if i == 0)
    den_sum = sum(value(i) for i in out_dt.values())
    den_absent = sum(1 for i in out_dt.values() if i == 0)
    for name, term in (
        ("sum of importance in dream type", num_sum),
        ("count of dream-type docs without entity", num_absent),
        ("sum of importance outside dream type", den_sum),
        ("count of other docs without entity", den_absent),
    ):
        if term == 0:
            return OddsRatioRecord(dream_type, entity, None, undefined_reason=name)
    or_value = (num_sum / num_absent) / (den_sum / den_absent)
    return OddsRatioRecord(dream_type, entity, or_value)


# --- Temporal ----------------------------------------------------------------

def month_of(ts: datetime) -> str:
    ts = ts.astimezone(timezone.utc)
    return f"{ts.year:04d}-{ts.month:02d}"


def covered_months(timestamps: list[datetime]) -> list[str]:
    """Calendar months (UTC) fully covered by the corpus date range.

    A month counts as covered when the corpus spans from its first to its
    last day at day granularity, so partial leading/trailing months drop out.
    """
    if not timestamps:
        return []
    lo = min(timestamps).astimezone(timezone.utc).date()
    hi = max(timestamps).astimezone(timezone.utc).date()
    months: list[str] = []
    year, month = lo.year, lo.month
    while (year, month) <= (hi.year, hi.month):
        first = datetime(year, month, 1, tzinfo=timezone.utc).date()
        nxt = datetime(year + month // 12, month % 12 + 1, 1, tzinfo=timezone.utc).date()
        last = nxt - timedelta(days=1)
        if lo <= first and hi >= last:
            months.append(f"{year:04d}-{month:02d}")
        year, month = year + month // 12, month % 12 + 1
    return months


def monthly_importance(
    doc_importance: dict[str, float],
    doc_timestamps: dict[str, datetime],
    min_monthly_docs: int = 300,
) -> tuple[list[tuple[str, float]], dict[str, int]]:
    """Mean importance per fully-covered month with enough documents.

    Returns (series of (month, value), audit of per-month doc counts for
    every excluded month). No qualifying month is fatal.
    """
    eligible = covered_months(list(doc_timestamps.values()))
    per_month: dict[str, list[float]] = {m: [] for m in eligible}
    counts: dict[str, int] = {}
    for doc_id, ts in doc_timestamps.items():
        m = month_of(ts)
        counts[m] = counts.get(m, 0) + 1
        if m in per_month:
            per_month[m].append(doc_importance[doc_id])
    series = []
    excluded: dict[str, int] = {}
    for m in eligible:
        if len(per_month[m]) >= min_monthly_docs:
            series.append((m, sum(per_month[m]) / len(per_month[m])))
        else:
            excluded[m] = len(per_month[m])
    for m, n in counts.items():
        if m not in per_month:
            excluded[m] = n
    if not series:
        raise AnalyticsError(
            "no month passes inclusion; per-month counts: "
            + ", ".join(f"{m}={n}" for m, n in sorted(excluded.items()))
        )
    return series, excluded


def zscore_series(values: list[float]) -> list[float]:
    """Standardize with population sigma; a constant series maps to zeros."""
    if len(values) < 2:
        raise AnalyticsError("z-score needs at least 2 values")
    n = len(values)
    mu = sum(values) / n
    sigma = math.sqrt(sum((v - mu) ** 2 for v in values) / n)
    if sigma == 0:
        return [0.0] * n
    return [(v - mu) / sigma for v in values]


def smooth_centered(values: list[float], window: int = 5) -> list[float]:
    """Centered moving average with shrinking windows at the boundaries."""
    if window < 1 or window % 2 == 0:
        raise AnalyticsError("window must be odd and >= 1")
    half = window // 2
    n = len(values)
    out = []
    for i in range(n):
        lo, hi = max(0, i - half), min(n - 1, i + half)
        out.append(sum(values[lo:hi + 1]) / (hi - lo + 1))
    return out


def trend_series(
    entity: int,
    doc_importance: dict[str, float],
    doc_timestamps: dict[str, datetime],
    min_monthly_docs: int = 300,
    window: int = 5,
) -> TrendSeries:
    """Monthly importance -> z-scores -> centered smoothing, in order."""
    series, _ = monthly_importance(doc_importance, doc_timestamps, min_monthly_docs)
    months = [m for m, _ in series]
    values = [v for _, v in series]
    if len(values) >= 2:
        z = zscore_series(values)
    else:
        z = [0.0] * len(values)
    return TrendSeries(
        entity=entity,
        months=months,
        importance=values,
        z=z,
        z_smoothed=smooth_centered(z, window=window),
    )
