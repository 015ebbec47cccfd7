"""Covariate-stratified waning tests.

Two routes: a test per stratum with a multiple-testing adjustment, or one
pooled test, which is valid when the incidence ratios are constant across
strata.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, EmptyInput, InvalidCounts, MalformedInput, WrongMode, ZeroEvents
from .trial_data import COUNT, ArmPeriodCounts, TrialSummary, summary_from_dict
from .waning_test import DIRECT_DELTA, TestResult, ir_ratio_test

BENJAMINI_HOCHBERG = "benjamini_hochberg"
HOCHBERG_SIMES = "hochberg_simes"

POOLED_NOTE = (
    "pooled over strata by summing cells; interpretable as a marginal waning test "
    "under constant incidence ratios across strata"
)


@dataclass(frozen=True)
class Degenerate:
    """Marker for a stratum whose test could not be computed."""

    reason: str


@dataclass(frozen=True)
class StratifiedSummary:
    strata: Mapping[str, TrialSummary]

    def __post_init__(self):
        strata = dict(self.strata)
        if not strata:
            raise EmptyInput("at least one stratum is required")
        modes = {s.mode for s in strata.values()}
        if len(modes) > 1:
            raise InvalidCounts(f"all strata must share one mode, got {sorted(modes)}")
        object.__setattr__(self, "strata", strata)

    @property
    def mode(self) -> str:
        return next(iter(self.strata.values())).mode

    def to_dict(self) -> dict:
        return {"strata": {label: s.to_dict() for label, s in self.strata.items()}}


def parse_stratified(text: str) -> StratifiedSummary:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("strata"), dict):
        raise MalformedInput("stratified summary needs a 'strata' object")
    strata = {}
    for label, sub in doc["strata"].items():
        try:
            strata[str(label)] = summary_from_dict(sub)
        except (MalformedInput, InvalidCounts) as exc:
            raise type(exc)(f"stratum {label!r}: {exc}") from exc
    return StratifiedSummary(strata)


def per_stratum_tests(
    s: StratifiedSummary, method: str = DIRECT_DELTA, alpha: float = 0.05
) -> dict[str, TestResult | Degenerate]:
    out: dict[str, TestResult | Degenerate] = {}
    for label, summary in s.strata.items():
        try:
            out[label] = ir_ratio_test(summary, method, alpha)
        except (ZeroEvents, WrongMode) as exc:
            out[label] = Degenerate(str(exc))
    return out


def adjust_pvalues(pvals: Sequence[float], method: str = BENJAMINI_HOCHBERG) -> list[float]:
    """Step-up adjusted p-values, returned in input order.

    ``benjamini_hochberg`` scales the i-th smallest p by ``m / i``;
    ``hochberg_simes`` by ``m - i + 1``. A running minimum from the largest p
    downwards keeps the adjusted values monotone.
    """
    p = np.asarray(pvals, dtype=float)
    if p.ndim != 1:
        raise DomainError("p-values must form a flat sequence")
    if p.size == 0:
        return []
    if np.any(~np.isfinite(p)) or p.min() < 0 or p.max() > 1:
        raise DomainError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    rank = np.arange(1, m + 1)
    if method == BENJAMINI_HOCHBERG:
        scaled = p[order] * m / rank
    elif method == HOCHBERG_SIMES:
        scaled = p[order] * (m - rank + 1)
    else:
        raise DomainError(f"unknown adjustment {method!r}")
    stepped = np.minimum.accumulate(scaled[::-1])[::-1]
    out = np.empty(m)
    out[order] = np.minimum(stepped, 1.0)
    return out.tolist()


def pool(s: StratifiedSummary) -> TrialSummary:
    """Sum events and denominators across strata."""
    strata = list(s.strata.values())
    if s.mode == COUNT:
        return TrialSummary.from_counts(
            n0=sum(x.n0 for x in strata),
            m01=sum(x.events(0, 1) for x in strata),
            m02=sum(x.events(0, 2) for x in strata),
            n1=sum(x.n1 for x in strata),
            m11=sum(x.events(1, 1) for x in strata),
            m12=sum(x.events(1, 2) for x in strata),
        )
    cells = []
    for arm, period in ((0, 1), (0, 2), (1, 1), (1, 2)):
        cells.append(
            ArmPeriodCounts(
                sum(x.events(arm, period) for x in strata),
                person_time=sum(x.cell(arm, period).person_time for x in strata),
            )
        )
    return TrialSummary(s.mode, *cells)


def pooled_test(s: StratifiedSummary, method: str = DIRECT_DELTA, alpha: float = 0.05) -> TestResult:
    result = ir_ratio_test(pool(s), method, alpha)
    return TestResult(**{**result.to_dict(), "note": POOLED_NOTE})


STRATIFIED_COLUMNS = ["stratum", "estimate", "ci_low", "ci_high", "p_value", "p_bh", "p_hochberg", "status"]


def stratified_table(s: StratifiedSummary, method: str = DIRECT_DELTA, alpha: float = 0.05) -> str:
    """CSV: one row per stratum with adjusted p-values, then a pooled row."""
    results = per_stratum_tests(s, method, alpha)
    valid = [label for label, r in results.items() if isinstance(r, TestResult)]
    raw = [results[label].p_value for label in valid]
    bh = dict(zip(valid, adjust_pvalues(raw, BENJAMINI_HOCHBERG)))
    hs = dict(zip(valid, adjust_pvalues(raw, HOCHBERG_SIMES)))

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(STRATIFIED_COLUMNS)
    for label, r in results.items():
        if isinstance(r, Degenerate):
            writer.writerow([label, "", "", "", "", "", "", f"degenerate: {r.reason}"])
        else:
            writer.writerow(
                [label, f"{r.estimate:.10g}", f"{r.ci_low:.10g}", f"{r.ci_high:.10g}",
                 f"{r.p_value:.10g}", f"{bh[label]:.10g}", f"{hs[label]:.10g}", "ok"]
            )
    try:
        r = pooled_test(s, method, alpha)
        writer.writerow(
            ["pooled", f"{r.estimate:.10g}", f"{r.ci_low:.10g}", f"{r.ci_high:.10g}",
             f"{r.p_value:.10g}", "", "", "pooled: assumes constant incidence ratios"]
        )
    except (ZeroEvents, WrongMode) as exc:
        writer.writerow(["pooled", "", "", "", "", "", "", f"degenerate: {exc}"])
    return buf.getvalue()
