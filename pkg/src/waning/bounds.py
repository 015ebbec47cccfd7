"""Challenge effects: point identification in period 1, an upper bound in period 2.

The period-2 bound is indexed by ``p12``, the probability of being exposed in
period 2 after being exposed and staying event-free in period 1::

    UB(p12) = 1 - r21 / (r20 + p12 * r10)

where ``r_k^a`` is the arm-``a`` incidence in period ``k``. ``UB(1)`` recovers
the bound that needs no exposure knowledge, ``1 - r21 / (r10 + r20)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, ZeroEvents
from .trial_data import COUNT, RecordArray, TrialSummary
from .waning_test import bootstrap_statistics, incidence_ratio, z_quantile

DELTA = "delta"
BOOTSTRAP = "bootstrap"


@dataclass(frozen=True)
class BoundResult:
    p12: float
    upper_bound: float
    ci_upper_onesided: float
    alpha: float
    method: str = DELTA
    approximate: bool = False  # person-time rates stand in for proportions


def ve1_challenge(summary: TrialSummary) -> float:
    return 1.0 - incidence_ratio(summary, 1)


def _rates(summary: TrialSummary) -> tuple[float, float, float]:
    return summary.cell(0, 1).rate, summary.cell(0, 2).rate, summary.cell(1, 2).rate


def _check_p12(p12: float) -> None:
    if not 0.0 <= p12 <= 1.0:
        raise DomainError(f"p12 must lie in [0, 1], got {p12!r}")


def ve2_upper_bound(summary: TrialSummary, p12: float) -> float:
    """Upper bound on the period-2 challenge effect given ``p12``."""
    _check_p12(p12)
    r10, r20, r21 = _rates(summary)
    denom = r20 + p12 * r10
    if denom <= 0:
        raise ZeroEvents(0, 2, "placebo-arm denominator r20 + p12 * r10 is zero")
    return 1.0 - r21 / denom


def _delta_upper(summary: TrialSummary, p12: float, alpha: float) -> float:
    # log(1 - UB) = log r21 - log(r20 + p12 r10), the three rates treated as independent
    r10, r20, r21 = _rates(summary)
    if summary.events(1, 2) == 0:
        raise ZeroEvents(1, 2, "delta-method limit needs period-2 vaccine-arm events")

    def var(arm, period):
        c = summary.cell(arm, period)
        if summary.mode == COUNT:
            return c.rate * (1.0 - c.rate) / c.denominator
        return c.events / c.denominator**2

    denom = r20 + p12 * r10
    log_var = var(1, 2) / r21**2 + (var(0, 2) + p12**2 * var(0, 1)) / denom**2
    log_ratio = math.log(r21) - math.log(denom)
    return 1.0 - math.exp(log_ratio - z_quantile(1.0 - alpha) * math.sqrt(log_var))


def ve2_bound_curve(
    summary: TrialSummary,
    grid: Sequence[float],
    alpha: float = 0.05,
    B: int = 2000,
    seed: int = 0,
    records: Sequence | None = None,
    workers: int = 1,
) -> list[BoundResult]:
    """Bound and one-sided ``1 - alpha`` upper confidence limit along ``grid``.

    With ``records`` the limit is the ``1 - alpha`` percentile of bootstrap
    bounds (resampling the whole record set); otherwise it comes from a delta
    method on the log of ``r21 / (r20 + p12 r10)``.
    """
    grid = [float(p) for p in grid]
    if not grid:
        raise DomainError("p12 grid is empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise DomainError("p12 grid must be sorted ascending")
    for p in grid:
        _check_p12(p)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    points = [ve2_upper_bound(summary, p) for p in grid]
    approximate = summary.mode != COUNT

    if records is None:
        return [
            BoundResult(p, ub, _delta_upper(summary, p, alpha), alpha, DELTA, approximate)
            for p, ub in zip(grid, points)
        ]

    table = RecordArray.from_records(records).cell_counts()
    p_arr = np.asarray(grid)

    def statistic(tables):
        n0 = tables[:, 0].sum(axis=1)
        n1 = tables[:, 1].sum(axis=1)
        ok = (n0 > 0) & (n1 > 0) & (tables[:, 0, 2] > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            r10 = tables[:, 0, 1] / n0
            r20 = tables[:, 0, 2] / n0
            r21 = tables[:, 1, 2] / n1
        # one row per resample, one column per grid point
        ub = 1.0 - r21[:, None] / (r20[:, None] + p_arr[None, :] * r10[:, None])
        return ub, ok

    boot = bootstrap_statistics(table, statistic, B, seed, workers=workers, tag="bound")
    limits = np.quantile(boot, 1.0 - alpha, axis=0)
    return [
        BoundResult(p, ub, float(lim), alpha, BOOTSTRAP, approximate)
        for p, ub, lim in zip(grid, points, limits)
    ]


def curve_to_csv(curve: Sequence[BoundResult]) -> str:
    lines = ["p12,upper_bound,ci_upper"]
    lines += [f"{r.p12:.6g},{r.upper_bound:.10g},{r.ci_upper_onesided:.10g}" for r in curve]
    return "\n".join(lines) + "\n"
