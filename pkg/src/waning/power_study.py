"""Rejection-rate grids over sample size, exposure and waning factor."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from itertools import product
from typing import Sequence

from ._rng import derive_seed, ordered_map
from .errors import DegenerateResampling, DomainError, EmptyInput, MalformedInput, ZeroEvents
from .strata_sim import HELPED_TO_DOOMED, Confounding, SimConfig, StratumDist, simulate_trial, transition_rates
from .trial_data import aggregate
from .waning_test import (
    BOOTSTRAP,
    CONSERVATIVE_DELTA,
    DIRECT_DELTA,
    HR_BOOTSTRAP,
    bootstrap_ir_test,
    hr_ratio_test,
    ir_ratio_test,
)

IR_METHODS = (DIRECT_DELTA, CONSERVATIVE_DELTA, BOOTSTRAP)


@dataclass(frozen=True)
class PowerGrid:
    """Simulation grid. Each exposure value sets ``p_e1 = p_e2``.

    With ``p_e_low`` set, exposure is confounded by a binary trait: each
    exposure value becomes ``p_e_high`` for the exposure-seeking half.
    """

    n_values: Sequence[int]
    exposure_values: Sequence[float]
    w_values: Sequence[float]
    methods: Sequence[str] = (DIRECT_DELTA,)
    scenario: str = HELPED_TO_DOOMED
    replications: int = 100
    alpha: float = 0.05
    base_seed: int = 0
    B: int = 1000
    p_treat: float = 0.5
    p_e_low: float | None = None

    def __post_init__(self):
        for name in ("n_values", "exposure_values", "w_values", "methods"):
            value = tuple(getattr(self, name))
            if not value:
                raise DomainError(f"{name} must be nonempty")
            object.__setattr__(self, name, value)
        if any(w < 1 for w in self.w_values):
            raise DomainError("waning factors must be >= 1")
        bad = set(self.methods) - set(IR_METHODS) - {HR_BOOTSTRAP}
        if bad:
            raise DomainError(f"unknown methods {sorted(bad)}")
        if self.replications < 1:
            raise DomainError("replications must be >= 1")
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")

    @classmethod
    def from_dict(cls, doc: dict) -> "PowerGrid":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known - {"dist"}
        if unknown:
            raise MalformedInput(f"unknown grid fields: {sorted(unknown)}")
        try:
            return cls(**{k: v for k, v in doc.items() if k != "dist"})
        except TypeError as exc:
            raise MalformedInput(str(exc)) from exc


@dataclass(frozen=True)
class PowerCell:
    n: int
    exposure: float
    w: float
    method: str
    rejection_rate: float
    replications_used: int
    degenerate_runs: int
    rejections: int = field(default=0, repr=False)


def sim_config(grid: PowerGrid, dist: StratumDist, n: int, exposure: float, w: float, replicate: int) -> SimConfig:
    """Trial configuration of one replicate; its seed depends only on the cell coordinates."""
    seed = derive_seed(grid.base_seed, "rep", n, exposure, w, replicate)
    confounding = None if grid.p_e_low is None else Confounding(p_e_high=exposure, p_e_low=grid.p_e_low)
    return SimConfig(
        n=int(n),
        dist=dist,
        p_e1=exposure,
        p_e2=exposure,
        w=w,
        scenario=grid.scenario,
        p_treat=grid.p_treat,
        confounding=confounding,
        seed=seed,
    )


def _analyze(records, method: str, grid: PowerGrid, seed: int) -> bool | None:
    """Rejection flag, or None for a degenerate run."""
    try:
        if method in (DIRECT_DELTA, CONSERVATIVE_DELTA):
            return ir_ratio_test(aggregate(records), method, grid.alpha).p_value <= grid.alpha
        test = bootstrap_ir_test if method == BOOTSTRAP else hr_ratio_test
        return test(records, B=grid.B, alpha=grid.alpha, seed=derive_seed(seed, "boot")).rejects()
    except (ZeroEvents, DegenerateResampling):
        return None


def _cells_for(grid, dist, n, exposure, w, methods, workers) -> list[PowerCell]:
    def replicate(r: int):
        config = sim_config(grid, dist, n, exposure, w, r)
        records = simulate_trial(config)
        return [_analyze(records, m, grid, config.seed) for m in methods]

    outcomes = ordered_map(replicate, list(range(grid.replications)), workers)
    cells = []
    for j, method in enumerate(methods):
        flags = [o[j] for o in outcomes]
        used = [f for f in flags if f is not None]
        rejections = sum(used)
        cells.append(
            PowerCell(
                n=int(n),
                exposure=float(exposure),
                w=float(w),
                method=method,
                rejection_rate=rejections / len(used) if used else float("nan"),
                replications_used=len(used),
                degenerate_runs=len(flags) - len(used),
                rejections=rejections,
            )
        )
    return cells


def run_cell(grid: PowerGrid, dist, n: int, exposure: float, w: float, method: str, workers: int = 1) -> PowerCell:
    return _cells_for(grid, StratumDist.of(dist), n, exposure, w, (method,), workers)[0]


def run_power_grid(grid: PowerGrid, dist, workers: int = 1) -> list[PowerCell]:
    """Rejection rate of each IR-based method in every (n, exposure, w) cell.

    All methods in a cell analyze the same simulated trials. Runs with an
    empty event cell are excluded from the denominator and counted in
    ``degenerate_runs``.
    """
    methods = [m for m in grid.methods if m in IR_METHODS]
    if not methods:
        raise DomainError("grid lists no incidence-ratio methods")
    return _run(grid, StratumDist.of(dist), methods, workers)


def run_hr_power_grid(grid: PowerGrid, dist, workers: int = 1) -> list[PowerCell]:
    """As :func:`run_power_grid`, analyzing each trial with the hazard-ratio bootstrap."""
    return _run(grid, StratumDist.of(dist), [HR_BOOTSTRAP], workers)


def _run(grid, dist, methods, workers):
    for w in grid.w_values:
        transition_rates(dist, w, grid.scenario)
    cells = []
    for n, exposure, w in product(grid.n_values, grid.exposure_values, grid.w_values):
        cells.extend(_cells_for(grid, dist, n, exposure, w, methods, workers))
    return cells


def load_grid(text: str) -> tuple[PowerGrid, StratumDist]:
    """Grid JSON: PowerGrid field names plus ``dist`` (4 probabilities or named fields)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "dist" not in doc:
        raise MalformedInput("grid config needs a 'dist' field")
    return PowerGrid.from_dict(doc), StratumDist.of(doc["dist"])


TABLE_COLUMNS = ["n", "exposure", "w", "method", "rejection_rate", "reps", "degenerate"]


def emit_table(cells: Sequence[PowerCell]) -> str:
    if not cells:
        raise EmptyInput("no power cells to tabulate")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for c in cells:
        writer.writerow(
            [c.n, f"{c.exposure:g}", f"{c.w:g}", c.method, f"{c.rejection_rate:.6g}", c.replications_used, c.degenerate_runs]
        )
    return buf.getvalue()


def emit_plot(cells: Sequence[PowerCell], alpha: float = 0.05) -> str:
    """SVG: one panel per (method, exposure), rejection rate against n, one line per w."""
    from .plotting import panel_chart_svg

    if not cells:
        raise EmptyInput("no power cells to plot")
    panels: dict[tuple[str, float], dict[float, dict[int, float]]] = {}
    for c in cells:
        series = panels.setdefault((c.method, c.exposure), {})
        series.setdefault(c.w, {})[c.n] = c.rejection_rate
    return panel_chart_svg(
        [
            (f"{method} | exposure {exposure:g}", [(f"w={w:g}", pts) for w, pts in sorted(series.items())])
            for (method, exposure), series in panels.items()
        ],
        x_label="n",
        y_label="rejection rate",
        reference=alpha,
    )


def cells_to_dicts(cells: Sequence[PowerCell]) -> list[dict]:
    return [asdict(c) for c in cells]
