"""Two-period, two-arm trial data: summaries, individual records, and their file formats."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import EmptyInput, InvalidCounts, MalformedInput

COUNT = "count"
PERSON_TIME = "person_time"
MODES = (COUNT, PERSON_TIME)


@dataclass(frozen=True)
class ArmPeriodCounts:
    """Events in one arm and period, with the matching denominator.

    Exactly one of ``n_at_risk`` (count mode) and ``person_time`` (person-time
    mode) is set.
    """

    events: int
    n_at_risk: int | None = None
    person_time: float | None = None

    @property
    def mode(self) -> str:
        return COUNT if self.n_at_risk is not None else PERSON_TIME

    @property
    def denominator(self) -> float:
        return self.n_at_risk if self.n_at_risk is not None else self.person_time

    @property
    def rate(self) -> float:
        return self.events / self.denominator


@dataclass(frozen=True)
class TrialSummary:
    """Sufficient statistic for the summary-data tests.

    In count mode the period denominators are the randomized arm sizes
    ``n0``/``n1`` (incidence is computed over the whole arm, not the at-risk
    set). In person-time mode each cell carries its own person-time.
    """

    mode: str
    arm0_p1: ArmPeriodCounts
    arm0_p2: ArmPeriodCounts
    arm1_p1: ArmPeriodCounts
    arm1_p2: ArmPeriodCounts
    n0: int | None = None
    n1: int | None = None

    def __post_init__(self):
        validate(self)

    @classmethod
    def from_counts(cls, n0: int, m01: int, m02: int, n1: int, m11: int, m12: int) -> "TrialSummary":
        """Count-mode summary from arm sizes and per-period event counts."""
        return cls(
            COUNT,
            ArmPeriodCounts(int(m01), n_at_risk=int(n0)),
            ArmPeriodCounts(int(m02), n_at_risk=int(n0)),
            ArmPeriodCounts(int(m11), n_at_risk=int(n1)),
            ArmPeriodCounts(int(m12), n_at_risk=int(n1)),
            n0=int(n0),
            n1=int(n1),
        )

    @classmethod
    def from_person_time(
        cls, e01: int, pt01: float, e02: int, pt02: float, e11: int, pt11: float, e12: int, pt12: float
    ) -> "TrialSummary":
        return cls(
            PERSON_TIME,
            ArmPeriodCounts(int(e01), person_time=float(pt01)),
            ArmPeriodCounts(int(e02), person_time=float(pt02)),
            ArmPeriodCounts(int(e11), person_time=float(pt11)),
            ArmPeriodCounts(int(e12), person_time=float(pt12)),
        )

    def cell(self, arm: int, period: int) -> ArmPeriodCounts:
        return {
            (0, 1): self.arm0_p1,
            (0, 2): self.arm0_p2,
            (1, 1): self.arm1_p1,
            (1, 2): self.arm1_p2,
        }[(arm, period)]

    def events(self, arm: int, period: int) -> int:
        return self.cell(arm, period).events

    def arm_size(self, arm: int) -> int | None:
        return self.n1 if arm == 1 else self.n0

    def swap_arms(self) -> "TrialSummary":
        return TrialSummary(self.mode, self.arm1_p1, self.arm1_p2, self.arm0_p1, self.arm0_p2, self.n1, self.n0)

    def with_continuity_correction(self, add: float = 0.5) -> "TrialSummary":
        """Haldane-Anscombe correction: ``add`` to every cell of the table.

        Count mode has three cells per arm (no event, period 1, period 2), so
        the arm size grows by ``3 * add``. Event counts become non-integer.
        """
        if self.mode == PERSON_TIME:
            cells = [ArmPeriodCounts(c.events + add, person_time=c.person_time) for c in self._cells()]
            return _unchecked(PERSON_TIME, cells, None, None)
        n0, n1 = self.n0 + 3 * add, self.n1 + 3 * add
        cells = [
            ArmPeriodCounts(self.arm0_p1.events + add, n_at_risk=n0),
            ArmPeriodCounts(self.arm0_p2.events + add, n_at_risk=n0),
            ArmPeriodCounts(self.arm1_p1.events + add, n_at_risk=n1),
            ArmPeriodCounts(self.arm1_p2.events + add, n_at_risk=n1),
        ]
        return _unchecked(COUNT, cells, n0, n1)

    def _cells(self):
        return [self.arm0_p1, self.arm0_p2, self.arm1_p1, self.arm1_p2]

    def to_dict(self) -> dict:
        def period(c: ArmPeriodCounts) -> dict:
            out = {"events": c.events}
            if self.mode == PERSON_TIME:
                out["pt"] = c.person_time
            return out

        doc = {"mode": self.mode}
        for arm, p1, p2, n in ((0, self.arm0_p1, self.arm0_p2, self.n0), (1, self.arm1_p1, self.arm1_p2, self.n1)):
            arm_doc = {}
            if self.mode == COUNT:
                arm_doc["n"] = n
            arm_doc["p1"] = period(p1)
            arm_doc["p2"] = period(p2)
            doc[f"arm{arm}"] = arm_doc
        return doc


def _unchecked(mode, cells, n0, n1) -> TrialSummary:
    # continuity-corrected tables carry fractional counts, which validate() rejects
    obj = object.__new__(TrialSummary)
    for name, value in zip(
        ("mode", "arm0_p1", "arm0_p2", "arm1_p1", "arm1_p2", "n0", "n1"), (mode, *cells, n0, n1)
    ):
        object.__setattr__(obj, name, value)
    return obj


_CELL_NAMES = {(0, 1): "arm0.p1", (0, 2): "arm0.p2", (1, 1): "arm1.p1", (1, 2): "arm1.p2"}


def validate(summary: TrialSummary) -> None:
    """Raise :class:`InvalidCounts` naming the first offending cell."""
    if summary.mode not in MODES:
        raise InvalidCounts(f"unknown mode {summary.mode!r}")
    for (arm, period), name in _CELL_NAMES.items():
        c = summary.cell(arm, period)
        if isinstance(c.events, bool) or not isinstance(c.events, (int, np.integer)):
            raise InvalidCounts(f"{name}: events must be an integer, got {c.events!r}")
        if c.events < 0:
            raise InvalidCounts(f"{name}: negative event count {c.events}")
        if c.mode != summary.mode:
            raise InvalidCounts(f"{name}: cell mode {c.mode} differs from summary mode {summary.mode}")
        if summary.mode == PERSON_TIME:
            if not (c.person_time is not None and math.isfinite(c.person_time) and c.person_time > 0):
                raise InvalidCounts(f"{name}: person-time must be positive, got {c.person_time!r}")
        else:
            if c.events > c.n_at_risk:
                raise InvalidCounts(f"{name}: {c.events} events exceed n={c.n_at_risk}")
    if summary.mode == COUNT:
        for arm in (0, 1):
            n = summary.arm_size(arm)
            if n is None or n < 0:
                raise InvalidCounts(f"arm{arm}: count mode needs a nonnegative n")
            if summary.cell(arm, 1).n_at_risk != n or summary.cell(arm, 2).n_at_risk != n:
                raise InvalidCounts(f"arm{arm}: period denominators must equal n={n}")
            total = summary.events(arm, 1) + summary.events(arm, 2)
            if total > n:
                raise InvalidCounts(
                    f"arm{arm}: period-1 plus period-2 events ({total}) exceed n={n}; "
                    "each participant has at most one event"
                )
    elif summary.n0 is not None or summary.n1 is not None:
        raise InvalidCounts("person_time mode takes no arm size n")


# --------------------------------------------------------------------------
# summary JSON


def _require(doc: dict, key: str, where: str):
    if not isinstance(doc, dict):
        raise MalformedInput(f"{where}: expected an object")
    if key not in doc:
        raise MalformedInput(f"{where}: missing field {key!r}")
    return doc[key]


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise MalformedInput(f"{where}: expected an integer, got {value!r}")
    return value


def _as_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MalformedInput(f"{where}: expected a number, got {value!r}")
    return float(value)


def summary_from_dict(doc: dict) -> TrialSummary:
    mode = _require(doc, "mode", "summary")
    if mode not in MODES:
        raise MalformedInput(f"summary.mode: expected 'count' or 'person_time', got {mode!r}")
    cells = {}
    sizes = {}
    for arm in (0, 1):
        arm_doc = _require(doc, f"arm{arm}", "summary")
        if mode == COUNT:
            sizes[arm] = _as_int(_require(arm_doc, "n", f"arm{arm}"), f"arm{arm}.n")
        elif isinstance(arm_doc, dict) and "n" in arm_doc:
            raise MalformedInput(f"arm{arm}.n: not allowed in person_time mode")
        for period in (1, 2):
            where = f"arm{arm}.p{period}"
            p_doc = _require(arm_doc, f"p{period}", f"arm{arm}")
            events = _as_int(_require(p_doc, "events", where), f"{where}.events")
            if mode == COUNT:
                cells[arm, period] = ArmPeriodCounts(events, n_at_risk=sizes[arm])
            else:
                pt = _as_number(_require(p_doc, "pt", where), f"{where}.pt")
                cells[arm, period] = ArmPeriodCounts(events, person_time=pt)
    return TrialSummary(
        mode,
        cells[0, 1],
        cells[0, 2],
        cells[1, 1],
        cells[1, 2],
        n0=sizes.get(0),
        n1=sizes.get(1),
    )


def parse_summary(text: str) -> TrialSummary:
    """Parse and validate a summary JSON document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"not valid JSON: {exc}") from exc
    return summary_from_dict(doc)


def serialize_summary(summary: TrialSummary) -> str:
    return json.dumps(summary.to_dict())


# --------------------------------------------------------------------------
# individual records


class IndividualRecord(NamedTuple):
    arm: int
    outcome: int  # 0 none, 1 event in period 1, 2 event in period 2


class RecordArray:
    """Column-oriented record set; behaves like a sequence of :class:`IndividualRecord`."""

    def __init__(self, arm, outcome):
        arm = np.asarray(arm, dtype=np.int8)
        outcome = np.asarray(outcome, dtype=np.int8)
        if arm.shape != outcome.shape or arm.ndim != 1:
            raise InvalidCounts("arm and outcome columns must be 1-d and of equal length")
        if arm.size and (arm.min() < 0 or arm.max() > 1):
            raise InvalidCounts("arm must be 0 or 1")
        if outcome.size and (outcome.min() < 0 or outcome.max() > 2):
            raise InvalidCounts("outcome must be 0, 1 or 2")
        self.arm = arm
        self.outcome = outcome

    @classmethod
    def from_records(cls, records: Iterable) -> "RecordArray":
        if isinstance(records, RecordArray):
            return records
        pairs = [(int(r[0]), int(r[1])) for r in records]
        if not pairs:
            return cls(np.empty(0, np.int8), np.empty(0, np.int8))
        arm, outcome = zip(*pairs)
        return cls(arm, outcome)

    def __len__(self) -> int:
        return int(self.arm.size)

    def __iter__(self) -> Iterator[IndividualRecord]:
        for a, y in zip(self.arm.tolist(), self.outcome.tolist()):
            yield IndividualRecord(a, y)

    def __getitem__(self, i) -> IndividualRecord:
        return IndividualRecord(int(self.arm[i]), int(self.outcome[i]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, RecordArray):
            return NotImplemented
        return np.array_equal(self.arm, other.arm) and np.array_equal(self.outcome, other.outcome)

    def cell_counts(self) -> np.ndarray:
        """2x3 table: rows are arms, columns are outcomes 0/1/2."""
        return np.bincount(self.arm.astype(np.int64) * 3 + self.outcome, minlength=6).reshape(2, 3)


def aggregate(records: Sequence) -> TrialSummary:
    """Tally individual records into a count-mode summary."""
    records = RecordArray.from_records(records)
    if len(records) == 0:
        raise EmptyInput("no records to aggregate")
    return summary_from_table(records.cell_counts())


def summary_from_table(table) -> TrialSummary:
    """Count-mode summary from a 2x3 (arm x outcome) table."""
    t = np.asarray(table, dtype=np.int64)
    return TrialSummary.from_counts(
        n0=int(t[0].sum()), m01=int(t[0, 1]), m02=int(t[0, 2]),
        n1=int(t[1].sum()), m11=int(t[1, 1]), m12=int(t[1, 2]),
    )


def read_records_csv(text: str) -> RecordArray:
    """Parse the ``arm,outcome`` CSV format; extra columns are ignored."""
    reader = csv.DictReader(io.StringIO(text.lstrip("﻿"), newline=""))
    if reader.fieldnames is None:
        raise MalformedInput("records CSV is empty")
    fields = [f.strip() for f in reader.fieldnames]
    if "arm" not in fields or "outcome" not in fields:
        raise MalformedInput(f"records CSV needs columns 'arm' and 'outcome', got {fields}")
    reader.fieldnames = fields
    arms, outcomes = [], []
    for line, row in enumerate(reader, start=2):
        try:
            a, y = int(row["arm"]), int(row["outcome"])
        except (TypeError, ValueError):
            raise MalformedInput(f"line {line}: arm and outcome must be integers") from None
        if a not in (0, 1):
            raise MalformedInput(f"line {line}: arm must be 0 or 1, got {a}")
        if y not in (0, 1, 2):
            raise MalformedInput(f"line {line}: outcome must be 0, 1 or 2, got {y}")
        arms.append(a)
        outcomes.append(y)
    return RecordArray(np.array(arms, dtype=np.int8), np.array(outcomes, dtype=np.int8))


def write_records_csv(records: Sequence) -> str:
    records = RecordArray.from_records(records)
    body = np.char.add(np.char.add(records.arm.astype("U1"), ","), records.outcome.astype("U1"))
    return "arm,outcome\n" + "".join(line + "\n" for line in body.tolist())
