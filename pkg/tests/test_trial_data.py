import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from waning.errors import EmptyInput, InvalidCounts, MalformedInput
from waning.strata_sim import SimConfig, simulate_trial
from waning.trial_data import (
    ArmPeriodCounts,
    IndividualRecord,
    RecordArray,
    TrialSummary,
    aggregate,
    parse_summary,
    read_records_csv,
    serialize_summary,
    write_records_csv,
)

HPYLORI_JSON = (
    '{"mode":"person_time","arm0":{"p1":{"events":36,"pt":1416.0},"p2":{"events":14,"pt":673.6}},'
    '"arm1":{"p1":{"events":10,"pt":1403.6},"p2":{"events":4,"pt":670.7}}}'
)


def test_parse_hpylori(hpylori):
    assert parse_summary(HPYLORI_JSON) == hpylori


def test_parse_rejects_too_many_events():
    doc = {
        "mode": "count",
        "arm0": {"n": 10, "p1": {"events": 6}, "p2": {"events": 5}},
        "arm1": {"n": 10, "p1": {"events": 1}, "p2": {"events": 1}},
    }
    with pytest.raises(InvalidCounts, match="arm0"):
        parse_summary(json.dumps(doc))


def test_parse_all_zero_events():
    doc = (
        '{"mode":"count","arm0":{"n":10,"p1":{"events":0},"p2":{"events":0}},'
        '"arm1":{"n":10,"p1":{"events":0},"p2":{"events":0}}}'
    )
    s = parse_summary(doc)
    assert s.events(0, 1) == s.events(1, 2) == 0


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        "[]",
        '{"mode":"count"}',
        '{"mode":"weekly","arm0":{},"arm1":{}}',
        # n missing in count mode
        '{"mode":"count","arm0":{"p1":{"events":1},"p2":{"events":1}},"arm1":{"n":3,"p1":{"events":1},"p2":{"events":1}}}',
        # pt missing in person-time mode
        '{"mode":"person_time","arm0":{"p1":{"events":1},"p2":{"events":1,"pt":2}},'
        '"arm1":{"p1":{"events":1,"pt":2},"p2":{"events":1,"pt":2}}}',
        # fractional events
        '{"mode":"count","arm0":{"n":5,"p1":{"events":1.5},"p2":{"events":1}},"arm1":{"n":5,"p1":{"events":1},"p2":{"events":1}}}',
    ],
)
def test_parse_malformed(text):
    with pytest.raises(MalformedInput):
        parse_summary(text)


def test_negative_events_name_the_cell():
    with pytest.raises(InvalidCounts, match="arm1.p2"):
        TrialSummary.from_counts(10, 1, 1, 10, 1, -1)


def test_nonpositive_person_time():
    with pytest.raises(InvalidCounts, match="arm0.p2"):
        TrialSummary.from_person_time(1, 10.0, 1, 0.0, 1, 10.0, 1, 10.0)


def test_cell_rates(hpylori):
    assert hpylori.cell(1, 1).rate == pytest.approx(10 / 1403.6)
    assert ArmPeriodCounts(3, n_at_risk=12).rate == 0.25


counts = st.tuples(
    st.integers(1, 10_000), st.integers(0, 5000), st.integers(0, 5000),
    st.integers(1, 10_000), st.integers(0, 5000), st.integers(0, 5000),
).filter(lambda t: t[1] + t[2] <= t[0] and t[4] + t[5] <= t[3])


@given(counts)
def test_serialize_roundtrip_count(t):
    s = TrialSummary.from_counts(*t)
    assert parse_summary(serialize_summary(s)) == s


@given(
    st.lists(st.integers(0, 500), min_size=4, max_size=4),
    st.lists(st.floats(0.01, 1e6, allow_nan=False), min_size=4, max_size=4),
)
def test_serialize_roundtrip_person_time(events, pt):
    s = TrialSummary.from_person_time(events[0], pt[0], events[1], pt[1], events[2], pt[2], events[3], pt[3])
    assert parse_summary(serialize_summary(s)) == s


def test_aggregate_small():
    s = aggregate([(1, 1), (0, 0), (1, 0), (0, 2)])
    assert (s.n1, s.events(1, 1), s.events(1, 2)) == (2, 1, 0)
    assert (s.n0, s.events(0, 1), s.events(0, 2)) == (2, 0, 1)


def test_aggregate_empty():
    with pytest.raises(EmptyInput):
        aggregate([])


def test_aggregate_matches_independent_tally():
    config = SimConfig(n=1000, dist=(0.2, 0.6, 0.2, 0.0), seed=3)
    records = simulate_trial(config)
    tally = {}
    for arm, outcome in zip(records.arm.tolist(), records.outcome.tolist()):
        tally[(arm, outcome)] = tally.get((arm, outcome), 0) + 1
    s = aggregate(records)
    for arm in (0, 1):
        assert s.arm_size(arm) == sum(v for (a, _), v in tally.items() if a == arm)
        for period in (1, 2):
            assert s.events(arm, period) == tally.get((arm, period), 0)


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 2)), min_size=1, max_size=200), st.randoms())
def test_aggregate_permutation_invariant(rows, rnd):
    shuffled = list(rows)
    rnd.shuffle(shuffled)
    assert aggregate(rows) == aggregate(shuffled)


def test_record_array_roundtrip_csv():
    rows = [IndividualRecord(0, 1), IndividualRecord(1, 0), IndividualRecord(1, 2)]
    records = RecordArray.from_records(rows)
    text = write_records_csv(records)
    assert text.splitlines()[0] == "arm,outcome"
    assert read_records_csv(text) == records
    assert list(read_records_csv(text)) == rows


def test_read_csv_tolerates_crlf_bom_and_extra_columns():
    text = "﻿id,arm,site,outcome\r\n1,0,a,2\r\n2,1,b,0\r\n"
    records = read_records_csv(text)
    assert list(records) == [(0, 2), (1, 0)]


@pytest.mark.parametrize(
    "text",
    ["arm\n0\n", "arm,outcome\n2,0\n", "arm,outcome\n0,3\n", "arm,outcome\nx,1\n", ""],
)
def test_read_csv_rejects_bad_rows(text):
    with pytest.raises((MalformedInput, EmptyInput)):
        read_records_csv(text)


def test_swap_arms_involution(hpylori):
    assert hpylori.swap_arms().swap_arms() == hpylori
    assert hpylori.swap_arms().events(0, 1) == 10


def test_continuity_correction_counts():
    s = TrialSummary.from_counts(100, 0, 3, 100, 2, 0).with_continuity_correction()
    assert s.events(0, 1) == 0.5 and s.events(1, 2) == 0.5
    assert s.n0 == 101.5


def test_record_array_rejects_bad_codes():
    with pytest.raises(InvalidCounts):
        RecordArray(np.array([0, 2]), np.array([0, 1]))
