"""Deposition dynamics against hand-checked and brute-force oracles."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from osbd import InitialCondition, StreamKey, generate_marks, simulate_heights
from osbd.deposition import height_snapshots
from tests.conftest import (NEG_INF, brute_height, field_from_marks, g_flat,
                            g_seed)


# Worked example: eight columns, seventeen time units, sixteen marks.
GOLDEN_COLUMNS = {
    1: (),
    2: (10.0,),
    3: (1.0, 5.0, 14.0),
    4: (3.0, 4.0, 9.0),
    5: (7.0, 15.0),
    6: (2.0, 8.0, 11.0),
    7: (12.0, 13.0),
    8: (6.0, 16.0),
}


def golden_field():
    marks = [(t, c) for c, ts in GOLDEN_COLUMNS.items() for t in ts]
    return field_from_marks(marks, 17.0, 8)


def test_golden_profile():
    prof = simulate_heights(golden_field(), InitialCondition.flat(), 17.0, 8)
    assert prof.heights == (0, 1, 3, 4, 5, 6, 8, 9)
    assert prof.height(8) == 9
    assert prof.k == 8


def test_golden_prefix_snapshots():
    """Flat-start left limits after successively longer prefixes."""
    want = {
        3.0: (0, 0, 1, 0, 0, 1, 0, 0),
        9.0: (0, 0, 2, 3, 4, 5, 0, 1),
        12.0: (0, 1, 2, 4, 4, 6, 0, 1),
        17.0: (0, 1, 3, 4, 5, 6, 8, 9),
    }
    fld = golden_field()
    profs = height_snapshots(fld, InitialCondition.flat(),
                             sorted(want), 8)
    for prof in profs:
        assert prof.heights == want[prof.time], prof.time
        # one-pass snapshots agree with independent full runs
        again = simulate_heights(fld, InitialCondition.flat(), prof.time, 8)
        assert again.heights == prof.heights


def test_column_one_counts_its_own_marks():
    fld = generate_marks(StreamKey(21, 1, 0, 1), 40.0, 6)
    prof = simulate_heights(fld, InitialCondition.flat(), 40.0, 6)
    assert prof.height(1) == fld.counts[0]


def test_seed_start_blocks_distant_marks():
    # a single mark far from the seed cannot fire
    fld = field_from_marks([(1.0, 4)], 2.0, 4)
    prof = simulate_heights(fld, InitialCondition.seed(), 2.0, 4)
    assert prof.heights == (0, NEG_INF, NEG_INF, NEG_INF)


def test_seed_spreads_one_column_per_mark():
    fld = field_from_marks([(1.0, 2), (2.0, 3), (3.0, 4)], 4.0, 4)
    prof = simulate_heights(fld, InitialCondition.seed(), 4.0, 4)
    assert prof.heights == (0, 1, 2, 3)


def test_left_limit_excludes_marks_at_t():
    fld = field_from_marks([(1.0, 2), (2.0, 2)], 3.0, 2)
    before = simulate_heights(fld, InitialCondition.flat(), 2.0, 2)
    after = simulate_heights(fld, InitialCondition.flat(), 2.5, 2)
    assert before.heights == (0, 1)
    assert after.heights == (0, 2)


def test_equal_time_marks_fire_left_to_right():
    # both marks at time 1: column 2 raises first, column 3 climbs on top
    fld = field_from_marks([(1.0, 2), (1.0, 3)], 2.0, 3)
    prof = simulate_heights(fld, InitialCondition.flat(), 2.0, 3)
    assert prof.heights == (0, 1, 2)


def test_table_start_offsets():
    ic = InitialCondition.table([0, -2, -1])
    fld = field_from_marks([(1.0, 2), (2.0, 2), (3.0, 3)], 4.0, 3)
    prof = simulate_heights(fld, ic, 4.0, 3)
    # column 2: max(0,-2)+1 then max(0,1)+1; column 3: max(2,-1)+1
    assert prof.heights == (0, 2, 3)


def test_initial_condition_validation():
    with pytest.raises(ValueError):
        InitialCondition.table([1, 0, 0], in_class_i=True)
    with pytest.raises(ValueError):
        InitialCondition.table([0, 1], in_class_i=True)
    with pytest.raises(ValueError):
        InitialCondition.table([])
    with pytest.raises(ValueError):
        InitialCondition.table([0, 0.5])
    with pytest.raises(ValueError):
        InitialCondition("sloped")
    ic = InitialCondition.table([0, NEG_INF, -3], in_class_i=True)
    assert ic.values_up_to(3).tolist()[0] == 0
    assert ic.values_up_to(3)[2] == -3
    with pytest.raises(ValueError):
        ic.values_up_to(4)  # table too short


def test_coverage_checks():
    fld = field_from_marks([(1.0, 2)], 2.0, 2)
    ic = InitialCondition.flat()
    with pytest.raises(ValueError):
        simulate_heights(fld, ic, 2.0, 3)  # more columns than the field
    with pytest.raises(ValueError):
        simulate_heights(fld, ic, 2.5, 2)  # beyond the horizon
    with pytest.raises(ValueError):
        simulate_heights(fld, ic, -1.0, 2)
    with pytest.raises(ValueError):
        height_snapshots(fld, ic, [1.0, 1.0], 2)  # not increasing


@st.composite
def small_instance(draw):
    """Lattice-time marks: cross-column ties happen, duplicate (time,
    column) pairs are collapsed (a field never repeats one)."""
    k = draw(st.integers(1, 4))
    n = draw(st.integers(0, 10))
    marks = {(float(draw(st.integers(1, 5))), draw(st.integers(1, k)))
             for _ in range(n)}
    return k, sorted(marks)


@settings(max_examples=120, deadline=None)
@given(small_instance())
def test_matches_brute_force(inst):
    """Growth at column c equals exhaustive path search on the field
    rotated half a turn about the window (time reversed, columns
    reflected about c); equal-time groups land in the right order on
    both sides."""
    k, marks = inst
    fld = field_from_marks(marks, 6.0, k)
    for g, ic in ((g_flat, InitialCondition.flat()),
                  (g_seed, InitialCondition.seed())):
        prof = simulate_heights(fld, ic, 6.0, k)
        for c in range(1, k + 1):
            rot = [(6.0 - q, c - col + 1) for q, col in marks if col <= c]
            want, _ = brute_height(rot, g, 6.0, c)
            assert prof.height(c) == want, (c, marks)


@settings(max_examples=60, deadline=None)
@given(small_instance())
def test_profile_monotone_in_time(inst):
    k, marks = inst
    fld = field_from_marks(marks, 6.0, k)
    profs = height_snapshots(fld, InitialCondition.flat(),
                             [1.0, 2.0, 3.0, 4.0, 5.0, 6.0], k)
    for a, b in zip(profs, profs[1:]):
        assert all(x <= y for x, y in zip(a.heights, b.heights))
