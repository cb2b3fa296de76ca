import pytest
from hypothesis import given, strategies as st

from renewalopt.baselines import (DppState, RmState, dpp_ratio_step, greedy_step,
                                  robbins_monro_step)
from renewalopt.core import TaskMatrix
from renewalopt.scenarios import sample_system2, system2_power_filter


def test_greedy_examples():
    assert greedy_step(TaskMatrix.from_rows([[1, 0], [2, 4]])).row_index == 1
    assert greedy_step(TaskMatrix.from_rows([[3, 1]])).row_index == 0
    assert greedy_step(TaskMatrix.from_rows([[1, 2], [2, 4]])).row_index == 0


@given(st.floats(0, 1), st.floats(0, 1))
def test_greedy_on_system2_picks_offload(u1, u2):
    filt = system2_power_filter(1 / 3)
    for dist in (1, 2):
        A = sample_system2(dist, (u1, u2))
        dec = greedy_step(A, filt)
        assert dec.row_index == (2 if A.R[2] > 0 else 0)


def test_greedy_all_filtered():
    with pytest.raises(ValueError):
        greedy_step(TaskMatrix.from_rows([[1, 1]]), lambda T, R, Y: False)


def test_rm_examples():
    A = TaskMatrix.from_rows([[1, 0], [2, 4]])
    dec, s = robbins_monro_step(RmState(theta=1.0, k=5), A)
    assert dec.row_index == 1
    _, s = robbins_monro_step(RmState(theta=2.0, k=7), TaskMatrix.from_rows([[2, 4]]))
    assert s.theta == 2.0 and s.k == 8
    _, s = robbins_monro_step(RmState(theta=0.0, k=1), TaskMatrix.from_rows([[2, 4]]))
    assert s.theta == 2.0


def test_rm_rejects_penalties():
    with pytest.raises(ValueError):
        robbins_monro_step(RmState(), TaskMatrix.from_rows([[1, 0, 1]]))


def test_rm_flags_excursions_without_clamping():
    _, s = robbins_monro_step(RmState(theta=0.0, k=1), TaskMatrix.from_rows([[1, 10]]), theta_cap=1.0)
    assert s.theta == 5.0 and s.excursions == 1


def test_dpp_examples():
    s = DppState.initial(1)
    for R in (3.0, 1.0):
        _, s = dpp_ratio_step(s, TaskMatrix.from_rows([[1, R, 0]]), v=1)
    assert s.theta == 2.0
    dec, _ = dpp_ratio_step(DppState.initial(1), TaskMatrix.from_rows([[5, 1, 0], [1, 3, 1]]), v=2)
    assert dec.row_index == 1
    _, s = dpp_ratio_step(DppState.initial(1), TaskMatrix.from_rows([[1, 0, 2]]), v=1)
    assert s.Q == (2.0,)


def test_dpp_needs_positive_v():
    with pytest.raises(ValueError):
        dpp_ratio_step(DppState.initial(0), TaskMatrix.from_rows([[1, 0]]), v=0)


row = st.tuples(st.floats(1, 10), st.floats(0, 50))


@given(st.lists(st.lists(row, min_size=1, max_size=4), min_size=1, max_size=40))
def test_rm_and_dpp_theta_stay_in_box(seq):
    # with a unit-length idle row on offer, as in System 1, the RM step cannot leave the box
    rm, dpp = RmState(), DppState.initial(0)
    for rows in seq:
        A = TaskMatrix.from_rows([[1.0, 0.0]] + [list(r) for r in rows])
        _, rm = robbins_monro_step(rm, A, theta_cap=50.0)
        _, dpp = dpp_ratio_step(dpp, A, v=3.0)
        assert 0.0 <= dpp.theta <= 50.0
        assert dpp.cum_T >= 1.0 * (dpp.k - 1)
    assert rm.excursions == 0


@given(st.lists(row, min_size=1, max_size=5))
def test_greedy_is_stateless(rows):
    A = TaskMatrix.from_rows([list(r) for r in rows])
    assert greedy_step(A) == greedy_step(A)
