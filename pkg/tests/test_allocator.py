from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mbuwb import allocator as al
from mbuwb.errors import ArgumentError, ParameterError

from oracles import exhaustive_assignment


def levels_from(values, weights, w_mac=1.0, w_phy=1.0, mode="normalized"):
    ids = list(range(1, len(values) + 1))
    return al.allocation_levels(ids, weights, values, w_mac, w_phy, mode)


def check_invariants(a: al.Assignment, n_users):
    ids = a.user_ids
    assert sorted(ids) == list(range(1, n_users + 1))  # everybody placed exactly once
    assert len(a.bands) == 3
    assert sum(len(b) >= 1 for b in a.bands) == min(n_users, 3)  # no band idle while sharing
    for b in a.bands:
        assert sum(Fraction(1, len(b)) for _ in b) == (1 if b else 0)


def test_subband_sequence():
    assert al.subband_sequence([1.0, 5.0, 3.0]) == (2, 3, 1)
    assert al.subband_sequence([2.0, 2.0, 1.0]) == (1, 2, 3)


def test_allocation_level_formula():
    assert al.allocation_level(0.6, [0.2, 0.9, 0.4], 2.0, 0.5) == pytest.approx(2.0 * 0.6 + 0.5 * 0.9)
    with pytest.raises(ParameterError):
        al.allocation_level(0.5, [1.0], 0.0, 0.0)
    with pytest.raises(ParameterError):
        al.allocation_level(0.5, [1.0], -1.0, 1.0)


def test_three_users_take_preferred_bands():
    csi = np.array([[10.0, 3.0, 1.0], [9.0, 8.0, 2.0], [7.0, 6.0, 5.0]])
    a = al.negotiate(levels_from(csi, [0.6, 0.2, 0.2]))
    assert a.bands == ((1,), (2,), (3,))
    assert not any(a.is_shared(u) for u in (1, 2, 3))


def test_fourth_user_shares_lowest_load_band():
    csi = np.array([[10.0, 3.0, 1.0], [2.0, 9.0, 1.0], [1.0, 2.0, 8.0], [5.0, 5.0, 5.0]])
    a = al.negotiate(levels_from(csi, [0.4, 0.3, 0.2, 0.1], w_phy=0.0))
    assert a.bands == ((1,), (2,), (3, 4))
    assert a.fraction(4) == Fraction(1, 2) and a.is_shared(3)


def test_equal_al_goes_to_lower_id():
    lv = [al.AllocationLevel(2, 1.0, (1, 2, 3)), al.AllocationLevel(1, 1.0, (1, 2, 3))]
    assert al.negotiate(lv).bands == ((1,), (2,), ())


def test_single_user():
    a = al.negotiate([al.AllocationLevel(5, 0.3, (3, 1, 2))])
    assert a.bands == ((), (), (5,))
    check_invariants(al.Assignment(((), (), (1,))), 1)


def test_assignment_text_roundtrip():
    a = al.Assignment(((2,), (1, 4), (3,)))
    assert a.dumps() == "1: 2@1\n2: 1@1/2,4@1/2\n3: 3@1\n"
    assert al.Assignment.loads(a.dumps()) == a
    empty = al.Assignment(((), (1,), ()))
    assert al.Assignment.loads(empty.dumps()) == empty


def test_normalization():
    np.testing.assert_allclose(al.normalize_csi([[0.0, 5.0], [10.0, 2.5]]), [[0.0, 0.5], [1.0, 0.25]])
    np.testing.assert_array_equal(al.normalize_csi([[3.0, 3.0]]), [[0.0, 0.0]])


def test_errors():
    with pytest.raises(ArgumentError):
        al.negotiate([])
    with pytest.raises(ArgumentError):
        al.AllocationLevel(1, float("nan"), (1, 2, 3))
    with pytest.raises(ArgumentError):
        al.AllocationLevel(1, 0.0, (1, 1, 2))
    with pytest.raises(ArgumentError):
        al.subband_sequence([1.0, np.inf, 0.0])
    with pytest.raises(ArgumentError):
        al.allocation_levels([1], [1.0], [[1.0, 2.0, 3.0]], 1, 1, mode="log")


csi_matrices = st.integers(1, 4).flatmap(
    lambda n: st.tuples(
        st.lists(st.lists(st.sampled_from([0.0, 1.0, 2.0, 3.5, 7.0, 12.0]), min_size=3, max_size=3),
                 min_size=n, max_size=n),
        st.lists(st.sampled_from([0.1, 0.2, 0.3, 0.6]), min_size=n, max_size=n),
    )
)


@given(csi_matrices, st.sampled_from([0.0, 0.5, 1.0, 4.0]))
def test_negotiate_matches_oracle_with_ties(data, w_mac):
    values, weights = data
    lv = levels_from(np.array(values), weights, w_mac=w_mac, w_phy=1.0)
    a = al.negotiate(lv)
    assert a.bands == exhaustive_assignment(lv)
    check_invariants(a, len(values))


def test_negotiate_matches_oracle_random_matrices():
    rng = np.random.default_rng(2024)
    for trial in range(2000):
        n = 1 + trial % 4
        lv = levels_from(rng.normal(8.0, 4.0, (n, 3)), rng.dirichlet(np.ones(n)), w_mac=rng.uniform(0, 3))
        a = al.negotiate(lv)
        assert a.bands == exhaustive_assignment(lv)
        check_invariants(a, n)
