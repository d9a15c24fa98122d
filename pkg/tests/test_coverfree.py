import math

import pytest
from hypothesis import given, settings, strategies as st

from mindisp.coverfree import (SetFamily, alon_asodi_bound, certify_cover_free, cover_number,
                               covers, min_hitting_set, read_family_json, write_family_json)
from mindisp.errors import PreconditionError
from oracles import brute_cover_free, brute_cover_number, hp_alon_asodi


def small_family(d, m, seed):
    import random
    rnd = random.Random(seed)
    return [set(e for e in range(m) if rnd.random() < 0.4) for _ in range(d)]


families = st.integers(1, 8).flatmap(
    lambda d: st.integers(1, 10).flatmap(
        lambda m: st.lists(st.frozensets(st.integers(0, m - 1), max_size=m),
                           min_size=d, max_size=d).map(lambda s: (m, s))))


def test_subset_pair_refuted_at_r1():
    # F1 = {a, b}, F2 = {a}, F3 = {b}; F2 sits inside F1
    fam = SetFamily.from_lists(2, [{0, 1}, {0}, {1}])
    cert = certify_cover_free(fam, 1)
    assert not cert.certified
    assert cert.refutation == (1, (0,))
    assert cert.cover_numbers == (2, 1, 1)
    assert cover_number(fam, 0) == (2, (1, 2))


def test_singletons_are_cover_free_for_every_r():
    fam = SetFamily.from_lists(4, [{i} for i in range(4)])
    for r in (1, 2, 3):
        cert = certify_cover_free(fam, r)
        assert cert.certified and cert.refutation is None
    assert all(c == math.inf for c in certify_cover_free(fam, 1).cover_numbers)


def test_empty_member_has_cover_number_zero():
    fam = SetFamily.from_lists(3, [set(), {1}])
    assert cover_number(fam, 0) == (0, ())
    assert certify_cover_free(fam, 1).refutation == (0, ())


def test_limit_reports_lower_bound():
    fam = SetFamily.from_lists(3, [{0, 1, 2}, {0}, {1}, {2}])
    assert cover_number(fam, 0) == (3, (1, 2, 3))
    assert cover_number(fam, 0, limit=2) == (3, None)
    cert = certify_cover_free(fam, 2, exact_numbers=False)
    assert cert.certified is False  # F_1 = {0} is inside F_0
    assert cert.cover_numbers[0] == 3


def test_r_zero_rejected():
    with pytest.raises(PreconditionError):
        certify_cover_free(SetFamily.from_lists(1, [{0}]), 0)


def test_bad_element_rejected():
    with pytest.raises(ValueError, match="outside ground set"):
        SetFamily.from_lists(2, [{0, 5}])


def test_json_round_trip(tmp_path):
    fam = SetFamily.from_lists(5, [{0, 4}, {1}, set()])
    write_family_json(fam, tmp_path / "f.json")
    assert read_family_json(tmp_path / "f.json") == fam
    cert = certify_cover_free(SetFamily.from_lists(2, [{0}, {1}]), 1).to_json()
    assert cert["cover_numbers"] == [None, None]


@settings(max_examples=150, deadline=None)
@given(families, st.integers(1, 4))
def test_agrees_with_brute_force(fam_spec, r):
    m, sets = fam_spec
    fam = SetFamily.from_lists(m, sets)
    ok, _ = brute_cover_free([set(s) for s in sets], r)
    cert = certify_cover_free(fam, r)
    assert cert.certified == ok
    for j in range(len(sets)):
        assert cert.cover_numbers[j] == brute_cover_number([set(s) for s in sets], j)
    if not ok:
        j, A = cert.refutation
        assert len(A) <= r and j not in A and covers(fam, j, A)


@settings(max_examples=80, deadline=None)
@given(families, st.integers(1, 3))
def test_monotone_in_r(fam_spec, r):
    fam = SetFamily.from_lists(*fam_spec)
    if certify_cover_free(fam, r + 1).certified:
        assert certify_cover_free(fam, r).certified


@settings(max_examples=80, deadline=None)
@given(families, st.integers(1, 3), st.randoms(use_true_random=False))
def test_relabelling_invariance(fam_spec, r, rnd):
    m, sets = fam_spec
    sigma = list(range(m))
    rnd.shuffle(sigma)
    order = list(range(len(sets)))
    rnd.shuffle(order)
    moved = [{sigma[e] for e in sets[i]} for i in order]
    a = certify_cover_free(SetFamily.from_lists(m, sets), r)
    b = certify_cover_free(SetFamily.from_lists(m, moved), r)
    assert a.certified == b.certified
    assert sorted(a.cover_numbers) == sorted(b.cover_numbers)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 2**8 - 1), min_size=1, max_size=12))
def test_min_hitting_set_is_minimal(masks):
    import itertools
    sol = min_hitting_set(masks)
    assert all(any(m >> e & 1 for e in sol) for m in masks)
    for size in range(len(sol)):
        for S in itertools.combinations(range(8), size):
            assert not all(any(m >> e & 1 for e in S) for m in masks)


@pytest.mark.parametrize("d, r", [(16, 2), (16, 8), (100, 5), (1000, 40)])
def test_alon_asodi_matches_high_precision(d, r):
    assert alon_asodi_bound(d, r) == pytest.approx(float(hp_alon_asodi(d, r)), rel=1e-12)


def test_alon_asodi_recorded():
    assert alon_asodi_bound(16, 2) == pytest.approx(1.5627562382434074, rel=1e-12)


@pytest.mark.parametrize("d, r, msg", [(16, 9, "2\\*sqrt"), (16, 1, "r >= 2")])
def test_alon_asodi_preconditions(d, r, msg):
    with pytest.raises(PreconditionError, match=msg):
        alon_asodi_bound(d, r)


@settings(max_examples=60, deadline=None)
@given(st.integers(4, 12), st.integers(1, 8), st.integers(0, 10**6))
def test_no_small_cover_free_family_beats_alon_asodi(d, m, seed):
    r = 2
    sets = small_family(d, m, seed)
    fam = SetFamily.from_lists(m, sets)
    if certify_cover_free(fam, r).certified:
        assert m >= alon_asodi_bound(d, r)
