import itertools
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import studentized_range

import oracles
from eager.errors import InputError
from eager.evaluation.ranking import (
    NEMENYI_Q,
    average_ranks,
    friedman_test,
    nemenyi_cd,
    nemenyi_groups,
    nemenyi_q,
    rank_matrix,
    rank_report,
    read_score_csv,
)

DATA = Path(__file__).parent / "data"

score_matrices = st.integers(2, 8).flatmap(
    lambda k: st.lists(
        st.lists(st.sampled_from([0.1, 0.2, 0.5, 0.7, 0.9, 1.0]), min_size=k, max_size=k),
        min_size=2,
        max_size=10,
    )
)


# -- ranks ------------------------------------------------------------------------------


def test_rank_row_with_ties():
    assert rank_matrix([[0.9, 0.8, 0.8, 0.1]]).tolist() == [[1.0, 2.5, 2.5, 4.0]]


def test_lower_is_better_reverses():
    assert rank_matrix([[1.0, 2.0, 3.0]], higher_is_better=False).tolist() == [[1.0, 2.0, 3.0]]


@given(score_matrices)
def test_each_row_sums_to_triangular_number(S):
    k = len(S[0])
    R = rank_matrix(S)
    assert np.allclose(R.sum(axis=1), k * (k + 1) / 2)
    assert average_ranks(S).sum() == pytest.approx(k * (k + 1) / 2)


@given(score_matrices, st.randoms())
def test_ranks_invariant_to_dataset_order(S, rnd):
    rows = list(S)
    rnd.shuffle(rows)
    assert np.allclose(average_ranks(rows), average_ranks(S))


@given(score_matrices)
def test_ranks_invariant_to_monotone_transform(S):
    T = np.exp(3 * np.asarray(S)) + 7
    assert np.array_equal(average_ranks(T), average_ranks(S))
    assert friedman_test(T).chi2 == friedman_test(S).chi2


@given(score_matrices, st.randoms())
def test_method_permutation_permutes_ranks(S, rnd):
    k = len(S[0])
    perm = list(range(k))
    rnd.shuffle(perm)
    P = np.asarray(S)[:, perm]
    assert np.allclose(average_ranks(P), average_ranks(S)[perm])


def test_shape_checks():
    with pytest.raises(InputError):
        average_ranks([[1.0]])
    with pytest.raises(InputError):
        average_ranks([1.0, 2.0])
    with pytest.raises(InputError):
        average_ranks([[1.0, math.nan]])


# -- Friedman -------------------------------------------------------------------------------


def test_friedman_identical_rankings_three_by_four():
    S = [[0.9, 0.5, 0.1]] * 4
    chi2, p = friedman_test(S)
    assert chi2 == pytest.approx(8.0)
    assert p == pytest.approx(math.exp(-4), rel=1e-12)
    assert p == pytest.approx(oracles.chi2_sf_series(8.0, 2), rel=1e-12)
    assert p == pytest.approx(0.0183, abs=1e-4)


def test_friedman_all_equal_scores():
    res = friedman_test(np.full((5, 4), 0.7))
    assert res.chi2 == 0.0 and res.p == 1.0


def test_friedman_needs_two_datasets():
    with pytest.raises(InputError):
        friedman_test([[0.1, 0.2, 0.3]])


@given(st.floats(0.01, 80), st.integers(1, 15))
def test_chi2_p_matches_series_oracle(x, df):
    from eager.evaluation.ranking import chi2_sf

    assert chi2_sf(x, df) == pytest.approx(oracles.chi2_sf_series(x, df), rel=1e-9, abs=1e-300)


def test_iman_davenport_relation():
    S = np.random.default_rng(0).random((8, 4))
    r = friedman_test(S)
    N, k = S.shape
    assert r.iman_davenport_f == pytest.approx((N - 1) * r.chi2 / (N * (k - 1) - r.chi2))


def _permutation_p(S, perms, rng):
    """Monte-Carlo p of the Friedman statistic under independent per-row shuffles."""
    N, k = S.shape
    observed = friedman_test(S).chi2
    base = rank_matrix(S)
    idx = np.argsort(rng.random((perms, N, k)), axis=2)
    R = np.take_along_axis(np.broadcast_to(base, (perms, N, k)), idx, axis=2).mean(axis=1)
    chi = 12.0 * N / (k * (k + 1)) * ((R**2).sum(axis=1) - k * (k + 1) ** 2 / 4.0)
    p = float(np.mean(chi >= observed - 1e-9))
    return p, math.sqrt(max(p * (1 - p), 1.0 / perms) / perms)


@settings(max_examples=12, deadline=None)
@given(st.integers(3, 6), st.integers(2, 4), st.integers(0, 2**32))
def test_friedman_p_agrees_with_permutation_estimate_small_n(N, k, seed):
    # Stated for small samples; the chi-square approximation is known to be
    # loose here, so this test documents the gap rather than hiding it.
    rng = np.random.default_rng(seed)
    S = rng.random((N, k)) + np.arange(k) * 0.3
    p_mc, se = _permutation_p(S, 100_000, rng)
    assert abs(friedman_test(S).p - p_mc) <= 2 * se


def test_friedman_p_agrees_with_permutation_estimate_large_n():
    rng = np.random.default_rng(1)
    S = rng.random((60, 4)) + np.array([0.0, 0.05, 0.1, 0.12])
    p_mc, se = _permutation_p(S, 100_000, rng)
    assert abs(friedman_test(S).p - p_mc) <= 2 * se


# -- Nemenyi --------------------------------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.05, 0.10])
def test_nemenyi_table_matches_studentized_range(alpha):
    for k, q in enumerate(NEMENYI_Q[alpha], 2):
        ref = studentized_range.ppf(1 - alpha, k, np.inf) / math.sqrt(2)
        assert abs(q - ref) < 2e-3, (k, q, ref)


def test_cd_two_methods():
    assert nemenyi_cd(2, 9) == pytest.approx(1.960 / 3)
    assert nemenyi_cd(2, 7) == pytest.approx(1.960 * math.sqrt(1 / 7))


def test_cd_five_methods_sixteen_datasets():
    assert nemenyi_cd(5, 16) == pytest.approx(1.525, abs=1e-3)


@given(st.integers(2, 20), st.integers(1, 50), st.sampled_from([0.05, 0.10]))
def test_cd_halves_when_n_quadruples(k, N, alpha):
    assert nemenyi_cd(k, 4 * N, alpha) == pytest.approx(nemenyi_cd(k, N, alpha) / 2)


def test_nemenyi_bounds():
    with pytest.raises(InputError):
        nemenyi_q(21)
    with pytest.raises(InputError):
        nemenyi_q(3, alpha=0.01)
    with pytest.raises(InputError):
        nemenyi_cd(3, 0)


def brute_force_groups(ranks, cd):
    k = len(ranks)
    cliques = [
        set(c)
        for n in range(2, k + 1)
        for c in itertools.combinations(range(k), n)
        if max(ranks[i] for i in c) - min(ranks[i] for i in c) < cd
    ]
    maximal = [c for c in cliques if not any(c < d for d in cliques)]
    return sorted(
        (tuple(sorted(c, key=lambda i: (ranks[i], i))) for c in maximal),
        key=lambda g: (ranks[g[0]], g[0]),
    )


@given(
    st.lists(st.integers(4, 40).map(lambda v: v / 4), min_size=2, max_size=8),
    st.floats(0.1, 4.0),
)
def test_groups_are_maximal_cliques(ranks, cd):
    assert nemenyi_groups(ranks, cd) == brute_force_groups(ranks, cd)


def test_groups_all_equal_single_group():
    assert nemenyi_groups([2.0, 2.0, 2.0], 0.5) == [(0, 1, 2)]


def test_groups_far_apart_no_groups():
    assert nemenyi_groups([1.0, 2.0], 0.5) == []


# -- golden matrices -------------------------------------------------------------------------


def report(name):
    m, d, S = read_score_csv(DATA / name)
    return rank_report(S, m, d)


def test_shallow_table_avg_ranks():
    expected = [7.786, 4.143, 2.929, 3.429, 6.643, 5.571, 2.786, 2.714, 11.929, 11.857, 11.714, 9.714, 12.214, 11.571]
    assert np.abs(np.array(report("shallow_fm.csv").avg_ranks) - expected).max() <= 0.6


def test_rich_table_avg_ranks():
    expected = [5.938, 11.094, 1.344, 3.000, 6.812, 5.375, 7.688, 8.281, 8.625, 12.625, 6.125, 5.656, 11.969, 10.469]
    assert np.abs(np.array(report("rich_fm.csv").avg_ranks) - expected).max() <= 0.6


def test_framework_table_avg_ranks_and_magellan_rf_distances():
    r = report("framework_fm.csv")
    assert np.abs(np.array(r.avg_ranks) - [3.286, 3.786, 4.000, 2.500, 1.429]).max() <= 0.3
    beaten = {m for m in r.methods if m != "Magellan_RF" and r.significantly_different(m, "Magellan_RF")}
    assert beaten == {"DeepMatcher", "EAGER_RF"}


def test_rich_framework_table_avg_ranks():
    r = report("rich_framework_fm.csv")
    assert np.abs(np.array(r.avg_ranks) - [1.125, 2.312, 2.688, 3.938, 4.938]).max() <= 0.6


def test_report_json_round_trip(tmp_path):
    import json

    r = report("framework_fm.csv")
    r.to_json(tmp_path / "r.json")
    data = json.loads((tmp_path / "r.json").read_text(encoding="utf-8"))
    assert data["methods"] == r.methods and data["cd"] == r.cd


def test_read_score_csv_errors(tmp_path):
    (tmp_path / "a.csv").write_text("dataset,x,y\nd1,0.1\n", encoding="utf-8")
    with pytest.raises(InputError, match=":2"):
        read_score_csv(tmp_path / "a.csv")
    (tmp_path / "b.csv").write_text("dataset,x,y\nd1,0.1,abc\n", encoding="utf-8")
    with pytest.raises(InputError):
        read_score_csv(tmp_path / "b.csv")
