import pytest
from hypothesis import given
from hypothesis import strategies as st

from eager.errors import InputError
from eager.evaluation.metrics import PRF, micro_average, per_type_prf, prf


def test_perfect_predictions():
    r = prf([1, 0, 1], [1, 0, 1])
    assert (r.precision, r.recall, r.f_measure) == (1.0, 1.0, 1.0)


def test_half_precision_full_recall():
    r = prf([1, 0], [1, 1])
    assert r.precision == 0.5 and r.recall == 1.0
    assert r.f_measure == pytest.approx(2 / 3)


def test_no_predicted_matches_gives_zero():
    r = prf([1, 1, 0], [0, 0, 0])
    assert (r.precision, r.recall, r.f_measure) == (0.0, 0.0, 0.0)


def test_counts_recorded():
    r = prf([1, 1, 0, 0], [1, 0, 1, 0])
    assert (r.tp, r.fn, r.fp, r.tn) == (1, 1, 1, 1)
    assert r.as_dict()["tp"] == 1


def test_length_mismatch_and_empty():
    with pytest.raises(InputError):
        prf([1, 0], [1])
    with pytest.raises(InputError):
        prf([], [])


labels = st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1), st.sampled_from("abc")), min_size=1, max_size=40)


@given(labels)
def test_prf_bounded_and_f_is_harmonic_mean(rows):
    y, p, _ = zip(*rows)
    r = prf(y, p)
    assert 0 <= r.precision <= 1 and 0 <= r.recall <= 1
    if r.precision + r.recall:
        assert r.f_measure == pytest.approx(2 * r.precision * r.recall / (r.precision + r.recall))
        assert min(r.precision, r.recall) <= r.f_measure + 1e-12 <= max(r.precision, r.recall) + 2e-12


@given(labels)
def test_per_type_counts_reconcile_with_overall(rows):
    y, p, t = zip(*rows)
    per = per_type_prf(y, p, t)
    assert set(per) == set(t)
    assert micro_average(per) == prf(y, p)


def test_per_type_missing_type_rejected():
    with pytest.raises(InputError):
        per_type_prf([1], [1], [None])


def test_from_counts_zero_division():
    assert PRF.from_counts(0, 0, 0).f_measure == 0.0
