import numpy as np
import pytest
from hypothesis import given, strategies as st

from trajauth.synth import oracle_eer
from trajauth.train_eval.metrics import compute_eer, forecast_mse


def test_separated():
    assert compute_eer([0.9] * 4, [0.1] * 4).eer == 0.0


def test_identical_distributions():
    s = [0.1, 0.4, 0.7]
    assert compute_eer(s, s).eer == 0.5


def test_hand_case():
    r = compute_eer([0.9, 0.8, 0.4], [0.6, 0.3, 0.2])
    assert r.eer == pytest.approx(1 / 3)
    assert r.eer == oracle_eer([0.9, 0.8, 0.4], [0.6, 0.3, 0.2])


def test_tie_goes_to_lowest_threshold():
    # |FAR - FRR| is 1.0, 0.5, 0.5 at thresholds 0.2, 0.5, 0.8
    r = compute_eer([0.5], [0.2, 0.8])
    assert r.threshold == 0.5
    assert r.eer == 0.25


def test_empty_lists_rejected():
    with pytest.raises(ValueError):
        compute_eer([], [0.1])
    with pytest.raises(ValueError):
        compute_eer([0.1], [])


def test_matches_oracle_on_random_sets():
    rng = np.random.default_rng(0)
    for _ in range(300):
        g = rng.random(rng.integers(1, 100)).round(rng.integers(1, 4))
        i = rng.random(rng.integers(1, 100)).round(rng.integers(1, 4))
        assert compute_eer(g, i).eer == oracle_eer(g, i)


@given(
    st.lists(st.floats(0, 1), min_size=1, max_size=60),
    st.lists(st.floats(0, 1), min_size=1, max_size=60),
)
def test_curve_monotone_and_bounded(g, i):
    r = compute_eer(g, i)
    assert 0.0 <= r.eer <= 1.0
    th, far, frr = map(np.array, zip(*r.curve))
    assert np.all(np.diff(th) > 0)
    assert np.all(np.diff(far) <= 0) and np.all(np.diff(frr) >= 0)
    assert r.eer == oracle_eer(g, i)


def test_forecast_mse_unit_error():
    assert forecast_mse(np.ones((3, 5, 3)), np.zeros((3, 5, 3))) == 1.0
