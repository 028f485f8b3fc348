import numpy as np
import pytest

from trajauth.errors import ConfigError
from trajauth.ingest import ingest_manifest
from trajauth.synth import (
    PX_PER_M,
    draw_signatures,
    generate_corpus,
    generate_raw,
    oracle_eer,
    oracle_windows,
    raw_to_corpus,
    separation,
    write_dataset,
)


def test_corpus_shape(corpus4):
    assert corpus4.users == ["u00", "u01", "u02", "u03"]
    for u in corpus4.users:
        assert corpus4.sessions(u) == [1, 2]
        for s in (1, 2):
            trials = corpus4.user_trials(u, s)
            assert len(trials) == 10
            assert all(t.joints2d.shape == (135, 6, 2) and t.controller3d.shape == (135, 3) for t in trials)


def test_needs_two_users():
    with pytest.raises(ConfigError):
        generate_corpus(1, 0)


def test_deterministic_digest():
    assert generate_corpus(2, 3, trials=2).digest() == generate_corpus(2, 3, trials=2).digest()
    assert generate_corpus(2, 3, trials=2).digest() != generate_corpus(2, 4, trials=2).digest()


def test_zero_noise_trials_identical():
    c = generate_corpus(2, 0, trials=2, noise_scale=0.0)
    a, b = c.get("u00", 1, 1), c.get("u00", 1, 2)
    np.testing.assert_array_equal(a.joints2d, b.joints2d)
    np.testing.assert_array_equal(a.controller3d, b.controller3d)


def test_limb_lengths_constant():
    for r in generate_raw(2, 5, trials=2):
        m = r.joints_video / PX_PER_M  # pixels back to metres
        fore = np.linalg.norm(m[:, 0] - m[:, 1], axis=1)
        upper = np.linalg.norm(m[:, 1] - m[:, 2], axis=1)
        shin = np.linalg.norm(m[:, 4] - m[:, 5], axis=1)
        for seg in (fore, upper, shin):
            assert np.ptp(seg) < 1e-6


def test_signatures_separated():
    sigs = draw_signatures(8, 0)
    for i in range(8):
        for j in range(i):
            assert separation(sigs[i], sigs[j]) >= 0.25


def test_session_two_differs():
    c = generate_corpus(2, 0, trials=1)
    assert not np.allclose(c.get("u00", 1, 1).controller3d, c.get("u00", 2, 1).controller3d)


def test_write_ingest_round_trip(tmp_path):
    raw = generate_raw(2, 9, trials=2)
    write_dataset(raw, tmp_path)
    direct = raw_to_corpus(raw)
    parsed = ingest_manifest(tmp_path)
    assert parsed.digest() == direct.digest()


def test_oracle_eer_trivial_cases():
    assert oracle_eer([0.9] * 5, [0.1] * 5) == 0.0
    assert oracle_eer([0.3, 0.6], [0.3, 0.6]) == 0.5
    assert oracle_eer([0.9, 0.8, 0.4], [0.6, 0.3, 0.2]) == pytest.approx(1 / 3)


def test_oracle_windows_cases():
    assert len(oracle_windows(135, 40, 1)) == 96
    assert oracle_windows(135, 135, 1) == [0]
    assert oracle_windows(10, 3, 4) == [0, 4]
