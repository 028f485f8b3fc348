import numpy as np
import pytest

from trajauth.errors import DataError
from trajauth.nn.checkpoint import load_checkpoint, save_checkpoint


def test_round_trip(tmp_path):
    t = {"a": np.arange(6, dtype=np.float32).reshape(2, 3), "b": np.ones(4, np.float32)}
    save_checkpoint(tmp_path / "c", t, {"step": 3})
    back, meta = load_checkpoint(tmp_path / "c")
    assert meta["step"] == 3
    for k in t:
        np.testing.assert_array_equal(back[k], t[k])


def test_bytes_deterministic(tmp_path):
    t = {"w": np.random.default_rng(0).standard_normal((3, 3)).astype(np.float32)}
    save_checkpoint(tmp_path / "a", t, {"x": 1})
    save_checkpoint(tmp_path / "b", t, {"x": 1})
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_rejects_other_files(tmp_path):
    (tmp_path / "c").write_bytes(b"garbage" * 4)
    with pytest.raises(DataError):
        load_checkpoint(tmp_path / "c")
