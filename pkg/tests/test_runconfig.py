import pytest

from trajauth.config import FULL_GRID, SMALL_GRID
from trajauth.errors import ConfigError
from trajauth.runconfig import RunConfig, from_dict, load_run_config, parse_grid


def test_defaults():
    cfg = from_dict({})
    assert cfg.grid == SMALL_GRID and cfg.preset == "desk" and cfg.variants == ("3Dfrom2D_WESHKA",)


def test_full_document(tmp_path):
    p = tmp_path / "run.yaml"
    p.write_text(
        "corpus: data/c.npz\ngrid: full\nvariants: [WESHKA, li, 2Dfrom2D_W]\nseed: 3\nworkers: 2\n"
        "preset: paper\ntrain: {epochs: 5, batch_size: 16, lr: 0.001, lambda: 0.25, stride: 2}\n"
    )
    cfg = load_run_config(p)
    assert cfg.grid == FULL_GRID
    assert cfg.variants == ("3Dfrom2D_WESHKA", "Li2024-3Dfrom3D", "2Dfrom2D_W")
    assert (cfg.train.epochs, cfg.train.batch_size, cfg.train.lr, cfg.train.lam, cfg.train.stride) == (5, 16, 1e-3, 0.25, 2)


@pytest.mark.parametrize(
    "doc, path",
    [
        ({"train": {"lr": "fast"}}, "config.train.lr"),
        ({"train": {"epochs": 0}}, "config.train.epochs"),
        ({"train": {"momentum": 0.9}}, "config.train.momentum"),
        ({"grid": [[40, 30], [30, 40]]}, r"config.grid\[1\]"),
        ({"grid": "medium"}, "config.grid"),
        ({"variants": ["WESHKA", "XYZ"]}, r"config.variants\[1\]"),
        ({"preset": "huge"}, "config.preset"),
        ({"synthetic": {"users": 1}}, "config.synthetic.users"),
        ({"bogus": 1}, "config.bogus"),
    ],
)
def test_errors_carry_field_path(doc, path):
    with pytest.raises(ConfigError, match=path):
        from_dict(doc)


def test_invalid_yaml(tmp_path):
    (tmp_path / "bad.yaml").write_text("train: [unclosed\n")
    with pytest.raises(ConfigError, match="YAML"):
        load_run_config(tmp_path / "bad.yaml")


def test_grid_w_beyond_trial():
    with pytest.raises(ConfigError, match="trial length"):
        parse_grid([[140, 70]])


def test_digest_ignores_workers():
    a, b = RunConfig(workers=1), RunConfig(workers=8)
    assert a.digest() == b.digest()
    assert a.digest() != RunConfig(seed=1).digest()


def test_yaml_round_trip(tmp_path):
    cfg = from_dict({"grid": [[60, 40]], "variants": ["li"], "train": {"epochs": 3}})
    (tmp_path / "r.yaml").write_text(cfg.to_yaml())
    assert load_run_config(tmp_path / "r.yaml").digest() == cfg.digest()
