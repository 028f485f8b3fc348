import numpy as np
import pytest

from trajauth import auth_model, traj_model
from trajauth.auth_model import AuthModel
from trajauth.config import FULL_GRID, AuthConfig, TrajConfig, get_preset, make_configs, parse_variant
from trajauth.errors import ConfigError, ShapeError
from trajauth.nn import Tensor, functional as F, no_grad
from trajauth.nn.gradcheck import check_gradients
from trajauth.traj_model import TrajModel, li_auth_input, positional_encoding, temporal_encoding

DESK = get_preset("desk")


def _tiny(w=12, w_in=8, decoder="full", in_features=4):
    return TrajConfig(
        d_model=8, n_head=2, d_k=4, n_enc_layers=1, n_dec_layers=1, d_ffn=12,
        w=w, w_in=w_in, n_in=in_features // 2, in_features=in_features, out_channels=3, decoder=decoder,
    )


# -- encodings ------------------------------------------------------------------

def test_pe_at_zero():
    pe = positional_encoding(4, 8)
    np.testing.assert_array_equal(pe[0, 0::2], 0.0)
    np.testing.assert_array_equal(pe[0, 1::2], 1.0)


def test_pe_value_and_bounds():
    pe = positional_encoding(135, 64)
    assert pe[1, 0] == pytest.approx(np.sin(1.0))
    assert np.abs(pe).max() <= 1.0


@pytest.mark.parametrize("t, expected", [(0, -0.5), (135 / 2, 0.0)])
def test_te_endpoints(t, expected):
    assert t / 135 - 0.5 == expected
    if float(t).is_integer():
        assert temporal_encoding(int(t), 1)[0, 0] == expected


def test_te_start_60():
    assert temporal_encoding(60, 5)[0, 0] == pytest.approx(60 / 135 - 0.5)
    assert temporal_encoding(60, 5)[0, 0] == pytest.approx(-0.0556, abs=1e-4)


def test_te_rejects_overrun():
    with pytest.raises(ShapeError):
        temporal_encoding(100, 40)


def test_te_batched_shape():
    assert temporal_encoding(np.array([0, 5, 9]), 7).shape == (3, 7, 1)


# -- forecaster -----------------------------------------------------------------

def test_embedding_zero_in_zero_out():
    m = TrajModel(_tiny(), dtype=np.float64)
    m.enc_embed.bias.data[...] = 0
    out = m.enc_embed(Tensor(np.zeros((2, 8, 4))))
    assert np.all(out.data == 0)


def test_embed_sum_shape():
    m = TrajModel(_tiny(), dtype=np.float64)
    h = m.embed(m.enc_embed, np.zeros((3, 8, 4)), np.array([0, 1, 2]))
    assert h.shape == (3, 8, 8)


def test_input_feature_mismatch():
    m = TrajModel(_tiny())
    with pytest.raises(ShapeError, match="features"):
        m(np.zeros((1, 8, 3, 2)), 0)


def test_output_shape_90_60_desk():
    tcfg, _ = make_configs(parse_variant("3Dfrom2D_WESHKA"), 90, 60, DESK)
    out = TrajModel(tcfg)(np.zeros((2, 60, 6, 2)), np.array([0, 45]))
    assert out.shape == (2, 90, 3)


def test_encoder_output_width_paper_scale():
    tcfg, _ = make_configs(parse_variant("3Dfrom2D_W"), 40, 30, get_preset("paper"))
    tcfg = TrajConfig(**{**tcfg.to_dict(), "n_enc_layers": 1})
    m = TrajModel(tcfg)
    assert m.encode(np.zeros((1, 30, 2), np.float32), np.array([0])).shape == (1, 30, 512)


def test_config_rejects_w_not_above_w_in():
    with pytest.raises(ConfigError):
        _tiny(w=8, w_in=8)


def test_config_rejects_head_mismatch():
    with pytest.raises(ConfigError):
        TrajConfig(d_model=10, n_head=3, d_k=3)


def test_decoder_self_attention_is_causal():
    m = TrajModel(_tiny(), dtype=np.float64)
    x = Tensor(np.random.default_rng(0).standard_normal((2, 8, 8)))
    _, w = m.decoder[0].self_attn(x, x, x, causal=True, return_weights=True)
    assert np.all(w[..., np.triu_indices(8, 1)[0], np.triu_indices(8, 1)[1]] == 0)


def test_timestamp_shuffle_changes_output():
    m = TrajModel(_tiny(), dtype=np.float64)
    x = np.random.default_rng(1).standard_normal((1, 8, 4))
    a = m.encode(x, np.array([0])).data
    b = m.encode(x[:, ::-1], np.array([0])).data
    assert not np.allclose(a[:, ::-1], b)


def test_forward_deterministic():
    m = TrajModel(_tiny(), seed=3)
    x = np.random.default_rng(0).standard_normal((2, 8, 4))
    np.testing.assert_array_equal(m(x, 0).data, m(x, 0).data)


def test_no_nans_after_init():
    m = TrajModel(_tiny())
    out = m(np.random.default_rng(0).standard_normal((4, 8, 4)) * 10, np.array([0, 1, 2, 3]))
    assert np.all(np.isfinite(out.data))


@pytest.mark.parametrize("preset", ["paper", "desk"])
@pytest.mark.parametrize("decoder", ["full", "informer"])
def test_parameter_count_closed_form(preset, decoder):
    p = get_preset(preset)
    cfg = TrajConfig(
        d_model=p.d_model, n_head=p.n_head, d_k=p.d_k, d_ffn=p.d_ffn, w=90, w_in=60,
        n_in=6, in_features=12, decoder=decoder,
    )
    assert TrajModel(cfg).num_parameters() == traj_model.expected_param_count(cfg)


def test_forecaster_gradients():
    m = TrajModel(_tiny(), dtype=np.float64)
    rng = np.random.default_rng(2)
    x = rng.standard_normal((2, 8, 4))
    target = rng.standard_normal((2, 12, 3))
    params = [m.enc_embed.weight, m.encoder[0].attn.q.weight, m.decoder[0].cross_attn.v.bias, m.head.weight]
    errs = check_gradients(lambda: F.mse_loss(m(x, np.array([0, 3])), target), params)
    assert max(errs) < 1e-3


def test_forward_single_matches_batch():
    m = TrajModel(_tiny(), dtype=np.float64)
    x = np.random.default_rng(0).standard_normal((8, 2, 2))
    np.testing.assert_allclose(m.forward_single(x, 4).data, m(x[None], np.array([4])).data[0])


# -- baseline (informer decoder) ------------------------------------------------------

def test_li_shapes_70_40():
    tcfg, _ = make_configs(parse_variant("Li2024-3Dfrom3D"), 70, 40, DESK)
    m = TrajModel(tcfg)
    obs = np.random.default_rng(0).standard_normal((2, 40, 3)).astype(np.float32)
    pred = m(obs, np.array([0, 10]))
    assert pred.shape == (2, 50, 3)
    cat = li_auth_input(obs, pred, 40)
    assert cat.shape == (2, 70, 3)
    np.testing.assert_array_equal(cat.data[:, :20], obs[:, :20])


def test_li_odd_w_in_still_fills_w():
    tcfg, _ = make_configs(parse_variant("Li2024-3Dfrom3D"), 50, 31, DESK)
    assert tcfg.overlap == 15 and tcfg.out_len == 34
    m = TrajModel(tcfg)
    obs = np.zeros((1, 31, 3), np.float32)
    assert li_auth_input(obs, m(obs, 0), 31).shape == (1, 50, 3)


# -- authenticator ------------------------------------------------------------------

def _auth(filters=(4, 6, 4), c=3, dtype=np.float64, seed=0):
    return AuthModel(AuthConfig(filters=filters, in_channels=c), seed, dtype)


def test_probabilities_sum_to_one():
    p = _auth(dtype=np.float32)(np.random.default_rng(0).standard_normal((5, 40, 3)))
    np.testing.assert_allclose(p.data.sum(axis=1), 1.0, atol=1e-6)


def test_accepts_any_length():
    m = _auth()
    for w in (40, 90, 130):
        assert m.features(np.zeros((2, w, 3))).shape == (2, 4)


def test_too_short_window():
    with pytest.raises(ConfigError, match="kernel"):
        _auth()(np.zeros((1, 7, 3)))


def test_channel_mismatch():
    with pytest.raises(ShapeError):
        _auth(c=2)(np.zeros((1, 40, 3)))


def test_paper_block_three_width():
    m = AuthModel(AuthConfig(), dtype=np.float32)
    assert m.features(np.zeros((1, 40, 3))).shape == (1, 128)
    assert m.num_parameters() == auth_model.expected_param_count(AuthConfig())


def test_decision_score_eval_deterministic_and_bounded():
    m = _auth()
    x = np.random.default_rng(0).standard_normal((6, 40, 3))
    m(x)  # one train-mode pass moves the running stats
    a, b = m.decision_score(x), m.decision_score(x)
    np.testing.assert_array_equal(a, b)
    assert np.all((a >= 0) & (a <= 1))
    assert m.training


def test_score_monotone_in_genuine_logit():
    m = _auth()
    m.eval()
    x = np.random.default_rng(0).standard_normal((1, 40, 3))
    scores = []
    for shift in (-1.0, 0.0, 1.0):
        m.classifier.bias.data[1] = shift
        with no_grad():
            scores.append(m(x).data[0, 1])
    assert scores[0] < scores[1] < scores[2]


def test_auth_gradients_through_bce():
    m = _auth()
    rng = np.random.default_rng(4)
    x = rng.standard_normal((4, 12, 3))
    labels = np.array([1.0, 0.0, 1.0, 0.0])
    params = [m.blocks[0].conv.weight, m.blocks[1].bn.gamma, m.blocks[2].conv.bias, m.classifier.weight]
    errs = check_gradients(lambda: F.bce_loss(m(x)[:, 1], labels), params)
    assert max(errs) < 1e-3


@pytest.mark.parametrize("w, w_in", FULL_GRID)
def test_grid_shapes_desk(w, w_in):
    tcfg, acfg = make_configs(parse_variant("3Dfrom2D_WESHKA"), w, w_in, DESK)
    pred = TrajModel(tcfg)(np.zeros((1, w_in, 6, 2), np.float32), 135 - w)
    assert pred.shape == (1, w, 3)
    assert AuthModel(acfg)(pred).shape == (1, 2)
