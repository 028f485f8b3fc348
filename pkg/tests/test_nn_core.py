import numpy as np
import pytest

from trajauth.errors import ContractError, NumericalError, ShapeError
from trajauth.nn import Adam, Param, Tensor, backward, functional as F, kernels
from trajauth.nn.gradcheck import check_gradients
from trajauth.nn.module import BatchNorm1d, MultiHeadAttention


def _p(rng, *shape):
    return Param(rng.standard_normal(shape))


# -- linear ------------------------------------------------------------------

def test_linear_identity():
    x = Tensor(np.arange(6.0).reshape(2, 3))
    y = F.linear(x, Tensor(np.eye(3)), Tensor(np.zeros(3)))
    np.testing.assert_array_equal(y.data, x.data)


def test_linear_hand_product():
    x = Tensor([[1.0, 2.0]])
    w = Tensor([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    y = F.linear(x, w, Tensor(np.zeros(3)))
    np.testing.assert_array_equal(y.data, [[1.0, 2.0, 3.0]])


def test_linear_shape_error_lists_shapes():
    with pytest.raises(ShapeError, match=r"\(2, 4\).*\(3, 5\)"):
        F.linear(Tensor(np.zeros((2, 4))), Tensor(np.zeros((3, 5))))


def test_linear_grad_matches_finite_differences():
    rng = np.random.default_rng(0)
    x = Tensor(rng.standard_normal((4, 5)))
    w, b = _p(rng, 5, 3), _p(rng, 3)
    errs = check_gradients(lambda: F.linear(x, w, b).sum(), [w, b])
    assert max(errs) < 1e-4


# -- softmax / attention -----------------------------------------------------

def test_softmax_uniform():
    np.testing.assert_allclose(F.softmax(Tensor([0.0, 0.0])).data, [0.5, 0.5])


def test_softmax_stable_for_large_logits():
    y = F.softmax(Tensor([1000.0, 1000.0, -1000.0])).data
    assert np.all(np.isfinite(y))
    np.testing.assert_allclose(y.sum(), 1.0)


def _mha(rng, d_model=8, n_head=2, d_k=4):
    return MultiHeadAttention(d_model, n_head, d_k, rng, dtype=np.float64)


def test_attention_single_position_is_projected_value():
    rng = np.random.default_rng(1)
    mha = _mha(rng)
    x = Tensor(rng.standard_normal((1, 8)))
    out, w = mha(x, x, x, return_weights=True)
    assert w.shape == (2, 1, 1)
    np.testing.assert_array_equal(w, 1.0)
    v = F.linear(x, mha.v.weight, mha.v.bias)
    expected = F.linear(v, mha.o.weight, mha.o.bias)
    np.testing.assert_allclose(out.data, expected.data, rtol=1e-12)


def test_attention_rows_sum_to_one_and_mask_is_exact():
    rng = np.random.default_rng(2)
    mha = _mha(rng)
    x = Tensor(rng.standard_normal((3, 6, 8)))
    _, w = mha(x, x, x, return_weights=True)
    np.testing.assert_allclose(w.sum(-1), 1.0, atol=1e-6)
    _, wm = mha(x, x, x, causal=True, return_weights=True)
    np.testing.assert_allclose(wm.sum(-1), 1.0, atol=1e-6)
    upper = np.triu(np.ones((6, 6), dtype=bool), 1)
    assert np.all(wm[..., upper] == 0.0)


def test_attention_rejects_indivisible_heads():
    from trajauth.errors import ConfigError

    rng = np.random.default_rng(0)
    mha = _mha(rng)
    x = Tensor(rng.standard_normal((2, 8)))
    with pytest.raises(ConfigError):
        F.multi_head_attention(x, x, x, mha.param_dict(), n_head=3)


def test_attention_grad():
    rng = np.random.default_rng(3)
    mha = _mha(rng)
    q = Tensor(rng.standard_normal((2, 4, 8)), requires_grad=True)
    kv = Tensor(rng.standard_normal((2, 5, 8)), requires_grad=True)
    target = rng.standard_normal((2, 4, 8))

    def f():
        return F.mse_loss(mha(q, kv, kv), target)

    errs = check_gradients(f, [q, kv] + mha.parameters())
    assert max(errs) < 1e-4


# -- conv1d ------------------------------------------------------------------

def test_conv_identity_kernel():
    x = Tensor(np.array([[[1.0, -2.0, 3.0, 4.0]]]))
    y = F.conv1d(x, Tensor(np.array([[[0.0, 1.0, 0.0]]])))
    np.testing.assert_array_equal(y.data, x.data)


def test_conv_all_ones_hand_case():
    # zero padded [0,1,2,3,0] with window 3 -> [3, 6, 5]
    y = F.conv1d(Tensor(np.array([[[1.0, 2.0, 3.0]]])), Tensor(np.ones((1, 1, 3))))
    np.testing.assert_array_equal(y.data, [[[3.0, 6.0, 5.0]]])


def test_conv_even_kernel_pads_left_heavier():
    assert F.same_padding(8) == (4, 3)
    assert F.same_padding(5) == (2, 2)
    # a delta kernel at tap 4 of 8 is identity under (4 left, 3 right) padding
    w = np.zeros((1, 1, 8))
    w[0, 0, 4] = 1.0
    x = np.arange(10.0).reshape(1, 1, 10)
    np.testing.assert_array_equal(F.conv1d(Tensor(x), Tensor(w)).data, x)


def test_conv_length_zero_rejected():
    with pytest.raises(ShapeError):
        F.conv1d(Tensor(np.zeros((1, 1, 0))), Tensor(np.ones((1, 1, 3))))


@pytest.mark.parametrize("k", [3, 5, 8])
def test_conv_grad(k):
    rng = np.random.default_rng(k)
    x = Tensor(rng.standard_normal((2, 3, 9)), requires_grad=True)
    w, b = _p(rng, 4, 3, k), _p(rng, 4)
    target = rng.standard_normal((2, 4, 9))
    errs = check_gradients(lambda: F.mse_loss(F.conv1d(x, w, b), target), [x, w, b])
    assert max(errs) < 1e-4


def test_conv_kernels_numba_and_numpy_agree():
    rng = np.random.default_rng(5)
    xpad = rng.standard_normal((3, 4, 17))
    w = rng.standard_normal((6, 4, 8))
    gy = rng.standard_normal((3, 6, 10))
    np.testing.assert_allclose(
        kernels.conv1d_forward_numba(xpad, w), kernels.conv1d_forward_numpy(xpad, w), rtol=1e-10
    )
    for a, b in zip(kernels.conv1d_backward_numba(xpad, w, gy), kernels.conv1d_backward_numpy(xpad, w, gy)):
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)


# -- normalisation -----------------------------------------------------------

def test_batch_norm_train_statistics():
    rng = np.random.default_rng(6)
    bn = BatchNorm1d(3, dtype=np.float64)
    x = Tensor(rng.normal(4.0, 3.0, size=(5, 3, 7)))
    y = bn(x).data
    np.testing.assert_allclose(y.mean(axis=(0, 2)), 0.0, atol=1e-5)
    np.testing.assert_allclose(y.var(axis=(0, 2)), 1.0, atol=1e-3)


def test_batch_norm_running_mean_update():
    bn = BatchNorm1d(1, momentum=0.1, dtype=np.float64)
    bn(Tensor(np.full((2, 1, 4), 5.0)))
    np.testing.assert_allclose(bn.running_mean, [0.5])


def test_batch_norm_single_sample_and_zero_variance():
    bn = BatchNorm1d(2, dtype=np.float64)
    y = bn(Tensor(np.ones((1, 2, 1)))).data
    assert np.all(np.isfinite(y))


def test_batch_norm_eval_after_constant_training_is_near_zero():
    bn = BatchNorm1d(2, dtype=np.float64)
    for _ in range(200):
        bn(Tensor(np.full((4, 2, 6), 3.0)))
    bn.eval()
    y = bn(Tensor(np.full((1, 2, 6), 3.0))).data
    np.testing.assert_allclose(y, 0.0, atol=1e-3)


@pytest.mark.parametrize("training", [True, False])
def test_batch_norm_grad(training):
    rng = np.random.default_rng(7)
    bn = BatchNorm1d(3, dtype=np.float64)
    bn.gamma.data[:] = rng.uniform(0.5, 1.5, 3)
    bn.running_mean[:] = rng.standard_normal(3)
    bn.running_var[:] = rng.uniform(0.5, 2.0, 3)
    bn.momentum = 0.0  # keep stats fixed across finite-difference evaluations
    bn.train(training)
    x = Tensor(rng.standard_normal((4, 3, 5)), requires_grad=True)
    target = rng.standard_normal((4, 3, 5))
    errs = check_gradients(lambda: F.mse_loss(bn(x), target), [x, bn.gamma, bn.beta])
    assert max(errs) < 1e-4


def test_layer_norm_grad():
    rng = np.random.default_rng(8)
    x = Tensor(rng.standard_normal((3, 4, 6)), requires_grad=True)
    g, b = Param(rng.uniform(0.5, 1.5, 6)), _p(rng, 6)
    target = rng.standard_normal((3, 4, 6))
    errs = check_gradients(lambda: F.mse_loss(F.layer_norm(x, g, b), target), [x, g, b])
    assert max(errs) < 1e-4


def test_relu_and_pool():
    x = np.array([1.0, 2.5, 0.1])
    np.testing.assert_array_equal(F.relu(Tensor(-x)).data, 0.0)
    c = Tensor(np.arange(4.0).reshape(4, 1))
    np.testing.assert_array_equal(F.global_avg_pool(c).data, np.arange(4.0))


# -- backward contract -------------------------------------------------------

def test_sum_gives_unit_grad():
    p = Param(np.zeros((2, 3, 4)))
    backward(p.sum())
    np.testing.assert_array_equal(p.grad, 1.0)


def test_backward_accumulates():
    rng = np.random.default_rng(9)
    w = _p(rng, 3, 2)
    loss = F.linear(Tensor(rng.standard_normal((4, 3))), w).sum()
    backward(loss)
    first = w.grad.copy()
    backward(loss)
    np.testing.assert_array_equal(w.grad, 2 * first)


def test_backward_rejects_non_scalar():
    with pytest.raises(ContractError):
        backward(Param(np.zeros(3)) * 2.0)


def test_unused_param_has_zero_grad():
    a, b = Param(np.ones(2)), Param(np.ones(2))
    backward((a * 3.0).sum())
    np.testing.assert_array_equal(b.grad, 0.0)


def test_losses_grad():
    rng = np.random.default_rng(10)
    pred = Tensor(rng.standard_normal((4, 5, 3)), requires_grad=True)
    gt = rng.standard_normal((4, 5, 3))
    assert check_gradients(lambda: F.mse_loss(pred, gt), [pred])[0] < 1e-6
    p = Tensor(rng.uniform(0.1, 0.9, 6), requires_grad=True)
    y = rng.integers(0, 2, 6)
    assert check_gradients(lambda: F.bce_loss(p, y), [p])[0] < 1e-6


# -- adam ---------------------------------------------------------------------

def test_adam_zero_grad_leaves_values():
    p = Param(np.array([1.0, -2.0]))
    Adam([p], lr=1e-4).step()
    np.testing.assert_array_equal(p.data, [1.0, -2.0])
    assert p.step_count == 1


def test_adam_first_step_moves_by_lr():
    p = Param(np.array([0.0]))
    p.grad[:] = 1.0
    Adam([p], lr=1e-4).step()
    # m_hat = v_hat = 1 after bias correction -> delta = lr / (1 + eps)
    np.testing.assert_allclose(p.data, [-1e-4 / (1 + 1e-8)], rtol=1e-12)


def test_adam_nan_grad_names_parameter():
    p = Param(np.zeros(2), name="enc.w")
    p.grad[0] = np.nan
    with pytest.raises(NumericalError, match="enc.w"):
        Adam([("enc.w", p)]).step()


def test_adam_deterministic():
    def run():
        rng = np.random.default_rng(11)
        w = _p(rng, 3, 2)
        x = Tensor(rng.standard_normal((5, 3)))
        opt = Adam([w], lr=1e-2)
        for _ in range(20):
            opt.zero_grad()
            backward(F.mse_loss(F.linear(x, w), np.ones((5, 2))))
            opt.step()
        return w.data

    np.testing.assert_array_equal(run(), run())
