import numpy as np
import pytest

import mostyle.nn as nn
import mostyle.tensor as T
from mostyle.gradcheck import check_gradients
from mostyle.tensor import DTensor, ShapeError


def rand(shape, seed=0, scale=1.0):
    return DTensor(np.random.default_rng(seed).normal(0, scale, size=shape))


def test_linear_and_parameters():
    rng = np.random.default_rng(0)
    fc = nn.Linear(rng, 4, 3)
    assert fc.W.shape == (4, 3) and np.all(fc.b.data == 0.0)
    assert fc(rand((2, 4))).shape == (2, 3)
    assert nn.Linear(rng, 4, 3, bias=False).b is None

    mlp = nn.MLP(rng, 4, 8)
    names = [name for name, _ in mlp.named_parameters()]
    assert names == ['fc1.W', 'fc1.b', 'fc2.W', 'fc2.b']


def test_state_dict_roundtrip():
    a = nn.MLP(np.random.default_rng(0), 4, 8)
    b = nn.MLP(np.random.default_rng(1), 4, 8)
    b.load_state_dict(a.state_dict())
    x = rand((3, 4))
    assert np.array_equal(a(x).data, b(x).data)

    state = a.state_dict()
    del state['fc2.b']
    with pytest.raises(ValueError):
        b.load_state_dict(state)
    state = a.state_dict()
    state['fc1.W'] = np.zeros((8, 4))
    with pytest.raises(ShapeError):
        b.load_state_dict(state)


def test_zero_grad():
    fc = nn.Linear(np.random.default_rng(0), 4, 3)
    T.backward(fc(rand((2, 4))).sum())
    assert fc.W.grad is not None
    fc.zero_grad()
    assert fc.W.grad is None and fc.b.grad is None


def test_attention_weights():
    mha = nn.MultiHeadAttention(np.random.default_rng(0), 8, 2, 4, std=0.5)
    x = rand((1, 5, 8))
    out, attn = mha(x)
    assert out.shape == (1, 5, 8)
    assert attn.shape == (1, 2, 5, 5)
    assert np.allclose(attn.sum(axis=-1), 1.0)

    mask = np.array([True, True, False, True, False])
    _, attn = mha(x, key_mask=mask)
    assert np.all(attn[..., ~mask] == 0.0)

    with pytest.raises(ShapeError):
        mha(rand((5, 8)))


def test_cross_attention_shapes():
    mha = nn.MultiHeadAttention(np.random.default_rng(0), 8, 2, 4)
    out, attn = mha(rand((1, 3, 8)), rand((1, 6, 8), seed=1), rand((1, 6, 8), seed=2))
    assert out.shape == (1, 3, 8)
    assert attn.shape == (1, 2, 3, 6)


def test_attention_gradients():
    mha = nn.MultiHeadAttention(np.random.default_rng(0), 6, 2, 3, std=0.5)
    x = DTensor(np.random.default_rng(1).normal(size=(1, 4, 6)), requires_grad=True)
    w = rand((1, 4, 6), seed=2)
    params = [x, mha.Wq, mha.Wk, mha.Wv, mha.Wo]
    assert check_gradients(lambda: (mha(x)[0] * w).sum(), params) < 1e-5


def test_transformer_block_trace():
    rng = np.random.default_rng(0)
    block = nn.TransformerBlock(rng, 3, 8, 2, 4)
    Z = rand((6, 3, 8))
    E = rand((6, 3, 8), seed=1, scale=0.1)
    mask = np.array([True] * 4 + [False] * 2)
    trace = {}
    out = block(Z, E, mask, trace=trace, name='enc0')
    assert out.shape == (6, 3, 8)
    assert trace['enc0.part'].shape == (6, 2, 3, 3)
    assert trace['enc0.temporal'].shape == (1, 2, 6, 6)
    assert np.all(trace['enc0.temporal'][..., 4:] == 0.0)


def test_padding_does_not_leak():
    '''
    Valid frames come out the same whatever the padded frames hold.
    '''
    block = nn.TransformerBlock(np.random.default_rng(0), 3, 8, 2, 4, std=0.3)
    Z = rand((6, 3, 8))
    E = rand((6, 3, 8), seed=1)
    mask = np.array([True] * 4 + [False] * 2)
    noisy = Z.data.copy()
    noisy[4:] = 100.0
    a = block(Z, E, mask)
    b = block(DTensor(noisy), E, mask)
    assert np.allclose(a.data[:4], b.data[:4])


def test_block_errors():
    block = nn.TransformerBlock(np.random.default_rng(0), 3, 8, 2, 4)
    Z = rand((6, 3, 8))
    with pytest.raises(ShapeError):
        nn.part_attention(Z, rand((5, 3, 8)), block)
    with pytest.raises(ShapeError):
        nn.temporal_attention(Z, Z, np.ones(5, dtype=bool), block)
    with pytest.raises(ValueError):
        nn.temporal_attention(Z, Z, np.zeros(6, dtype=bool), block)
