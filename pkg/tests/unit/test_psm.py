import numpy as np
import pytest

from mostyle.embedding import HyperParams
from mostyle.gradcheck import check_gradients
from mostyle.psm import StyleModulator, cross_attention, modulate, temporal_pool
from mostyle.tensor import DTensor, ShapeError

HP = HyperParams(d=8, d_proj=4, heads=2, blocks=2, max_length=12, mlp_hidden=16, init_std=0.3)


def feature(seed, shape=(6, 8)):
    return DTensor(np.random.default_rng(seed).normal(size=shape), requires_grad=True)


def test_temporal_pool():
    Y = np.random.default_rng(0).normal(size=(5, 6, 8))
    mask = np.array([True, True, True, False, False])
    assert np.allclose(temporal_pool(DTensor(Y), mask).data, Y[:3].mean(axis=0))
    with pytest.raises(ValueError):
        temporal_pool(DTensor(Y), np.zeros(5, dtype=bool))


def test_cross_attention_maps():
    psm = StyleModulator(np.random.default_rng(0), 6, HP)
    out, attn = cross_attention(feature(1), feature(2), feature(3), psm)
    assert out.shape == (6, 8)
    assert attn.shape == (2, 6, 6)
    assert np.allclose(attn.sum(axis=-1), 1.0)


def test_routing_follows_codes_not_style():
    '''
    Keys come from the style motion's content code, values from its style
    feature: a new style feature changes the output but not the routing.
    '''
    psm = StyleModulator(np.random.default_rng(0), 6, HP)
    C_C, C_S = feature(1), feature(2)
    out1, attn1 = cross_attention(C_C, C_S, feature(3), psm)
    out2, attn2 = cross_attention(C_C, C_S, feature(4), psm)
    assert np.allclose(attn1, attn2)
    assert not np.allclose(out1.data, out2.data)
    _, attn3 = cross_attention(C_C, feature(5), feature(3), psm)
    assert not np.allclose(attn1, attn3)


def test_modulate():
    psm = StyleModulator(np.random.default_rng(0), 6, HP)
    trace = {}
    out = modulate(feature(3), feature(1), feature(2), psm, trace=trace)
    assert out.shape == (6, 8)
    assert trace['psm'].shape == (2, 6, 6)


def test_shape_errors():
    psm = StyleModulator(np.random.default_rng(0), 6, HP)
    with pytest.raises(ShapeError):
        cross_attention(feature(1, (5, 8)), feature(2), feature(3), psm)
    with pytest.raises(ShapeError):
        modulate(feature(3, (6, 4)), feature(1), feature(2), psm)


def test_gradients():
    psm = StyleModulator(np.random.default_rng(0), 6, HP)
    S, C_C, C_S = feature(3), feature(1), feature(2)
    w = DTensor(np.random.default_rng(9).normal(size=(6, 8)))
    params = [S, C_C, C_S, psm.pos, psm.cross.Wk, psm.fc.W, psm.mlp.fc1.W]
    assert check_gradients(lambda: (modulate(S, C_C, C_S, psm) * w).sum(), params, samples=8) < 1e-5
