import numpy as np
import pytest

import mostyle.tensor as T
from mostyle.optim import Adam, AdamState, adam_step
from mostyle.tensor import DTensor, ShapeError


def test_first_step_moves_by_lr():
    p = DTensor(np.array([1.0, -2.0, 3.0]), requires_grad=True)
    p.grad = np.array([0.5, -4.0, 0.0])
    state = AdamState([p.shape])
    adam_step([p], [p.grad], state, 0.1)
    # bias correction makes the first step lr * sign(g)
    assert np.allclose(p.data, [0.9, -1.9, 3.0], atol=1e-6)
    assert state.step == 1


def test_missing_grad_is_zero():
    p = DTensor(np.ones(2), requires_grad=True)
    state = AdamState([p.shape])
    adam_step([p], [None], state, 0.1)
    assert np.array_equal(p.data, np.ones(2))


def test_bad_inputs():
    p = DTensor(np.ones(2), requires_grad=True)
    state = AdamState([p.shape])
    with pytest.raises(ValueError):
        adam_step([p], [np.ones(2)], state, 0.0)
    with pytest.raises(ShapeError):
        adam_step([p], [np.ones(3)], state, 0.1)
    with pytest.raises(ShapeError):
        adam_step([p, p], [np.ones(2)], state, 0.1)


def test_minimizes_quadratic():
    p = DTensor(np.array([3.0, -2.0]), requires_grad=True)
    adam = Adam([('p', p)], 0.05)
    for _ in range(500):
        adam.zero_grad()
        T.backward(((p - 1.0) ** 2.0).sum())
        adam.step()
    assert np.allclose(p.data, 1.0, atol=5e-2)


def test_state_dict_roundtrip():
    p = DTensor(np.array([3.0, -2.0]), requires_grad=True)
    adam = Adam([('p', p)], 0.05)
    p.grad = np.array([1.0, 1.0])
    adam.step()
    step, tensors = adam.state_dict()
    assert step == 1
    assert set(tensors) == {'m.p', 'v.p'}

    other = Adam([('p', DTensor(np.zeros(2), requires_grad=True))], 0.05)
    other.load_state_dict(step, tensors)
    assert other.state.step == 1
    assert np.array_equal(other.state.m[0], adam.state.m[0])
    with pytest.raises(ValueError):
        other.load_state_dict(step, {'m.p': tensors['m.p']})
