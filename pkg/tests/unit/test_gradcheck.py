import numpy as np

import mostyle.tensor as T
from mostyle.gradcheck import check_gradients, numerical_gradient, relative_error
from mostyle.tensor import DTensor


def test_relative_error():
    assert relative_error(np.zeros(3), np.zeros(3)) == 0.0
    assert relative_error(np.ones(3), np.ones(3)) == 0.0
    assert relative_error(np.ones(3), -np.ones(3)) == 1.0


def test_numerical_gradient():
    a = DTensor(np.array([1.0, 2.0, 3.0]), requires_grad=True)
    g = numerical_gradient(lambda: (a * a).sum(), a)
    assert np.allclose(g, 2.0 * a.data, atol=1e-6)
    # the tensor is left as it was
    assert np.array_equal(a.data, [1.0, 2.0, 3.0])


def test_sampled_coordinates():
    a = DTensor(np.arange(12.0).reshape(3, 4) / 10.0, requires_grad=True)
    assert check_gradients(lambda: T.exp(a).sum(), [a], samples=5) < 1e-6


def test_catches_a_wrong_gradient():
    a = DTensor(np.array([0.5, -1.0, 2.0]), requires_grad=True)

    def doubled_square(x):
        # forward is x^2, backward claims 4x
        return T._make(x.data ** 2, (x,), lambda g: (g * 4.0 * x.data,))

    assert check_gradients(lambda: doubled_square(a).sum(), [a]) > 0.1
