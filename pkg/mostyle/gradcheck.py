'''
Central-difference gradient checks.
'''

import numpy as np

from . import tensor as T


def numerical_gradient(fn, t, h=1e-5, indices=None):
    '''
    fn() rebuilds the graph and returns a scalar DTensor. Only the
    flat positions in indices are perturbed; others stay 0.
    '''
    grad = np.zeros(t.data.size)
    if indices is None:
        indices = range(t.data.size)
    t.data = np.ascontiguousarray(t.data)
    flat = t.data.reshape(-1)
    with T.no_grad():
        for i in indices:
            orig = flat[i]
            flat[i] = orig + h
            fp = fn().item()
            flat[i] = orig - h
            fm = fn().item()
            flat[i] = orig
            grad[i] = (fp - fm) / (2 * h)
    return grad.reshape(t.shape)


def analytic_gradients(fn, tensors):
    for t in tensors:
        t.grad = None
    T.backward(fn())
    return [np.zeros_like(t.data) if t.grad is None else t.grad.copy() for t in tensors]


def relative_error(analytic, numeric):
    num = np.linalg.norm(analytic - numeric)
    den = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if den == 0.0:
        return 0.0
    return num / den


def check_gradients(fn, tensors, h=1e-5, samples=None, rng=None):
    '''
    Worst relative error over tensors, comparing the analytic gradient to
    central differences on up to `samples` coordinates per tensor.
    '''
    if rng is None:
        rng = np.random.default_rng(0)
    analytic = analytic_gradients(fn, tensors)
    worst = 0.0
    for t, a in zip(tensors, analytic):
        if samples is None or samples >= t.data.size:
            idx = np.arange(t.data.size)
        else:
            idx = np.sort(rng.choice(t.data.size, size=samples, replace=False))
        n = numerical_gradient(fn, t, h=h, indices=idx)
        worst = max(worst, relative_error(a.reshape(-1)[idx], n.reshape(-1)[idx]))
    return worst
