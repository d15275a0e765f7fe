'''
Adam with bias correction.
'''

import logging

import numpy as np

from .tensor import ShapeError

LOGGER = logging.getLogger(__name__)


class AdamState:
    def __init__(self, shapes, beta1=0.9, beta2=0.999, eps=1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step = 0
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]


def adam_step(params, grads, state, lr):
    if lr <= 0:
        raise ValueError('learning rate must be positive, got {}'.format(lr))
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ShapeError('adam_step: {} params, {} grads, {} moment buffers'.format(
            len(params), len(grads), len(state.m)))

    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step
    for i, (p, g) in enumerate(zip(params, grads)):
        if g is None:
            g = np.zeros_like(p.data)
        if g.shape != p.shape or state.m[i].shape != p.shape:
            raise ShapeError('adam_step: param {} with grad {} and moments {}'.format(
                p.shape, g.shape, state.m[i].shape))
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g
        mhat = state.m[i] / c1
        vhat = state.v[i] / c2
        p.data = p.data - lr * mhat / (np.sqrt(vhat) + state.eps)


class Adam:
    '''
    Binds an AdamState to a named parameter list.
    '''
    def __init__(self, named_params, lr):
        self.names = []
        self.params = []
        for name, p in named_params:
            self.names.append(name)
            self.params.append(p)
        self.lr = lr
        self.state = AdamState([p.shape for p in self.params])

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        adam_step(self.params, [p.grad for p in self.params], self.state, self.lr)

    def state_dict(self):
        tensors = {}
        for name, m, v in zip(self.names, self.state.m, self.state.v):
            tensors['m.' + name] = m
            tensors['v.' + name] = v
        return self.state.step, tensors

    def load_state_dict(self, step, tensors):
        for i, name in enumerate(self.names):
            for kind, buffers in (('m', self.state.m), ('v', self.state.v)):
                key = kind + '.' + name
                if key not in tensors:
                    raise ValueError('optimizer state is missing {}'.format(key))
                value = np.array(tensors[key], dtype=np.float64)
                if value.shape != self.params[i].shape:
                    raise ShapeError('optimizer state {} has shape {}, expected {}'.format(
                        key, value.shape, self.params[i].shape))
                buffers[i] = value
        self.state.step = int(step)
