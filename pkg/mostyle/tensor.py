'''
A small reverse-mode autodiff core over float64 numpy arrays.

Ops record themselves on a per-thread Tape in creation order, so the
node index is a topological order and backward() just walks it in
reverse. backward() consumes the graph it walks and nothing else: two
losses built from disjoint graphs can be backpropagated one after the
other, while a node already walked cannot be reused.
'''

import logging
import threading
from contextlib import contextmanager

import numpy as np
from scipy.special import expit

LOGGER = logging.getLogger(__name__)

EPS = 1e-5

_local = threading.local()


class ShapeError(ValueError):
    pass


class TapeError(RuntimeError):
    pass


class Tape:
    def __init__(self):
        self.count = 0

    def record(self, node):
        node.index = self.count
        self.count += 1


def current_tape():
    tape = getattr(_local, 'tape', None)
    if tape is None:
        tape = Tape()
        _local.tape = tape
    return tape


def grad_enabled():
    return getattr(_local, 'grad_enabled', True)


@contextmanager
def no_grad():
    previous = grad_enabled()
    _local.grad_enabled = False
    try:
        yield
    finally:
        _local.grad_enabled = previous


class DTensor:
    '''
    Dense float64 array, optionally participating in the gradient tape.
    '''
    __array_priority__ = 1000

    def __init__(self, data, requires_grad=False, copy=True):
        if copy:
            self.data = np.array(data, dtype=np.float64)
        else:
            self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self.index = -1
        self._consumed = False
        self._parents = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def numpy(self):
        return self.data

    def item(self):
        if self.data.size != 1:
            raise ShapeError('item() needs a single element, shape is {}'.format(self.shape))
        return float(self.data.reshape(()))

    def zero_grad(self):
        self.grad = None

    def backward(self):
        backward(self)

    def __repr__(self):
        return 'DTensor(shape={}, requires_grad={})'.format(self.shape, self.requires_grad)

    def __len__(self):
        return self.data.shape[0]

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return getitem(self, idx)

    def __pow__(self, p):
        return power(self, p)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return transpose(self, axes or None)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis=axis, keepdims=keepdims)


def as_tensor(x):
    if isinstance(x, DTensor):
        return x
    return DTensor(x)


def detach(x):
    return DTensor(x.data, copy=False)


def _make(data, parents, backward_fn):
    out = DTensor(data, copy=False)
    if not grad_enabled():
        return out
    if not any(p.requires_grad for p in parents):
        return out
    if any(p._consumed for p in parents):
        raise TapeError('input belongs to a graph already consumed by backward()')
    out.requires_grad = True
    out._parents = tuple(parents)
    out._backward = backward_fn
    current_tape().record(out)
    return out


def backward(loss):
    '''
    Accumulate d(loss)/d(leaf) into .grad of every reachable leaf
    that requires grad. Sum semantics; callers zero grads.
    '''
    if loss.data.size != 1:
        raise ShapeError('backward() needs a scalar loss, shape is {}'.format(loss.shape))
    if not loss.requires_grad:
        raise TapeError('loss does not depend on anything that requires grad')

    nodes = []
    seen = set()
    stack = [loss]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if node._consumed:
            raise TapeError('backward() already ran through this graph; re-run the forward pass')
        nodes.append(node)
        stack.extend(p for p in node._parents if p.requires_grad)
    # leaves carry index -1 and land last
    nodes.sort(key=lambda n: n.index, reverse=True)

    grads = {id(loss): np.ones_like(loss.data)}
    for node in nodes:
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node._backward is None:
            g = np.array(g, dtype=np.float64)
            node.grad = g if node.grad is None else node.grad + g
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if pg is None or not parent.requires_grad:
                continue
            key = id(parent)
            grads[key] = pg if key not in grads else grads[key] + pg

    for node in nodes:
        if node._backward is not None:
            node._consumed = True


def _conform(a, b, opname):
    sa, sb = a.shape, b.shape
    if sa == sb:
        return
    if len(sb) <= len(sa) and sa[len(sa) - len(sb):] == sb:
        return
    if len(sa) <= len(sb) and sb[len(sb) - len(sa):] == sa:
        return
    raise ShapeError('{}: shapes {} and {} do not conform'.format(opname, sa, sb))


def _unbroadcast(g, shape):
    if g.shape == shape:
        return g
    lead = g.ndim - len(shape)
    return g.sum(axis=tuple(range(lead)))


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _conform(a, b, 'add')

    def _backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)
    return _make(a.data + b.data, (a, b), _backward)


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _conform(a, b, 'sub')

    def _backward(g):
        return _unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)
    return _make(a.data - b.data, (a, b), _backward)


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _conform(a, b, 'mul')

    def _backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)
    return _make(a.data * b.data, (a, b), _backward)


def div(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _conform(a, b, 'div')
    out = a.data / b.data

    def _backward(g):
        return _unbroadcast(g / b.data, a.shape), _unbroadcast(-g * out / b.data, b.shape)
    return _make(out, (a, b), _backward)


def neg(a):
    return _make(-a.data, (a,), lambda g: (-g,))


def power(a, p):
    p = float(p)

    def _backward(g):
        return (g * p * a.data ** (p - 1.0),)
    return _make(a.data ** p, (a,), _backward)


def matmul(a, b):
    '''
    (m,k)@(k,n), batched (...,m,k)@(...,k,n) with identical batch
    extents, or (...,m,k)@(k,n) with a shared right operand.
    '''
    a, b = as_tensor(a), as_tensor(b)
    ok = a.ndim >= 2 and b.ndim >= 2 and a.shape[-1] == b.shape[-2]
    shared = b.ndim == 2
    if ok and not shared:
        ok = a.shape[:-2] == b.shape[:-2]
    if not ok:
        raise ShapeError('matmul: shapes {} and {} do not conform'.format(a.shape, b.shape))

    def _backward(g):
        ga = g @ np.swapaxes(b.data, -1, -2)
        if shared:
            gb = a.data.reshape(-1, a.shape[-1]).T @ g.reshape(-1, g.shape[-1])
        else:
            gb = np.swapaxes(a.data, -1, -2) @ g
        return ga, gb
    return _make(a.data @ b.data, (a, b), _backward)


def transpose(a, axes=None):
    if axes is None:
        axes = tuple(reversed(range(a.ndim)))
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))
    return _make(np.transpose(a.data, axes), (a,), lambda g: (np.transpose(g, inverse),))


def swap_last(a):
    axes = list(range(a.ndim))
    axes[-1], axes[-2] = axes[-2], axes[-1]
    return transpose(a, axes)


def reshape(a, shape):
    try:
        out = a.data.reshape(shape)
    except ValueError:
        raise ShapeError('reshape: cannot view {} as {}'.format(a.shape, shape))
    return _make(out, (a,), lambda g: (g.reshape(a.shape),))


def getitem(a, idx):
    def _backward(g):
        z = np.zeros_like(a.data)
        np.add.at(z, idx, g)
        return (z,)
    return _make(np.array(a.data[idx]), (a,), _backward)


def take(a, indices, axis=0):
    indices = np.asarray(indices, dtype=np.intp)

    def _backward(g):
        z = np.zeros_like(a.data)
        np.add.at(np.moveaxis(z, axis, 0), indices, np.moveaxis(g, axis, 0))
        return (z,)
    return _make(np.take(a.data, indices, axis=axis), (a,), _backward)


def concat(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        raise ShapeError('concat: shapes {} do not conform'.format([t.shape for t in tensors]))
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def _backward(g):
        return tuple(np.split(g, bounds, axis=axis))
    return _make(out, tensors, _backward)


def stack(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    try:
        out = np.stack([t.data for t in tensors], axis=axis)
    except ValueError:
        raise ShapeError('stack: shapes {} do not conform'.format([t.shape for t in tensors]))

    def _backward(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))
    return _make(out, tensors, _backward)


def tsum(a, axis=None, keepdims=False):
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def _backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape),)
    return _make(out, (a,), _backward)


def mean(a, axis=None, keepdims=False):
    if axis is None:
        count = a.data.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        count = int(np.prod([a.shape[x] for x in axes]))
    return tsum(a, axis=axis, keepdims=keepdims) * (1.0 / count)


def exp(a):
    out = np.exp(a.data)
    return _make(out, (a,), lambda g: (g * out,))


def log(a):
    return _make(np.log(a.data), (a,), lambda g: (g / a.data,))


def sqrt(a):
    out = np.sqrt(a.data)
    return _make(out, (a,), lambda g: (g * 0.5 / out,))


def tanh(a):
    out = np.tanh(a.data)
    return _make(out, (a,), lambda g: (g * (1.0 - out * out),))


def sigmoid(a):
    out = expit(a.data)
    return _make(out, (a,), lambda g: (g * out * (1.0 - out),))


_GELU_C = np.sqrt(2.0 / np.pi)


def gelu(a):
    '''
    tanh approximation
    '''
    x = a.data
    t = np.tanh(_GELU_C * (x + 0.044715 * x ** 3))
    out = 0.5 * x * (1.0 + t)

    def _backward(g):
        dt = (1.0 - t * t) * _GELU_C * (1.0 + 3 * 0.044715 * x * x)
        return (g * (0.5 * (1.0 + t) + 0.5 * x * dt),)
    return _make(out, (a,), _backward)


def clip(a, lo, hi):
    inside = (a.data >= lo) & (a.data <= hi)
    return _make(np.clip(a.data, lo, hi), (a,), lambda g: (g * inside,))


def norm_lastdim(a):
    '''
    Euclidean norm over the last axis. Zero vectors get a zero gradient.
    '''
    out = np.sqrt((a.data * a.data).sum(axis=-1))

    def _backward(g):
        safe = np.where(out > 0, out, 1.0)
        scale = np.where(out > 0, g / safe, 0.0)
        return (a.data * scale[..., None],)
    return _make(out, (a,), _backward)


def softmax_lastdim(a, mask=None):
    '''
    Softmax over the last axis with max-subtraction. mask is a boolean
    array broadcastable to a; False entries get probability 0.
    '''
    x = a.data
    if mask is not None:
        mask = np.broadcast_to(np.asarray(mask, dtype=bool), x.shape)
        if not mask.any(axis=-1).all():
            raise ValueError('softmax over a fully masked row')
        x = np.where(mask, x, -np.inf)
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=-1, keepdims=True)

    def _backward(g):
        return (out * (g - (g * out).sum(axis=-1, keepdims=True)),)
    return _make(out, (a,), _backward)


def layer_norm(x, gain, bias, eps=EPS):
    '''
    Normalize over the last axis, then scale and shift.
    '''
    d = x.shape[-1]
    if d < 2:
        raise ShapeError('layer_norm needs at least 2 features, shape is {}'.format(x.shape))
    if gain.shape != (d,) or bias.shape != (d,):
        raise ShapeError('layer_norm: input {} with gain {} and bias {}'.format(x.shape, gain.shape, bias.shape))
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    inv = 1.0 / np.sqrt((centered * centered).mean(axis=-1, keepdims=True) + eps)
    xhat = centered * inv
    out = xhat * gain.data + bias.data

    def _backward(g):
        dxhat = g * gain.data
        dx = inv * (dxhat - dxhat.mean(axis=-1, keepdims=True)
                    - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True))
        lead = tuple(range(g.ndim - 1))
        return dx, (g * xhat).sum(axis=lead), g.sum(axis=lead)
    return _make(out, (x, gain, bias), _backward)


def masked_rows(x, mask):
    '''
    Zero the rows along axis 0 where mask is False.
    '''
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != x.shape[:1]:
        raise ShapeError('masked_rows: mask {} does not match {}'.format(mask.shape, x.shape))
    m = mask.astype(np.float64).reshape((-1,) + (1,) * (x.ndim - 1))
    return _make(x.data * m, (x,), lambda g: (g * m,))


def valid_rows(x, mask):
    if mask is None:
        return x
    idx = np.flatnonzero(np.asarray(mask, dtype=bool))
    if len(idx) == len(mask):
        return x
    return take(x, idx, axis=0)


def channel_stats(x, mask=None, eps=EPS):
    '''
    Channel-wise mean and standard deviation of a (L, K, d) tensor over
    the valid rows and every token. sigma = sqrt(var + eps).
    '''
    rows = valid_rows(x, mask)
    d = x.shape[-1]
    flat = rows.reshape(-1, d)
    if flat.shape[0] < 2:
        raise ShapeError('channel_stats needs at least 2 positions, got {}'.format(flat.shape[0]))
    mu = mean(flat, axis=0)
    centered = flat - mu
    var = mean(centered * centered, axis=0)
    return mu, sqrt(var + eps)


def linear(x, W, b=None):
    x = as_tensor(x)
    if W.ndim != 2 or x.shape[-1] != W.shape[0]:
        raise ShapeError('linear: input {} and weight {} do not conform'.format(x.shape, W.shape))
    lead = x.shape[:-1]
    out = matmul(x.reshape(-1, W.shape[0]), W)
    if b is not None:
        out = out + b
    return out.reshape(lead + (W.shape[1],))
