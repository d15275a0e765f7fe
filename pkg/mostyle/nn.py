'''
Parameter containers and the attention building blocks shared by the
encoder, generator and discriminator.
'''

import logging
import math

import numpy as np

from . import tensor as T
from .tensor import DTensor, ShapeError

LOGGER = logging.getLogger(__name__)


class Module:
    '''
    Holds named parameters and child modules, in registration order.
    '''
    def __init__(self):
        self._params = {}
        self._children = {}

    def param(self, name, value):
        t = DTensor(value, requires_grad=True)
        self._params[name] = t
        setattr(self, name, t)
        return t

    def child(self, name, module):
        self._children[name] = module
        setattr(self, name, module)
        return module

    def named_parameters(self, prefix=''):
        for name, p in self._params.items():
            yield prefix + name, p
        for name, c in self._children.items():
            yield from c.named_parameters(prefix + name + '.')

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def state_dict(self):
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state):
        for name, p in self.named_parameters():
            if name not in state:
                raise ValueError('missing parameter {}'.format(name))
            value = np.array(state[name], dtype=np.float64)
            if value.shape != p.shape:
                raise ShapeError('parameter {} has shape {}, expected {}'.format(name, value.shape, p.shape))
            p.data = value


def normal(rng, shape, std):
    return rng.normal(0.0, std, size=shape)


class Linear(Module):
    def __init__(self, rng, n_in, n_out, std=0.02, bias=True):
        super().__init__()
        self.param('W', normal(rng, (n_in, n_out), std))
        if bias:
            self.param('b', np.zeros(n_out))
        else:
            self.b = None

    def __call__(self, x):
        return T.linear(x, self.W, self.b)


class LayerNorm(Module):
    def __init__(self, d):
        super().__init__()
        self.param('gain', np.ones(d))
        self.param('bias', np.zeros(d))

    def __call__(self, x):
        return T.layer_norm(x, self.gain, self.bias)


class MLP(Module):
    def __init__(self, rng, d, hidden, std=0.02):
        super().__init__()
        self.child('fc1', Linear(rng, d, hidden, std))
        self.child('fc2', Linear(rng, hidden, d, std))

    def __call__(self, x):
        return self.fc2(T.gelu(self.fc1(x)))


class MultiHeadAttention(Module):
    '''
    softmax(Q K^T * scale) V per head over inputs shaped (B, n, d_model);
    heads are concatenated and projected back to d_model. No biases.
    '''
    def __init__(self, rng, d_model, heads, head_dim, std=0.02, scale=None):
        super().__init__()
        self.heads = heads
        self.head_dim = head_dim
        self.scale = scale if scale is not None else 1.0 / math.sqrt(head_dim)
        width = heads * head_dim
        self.param('Wq', normal(rng, (d_model, width), std))
        self.param('Wk', normal(rng, (d_model, width), std))
        self.param('Wv', normal(rng, (d_model, width), std))
        self.param('Wo', normal(rng, (width, d_model), std))

    def _split(self, x, W):
        b, n = x.shape[0], x.shape[1]
        y = T.linear(x, W).reshape(b, n, self.heads, self.head_dim)
        return y.transpose(0, 2, 1, 3)

    def __call__(self, q_in, k_in=None, v_in=None, key_mask=None):
        '''
        Returns (output, attention) with attention a (B, h, n, m) ndarray.
        key_mask is a boolean (m,) array; False keys get zero weight.
        '''
        k_in = q_in if k_in is None else k_in
        v_in = k_in if v_in is None else v_in
        if q_in.ndim != 3 or k_in.ndim != 3 or v_in.ndim != 3:
            raise ShapeError('attention inputs must be (B, n, d): {} {} {}'.format(
                q_in.shape, k_in.shape, v_in.shape))
        q = self._split(q_in, self.Wq)
        k = self._split(k_in, self.Wk)
        v = self._split(v_in, self.Wv)
        scores = T.matmul(q, T.swap_last(k)) * self.scale
        attn = T.softmax_lastdim(scores, key_mask)
        out = T.matmul(attn, v).transpose(0, 2, 1, 3)
        b, n = out.shape[0], out.shape[1]
        out = out.reshape(b, n, self.heads * self.head_dim)
        return T.linear(out, self.Wo), attn.data


class TransformerBlock(Module):
    '''
    Part attention across the K tokens of each frame, then temporal
    attention across frames with each frame flattened to K*d.
    '''
    def __init__(self, rng, tokens, d, heads, head_dim, std=0.02):
        super().__init__()
        self.tokens = tokens
        self.d = d
        self.child('part_ln', LayerNorm(d))
        self.child('part_mha', MultiHeadAttention(rng, d, heads, head_dim, std))
        self.child('temporal_ln', LayerNorm(tokens * d))
        self.child('temporal_mha', MultiHeadAttention(rng, tokens * d, heads, tokens * head_dim, std))

    def __call__(self, Z, E, mask, trace=None, name='block'):
        Zbar, part_attn = part_attention(Z, E, self)
        out, temporal_attn = temporal_attention(Zbar, E, mask, self)
        if trace is not None:
            trace[name + '.part'] = part_attn
            trace[name + '.temporal'] = temporal_attn
        return out


def part_attention(Z, E, block):
    '''
    Zbar_t = MHA(LN(Z_t + E_t)) + (Z_t + E_t) for every frame t of a
    (L, K, d) tensor.
    '''
    if Z.shape != E.shape:
        raise ShapeError('part_attention: features {} and positions {}'.format(Z.shape, E.shape))
    u = Z + E
    out, attn = block.part_mha(block.part_ln(u))
    return out + u, attn


def temporal_attention(Zbar, E, mask, block):
    '''
    Z = MHA(LN(Zbar + E)) + (Zbar + E) over the frames of a (L, K, d)
    tensor, each frame flattened to K*d. Masked frames are excluded as keys.
    '''
    if Zbar.shape != E.shape:
        raise ShapeError('temporal_attention: features {} and positions {}'.format(Zbar.shape, E.shape))
    L, K, d = Zbar.shape
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (L,):
        raise ShapeError('temporal_attention: mask {} for {} frames'.format(mask.shape, L))
    if not mask.any():
        raise ValueError('temporal attention over a fully masked sequence')
    u = (Zbar + E).reshape(1, L, K * d)
    out, attn = block.temporal_mha(block.temporal_ln(u), key_mask=mask)
    return (out + u).reshape(L, K, d), attn
