'''
Part-attentive style modulation: content codes of both motions decide
how the style feature is routed between body parts.
'''

import logging
import math

import numpy as np

from . import nn
from . import tensor as T
from .tensor import ShapeError

LOGGER = logging.getLogger(__name__)


class StyleModulator(nn.Module):
    def __init__(self, rng, tokens, hp):
        super().__init__()
        self.tokens = tokens
        self.d = hp.d
        self.param('pos', nn.normal(rng, (tokens, hp.d), hp.init_std))
        self.child('ln_q', nn.LayerNorm(hp.d))
        self.child('ln_k', nn.LayerNorm(hp.d))
        self.child('ln_v', nn.LayerNorm(hp.d))
        # softmax temperature is sqrt(d), not sqrt of the head width
        self.child('cross', nn.MultiHeadAttention(rng, hp.d, hp.heads, hp.d_proj, hp.init_std,
                                                  scale=1.0 / math.sqrt(hp.d)))
        self.child('fc', nn.Linear(rng, hp.d, hp.d, hp.init_std))
        self.child('ln_mlp', nn.LayerNorm(hp.d))
        self.child('mlp', nn.MLP(rng, hp.d, hp.mlp_hidden, hp.init_std))


def temporal_pool(Y, mask):
    '''
    Mean over the unmasked frames of (L, K, d) -> (K, d).
    '''
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError('temporal_pool over an empty mask')
    return T.valid_rows(Y, mask).mean(axis=0)


def cross_attention(C_C, C_S, S_S, psm):
    '''
    Queries from the content motion's code, keys from the style motion's
    code, values from the style feature. Returns ((K, d), (h, K, K) maps).
    '''
    K, d = psm.tokens, psm.d
    for name, x in (('content code', C_C), ('style code', C_S), ('style feature', S_S)):
        if x.shape != (K, d):
            raise ShapeError('cross_attention: {} is {}, expected {}'.format(name, x.shape, (K, d)))
    q = psm.ln_q(C_C + psm.pos).reshape(1, K, d)
    k = psm.ln_k(C_S + psm.pos).reshape(1, K, d)
    v = psm.ln_v(S_S + psm.pos).reshape(1, K, d)
    out, attn = psm.cross(q, k, v)
    return out.reshape(K, d), attn[0]


def modulate(S_S, C_C, C_S, psm, trace=None):
    checked = psm.fc(S_S)
    mixed, attn = cross_attention(C_C, C_S, S_S, psm)
    checked = checked + mixed
    if trace is not None:
        trace['psm'] = attn
    return checked + psm.mlp(psm.ln_mlp(checked))
