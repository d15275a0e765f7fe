'''
The siamese motion encoder: a style token read out before the last block,
and instance-normalized content dynamics from the last block.
'''

import logging

import numpy as np

from . import nn
from . import tensor as T
from .tensor import ShapeError

LOGGER = logging.getLogger(__name__)


class Encoder(nn.Module):
    def __init__(self, rng, tokens, hp):
        super().__init__()
        self.tokens = tokens
        self.d = hp.d
        self.max_length = hp.max_length
        self.param('style_token', nn.normal(rng, (tokens, hp.d), hp.init_std))
        self.param('pos', nn.normal(rng, (hp.max_length + 1, tokens, hp.d), hp.init_std))
        self.blocks = [self.child('block{}'.format(n),
                                  nn.TransformerBlock(rng, tokens, hp.d, hp.heads, hp.d_proj, hp.init_std))
                       for n in range(hp.blocks)]


def instance_norm(Z, mask):
    mu, sigma = T.channel_stats(Z, mask)
    return T.masked_rows((Z - mu) / sigma, mask)


def encode(X, encoder, trace=None):
    '''
    Returns (S, Y): the (K, d) style feature and the (L, K, d) content
    dynamics of a MotionEmbedding.
    '''
    L, K, d = X.X.shape
    if K != encoder.tokens or d != encoder.d:
        raise ShapeError('encode: tokens {} for an encoder of {}x{}'.format(X.X.shape, encoder.tokens, encoder.d))
    if L > encoder.max_length:
        raise ShapeError('encode: {} frames exceed the maximum length {}'.format(L, encoder.max_length))

    Z = T.concat([encoder.style_token.reshape(1, K, d), X.X], axis=0)
    E = encoder.pos[:L + 1]
    mask = np.concatenate([[True], X.mask])
    for n, block in enumerate(encoder.blocks[:-1]):
        Z = block(Z, E, mask, trace=trace, name='encoder.block{}'.format(n))

    S = Z[0]
    normed = instance_norm(Z[1:], X.mask)
    if trace is not None:
        trace['encoder.in'] = normed.data
    last = len(encoder.blocks) - 1
    Y = encoder.blocks[-1](normed, E[1:], X.mask, trace=trace, name='encoder.block{}'.format(last))
    return S, T.masked_rows(Y, X.mask)
