'''
The motion generator: content dynamics restyled by AdaIN in every block,
decoded by per-part, root and velocity heads.
'''

import logging

import numpy as np

from . import nn
from . import tensor as T
from .motion import MotionTensors
from .tensor import ShapeError

LOGGER = logging.getLogger(__name__)


class Generator(nn.Module):
    def __init__(self, rng, grouping, hp):
        super().__init__()
        tokens = len(grouping) + 1
        self.tokens = tokens
        self.d = hp.d
        self.grouping = grouping
        self.param('pos', nn.normal(rng, (hp.max_length, tokens, hp.d), hp.init_std))
        self.blocks = []
        self.gammas = []
        self.betas = []
        for n in range(hp.blocks):
            self.blocks.append(self.child('block{}'.format(n),
                                          nn.TransformerBlock(rng, tokens, hp.d, hp.heads, hp.d_proj, hp.init_std)))
            gamma = self.child('gamma{}'.format(n), nn.Linear(rng, tokens * hp.d, hp.d, hp.init_std))
            gamma.b.data[:] = 1.0  # start as plain instance norm
            self.gammas.append(gamma)
            self.betas.append(self.child('beta{}'.format(n), nn.Linear(rng, tokens * hp.d, hp.d, hp.init_std)))
        self.heads = [self.child('head{}'.format(i), nn.Linear(rng, hp.d, w, hp.init_std))
                      for i, w in enumerate(grouping.widths)]
        self.child('root_head', nn.Linear(rng, hp.d, 7, hp.init_std))
        self.child('vel_head', nn.Linear(rng, hp.d, 4, hp.init_std))


def adain(U, style, gamma_fc, beta_fc, mask):
    '''
    gamma * (U - mu) / sigma + beta, channel statistics over the unmasked
    frames, gamma and beta projected from the flattened style.
    '''
    d = U.shape[-1]
    flat = style.reshape(1, style.size)
    gamma = gamma_fc(flat).reshape(d)
    beta = beta_fc(flat).reshape(d)
    mu, sigma = T.channel_stats(U, mask)
    return T.masked_rows((U - mu) / sigma * gamma + beta, mask)


def generate(Y, mask, style, generator, trace=None, labels=None):
    '''
    Decode (L, K, d) content dynamics under a (K, d) style into motion
    tensors with the content's mask. Padding frames are decoded too.
    '''
    L, K, d = Y.shape
    if K != generator.tokens or d != generator.d:
        raise ShapeError('generate: content {} for a generator of {}x{}'.format(Y.shape, generator.tokens, d))
    if style.shape != (K, d):
        raise ShapeError('generate: style {} should be {}'.format(style.shape, (K, d)))
    if L > generator.pos.shape[0]:
        raise ShapeError('generate: {} frames exceed the maximum length {}'.format(L, generator.pos.shape[0]))

    E = generator.pos[:L]
    U = Y
    for n, block in enumerate(generator.blocks):
        U = adain(U, style, generator.gammas[n], generator.betas[n], mask)
        U = block(U, E, mask, trace=trace, name='generator.block{}'.format(n))

    grouping = generator.grouping
    decoded = []
    for i, (head, idx) in enumerate(zip(generator.heads, grouping.parts)):
        decoded.append(head(U[:, i]).reshape(L, len(idx), 7))
    joints = T.take(T.concat(decoded, axis=1), grouping.inverse, axis=1)
    traj = U[:, len(grouping)]
    root = generator.root_head(traj)
    vel = generator.vel_head(traj)
    return MotionTensors(joints, root, vel, np.array(mask, dtype=bool), **(labels or {}))
