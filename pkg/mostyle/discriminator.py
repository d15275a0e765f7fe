import logging

import numpy as np

from . import nn
from . import tensor as T
from .embedding import Embedding, embed

LOGGER = logging.getLogger(__name__)


class Discriminator(nn.Module):
    '''
    One transformer block over its own embedding of the motion, mean-pooled
    over unmasked tokens, read out to a single logit.
    '''
    def __init__(self, rng, grouping, hp):
        super().__init__()
        tokens = len(grouping) + 1
        self.grouping = grouping
        self.d = hp.d
        self.child('embedding', Embedding(rng, grouping, hp.d, hp.init_std))
        self.param('pos', nn.normal(rng, (hp.max_length, tokens, hp.d), hp.init_std))
        self.child('block', nn.TransformerBlock(rng, tokens, hp.d, hp.heads, hp.d_proj, hp.init_std))
        self.child('readout', nn.Linear(rng, hp.d, 1, hp.init_std))

    def logit(self, motion):
        X = embed(motion, self.grouping, self.embedding)
        Z = self.block(X.X, self.pos[:X.length], X.mask)
        pooled = T.valid_rows(Z, X.mask).reshape(-1, self.d).mean(axis=0)
        return self.readout(pooled.reshape(1, self.d)).reshape(())

    def __call__(self, motion):
        return T.sigmoid(self.logit(motion))


def discriminate(motion, disc):
    '''
    Probability in (0, 1) that the motion is real.
    '''
    if not np.asarray(motion.mask).any():
        raise ValueError('discriminate: motion has no valid frames')
    return disc(motion)
