'''
The full style transfer network: a shared embedding and encoder for both
inputs, the style modulator, and the generator.
'''

import logging

import numpy as np

from . import nn
from .embedding import Embedding, embed
from .encoder import Encoder, encode
from .generator import Generator, generate
from .psm import StyleModulator, modulate, temporal_pool

LOGGER = logging.getLogger(__name__)


class MotionStyleTransfer(nn.Module):
    def __init__(self, grouping, hp, seed=0):
        super().__init__()
        rng = np.random.default_rng(seed)
        tokens = len(grouping) + 1
        self.grouping = grouping
        self.hp = hp
        self.child('embedding', Embedding(rng, grouping, hp.d, hp.init_std))
        self.child('encoder', Encoder(rng, tokens, hp))
        if hp.use_psm:
            self.child('psm', StyleModulator(rng, tokens, hp))
        else:
            self.psm = None
        self.child('generator', Generator(rng, grouping, hp))

    def encode(self, motion, trace=None):
        '''
        (S, Y, mask) of one motion; both inputs go through these same weights.
        '''
        X = embed(motion, self.grouping, self.embedding)
        S, Y = encode(X, self.encoder, trace=trace)
        return S, Y, X.mask

    def style_features(self, content, style, trace=None):
        '''
        (style feature, modulated style, content dynamics, content mask).
        '''
        _, Y_C, mask_C = self.encode(content, trace=trace)
        S_S, Y_S, mask_S = self.encode(style)
        if self.psm is None:
            modulated = S_S
        else:
            modulated = modulate(S_S, temporal_pool(Y_C, mask_C), temporal_pool(Y_S, mask_S), self.psm, trace=trace)
        if trace is not None:
            trace['style'] = S_S.data
            trace['modulated'] = modulated.data
        return S_S, modulated, Y_C, mask_C

    def __call__(self, content, style, trace=None):
        '''
        The content restyled by the style motion, with the content's length and mask.
        '''
        _, modulated, Y_C, mask_C = self.style_features(content, style, trace=trace)
        return generate(Y_C, mask_C, modulated, self.generator, trace=trace, labels=dict(
            style=style.style, content=content.content, name=content.name))
