'''
Per-frame input tokens: one per body part plus one for the global
translation.
'''

import logging

import numpy as np

from . import config
from . import nn
from . import tensor as T
from .config import ConfigError
from .tensor import ShapeError

LOGGER = logging.getLogger(__name__)

LOSS_KEYS = ('Adversarial', 'Disentangle', 'Reconstruction', 'Cycle', 'Velocity', 'Acceleration', 'FootContact')


class HyperParams:
    def __init__(self, d=64, d_proj=32, heads=4, blocks=3, max_length=200, mlp_hidden=128, init_std=0.02,
                 use_psm=True, weights=None, lr_eg=1e-5, lr_d=1e-6, batch=8):
        self.d = int(d)
        self.d_proj = int(d_proj)
        self.heads = int(heads)
        self.blocks = int(blocks)
        self.max_length = int(max_length)
        self.mlp_hidden = int(mlp_hidden)
        self.init_std = float(init_std)
        self.use_psm = bool(use_psm)
        self.weights = dict(weights or {})
        self.lr_eg = float(lr_eg)
        self.lr_d = float(lr_d)
        self.batch = int(batch)

        if self.d < 2 or self.d % 2:
            raise ConfigError('Model.Dim must be even and at least 2, got {}'.format(self.d))
        if self.d_proj < 1 or self.heads < 1:
            raise ConfigError('Model.ProjDim and Model.Heads must be positive')
        if self.blocks < 2:
            raise ConfigError('Model.Blocks must be at least 2, got {}'.format(self.blocks))
        if self.max_length < 2:
            raise ConfigError('Model.MaxLength must be at least 2, got {}'.format(self.max_length))
        if self.batch < 1:
            raise ConfigError('Train.BatchSize must be positive')
        for k in LOSS_KEYS:
            self.weights.setdefault(k, 1.0)

    @classmethod
    def from_config(cls):
        m = config.read('Model')
        t = config.read('Train')
        loss = config.read('Loss')
        return cls(d=m['Dim'], d_proj=m['ProjDim'], heads=m['Heads'], blocks=m['Blocks'],
                   max_length=m['MaxLength'], mlp_hidden=m['MlpHidden'], init_std=m['InitStd'],
                   use_psm=m.get('UsePSM', True), weights={k: float(loss[k]) for k in LOSS_KEYS},
                   lr_eg=t['LearningRateEG'], lr_d=t['LearningRateD'], batch=t['BatchSize'])


class PartGrouping:
    '''
    P named parts, each a list of joint indices; together a partition of
    every joint.
    '''
    def __init__(self, names, parts, num_joints):
        self.names = list(names)
        self.parts = [list(p) for p in parts]
        self.num_joints = num_joints
        seen = [j for p in self.parts for j in p]
        if any(not p for p in self.parts):
            raise ConfigError('every body part needs at least one joint')
        if len(seen) != len(set(seen)):
            raise ConfigError('body parts overlap')
        if sorted(seen) != list(range(num_joints)):
            raise ConfigError('body parts must cover all {} joints exactly, they cover {}'.format(
                num_joints, sorted(seen)))
        # generator heads emit joints part by part; this puts them back in joint order
        self.inverse = np.argsort(np.array(seen))

    @classmethod
    def from_config(cls, joint_names, parts=None):
        parts = parts or config.read('Model', 'Parts')
        joint_names = list(joint_names)
        indices = []
        for name, joints in parts.items():
            try:
                indices.append([joint_names.index(j) for j in joints])
            except ValueError:
                raise ConfigError('part {} names a joint that is not kept: {}'.format(name, joints))
        return cls(parts.keys(), indices, len(joint_names))

    def __len__(self):
        return len(self.parts)

    @property
    def widths(self):
        return [7 * len(p) for p in self.parts]

    @property
    def token_names(self):
        return self.names + ['traj']


class Embedding(nn.Module):
    def __init__(self, rng, grouping, d, std=0.02):
        super().__init__()
        if d % 2:
            raise ConfigError('embedding dimension must be even, got {}'.format(d))
        self.d = d
        self.parts = [self.child('part{}'.format(i), nn.Linear(rng, w, d, std))
                      for i, w in enumerate(grouping.widths)]
        self.child('root', nn.Linear(rng, 7, d // 2, std))
        self.child('vel', nn.Linear(rng, 4, d // 2, std))


class MotionEmbedding:
    def __init__(self, X, mask):
        self.X = X
        self.mask = np.asarray(mask, dtype=bool)

    @property
    def length(self):
        return self.X.shape[0]


def embed_parts(motion, grouping, embedding):
    '''
    (L, J, 7) joint vectors -> (L, P, d): each part's joint vectors
    concatenated and passed through that part's FC.
    '''
    joints = motion.joints
    if joints.ndim != 3 or joints.shape[1] != grouping.num_joints or len(embedding.parts) != len(grouping):
        raise ShapeError('embed_parts: joints {} for {} parts over {} joints'.format(
            joints.shape, len(grouping), grouping.num_joints))
    L = joints.shape[0]
    tokens = []
    for fc, idx in zip(embedding.parts, grouping.parts):
        p = T.take(joints, idx, axis=1).reshape(L, 7 * len(idx))
        tokens.append(fc(p))
    return T.stack(tokens, axis=1)


def embed_global(motion, embedding):
    '''
    [FC(root) ; FC(velocity)] -> (L, 1, d)
    '''
    if embedding.d % 2:
        raise ConfigError('embedding dimension must be even, got {}'.format(embedding.d))
    root = embedding.root(motion.root)
    vel = embedding.vel(motion.vel)
    g = T.concat([root, vel], axis=-1)
    return g.reshape(g.shape[0], 1, embedding.d)


def assemble(parts, glob, mask):
    if parts.shape[0] != glob.shape[0] or parts.shape[2] != glob.shape[2]:
        raise ShapeError('assemble: parts {} and global {}'.format(parts.shape, glob.shape))
    X = T.concat([parts, glob], axis=1)
    return MotionEmbedding(T.masked_rows(X, mask), mask)


def embed(motion, grouping, embedding):
    return assemble(embed_parts(motion, grouping, embedding), embed_global(motion, embedding), motion.mask)
