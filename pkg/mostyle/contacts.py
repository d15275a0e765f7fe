'''
Foot contact frames for the foot regularizer.
'''

import logging

import numpy as np

from . import config
from .config import ConfigError

LOGGER = logging.getLogger(__name__)


class FootContactMask:
    '''
    mask is (T, 4) bool, one column per foot joint.
    '''
    def __init__(self, feet, mask):
        self.feet = list(feet)
        self.mask = np.asarray(mask, dtype=bool)
        if len(self.feet) != 4:
            raise ConfigError('foot contacts need exactly 4 foot joints, got {}'.format(len(self.feet)))
        if self.mask.ndim != 2 or self.mask.shape[1] != 4:
            raise ValueError('contact mask must be (T, 4), got {}'.format(self.mask.shape))

    def __len__(self):
        return len(self.mask)

    @property
    def counts(self):
        return self.mask.sum(axis=0)


def foot_indices(joint_names, feet=None):
    feet = feet or config.read('Skeleton', 'Feet')
    if len(feet) != 4:
        raise ConfigError('Skeleton.Feet must name exactly 4 joints, got {}'.format(len(feet)))
    try:
        return [list(joint_names).index(f) for f in feet]
    except ValueError:
        raise ConfigError('Skeleton.Feet names a joint that is not kept: {}'.format(feet))


def detect_foot_contacts(ms, feet, height_threshold=None, velocity_threshold=None):
    '''
    A frame is a contact for a foot joint when it is within height_threshold
    of the clip's floor (lowest foot height) and moves less than
    velocity_threshold to the next frame.
    '''
    if height_threshold is None:
        height_threshold = float(config.read('Contacts', 'HeightThreshold'))
    if velocity_threshold is None:
        velocity_threshold = float(config.read('Contacts', 'VelocityThreshold'))

    pos = ms.foot_positions(feet)
    height = pos[..., 1] - pos[..., 1].min()
    speed = np.zeros(height.shape)
    speed[:-1] = np.linalg.norm(pos[1:] - pos[:-1], axis=-1)
    speed[-1] = speed[-2]
    mask = (height < height_threshold) & (speed < velocity_threshold)
    LOGGER.debug('%s: contact frames per foot %s', ms.name, mask.sum(axis=0).tolist())
    return FootContactMask(feet, mask)
