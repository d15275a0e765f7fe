import numpy as np
import pytest

from mostyle.config import ConfigError
from mostyle.contacts import FootContactMask, detect_foot_contacts, foot_indices
from mostyle.motion import MotionSequence

NAMES = ['Hips', 'LeftFoot', 'LeftToeBase', 'RightFoot', 'RightToeBase']


def planted_and_lifted(frames=6):
    '''
    Left foot joints stand still on the floor, right ones rise 2 cm a frame.
    '''
    joints = np.zeros((frames, 5, 7))
    joints[..., 3] = 1.0
    joints[:, 3:, 1] = 2.0 * np.arange(frames)[:, None]
    root = np.zeros((frames, 7))
    root[:, 3] = 1.0
    root[:, 1] = 90.0
    joints[:, 1:, 1] -= 90.0
    return MotionSequence(joints, root, np.zeros((frames, 4)), 60.0, name='test')


def test_foot_indices():
    assert foot_indices(NAMES) == [1, 2, 3, 4]
    assert foot_indices(NAMES, ['RightFoot', 'LeftFoot', 'Hips', 'RightToeBase']) == [3, 1, 0, 4]
    with pytest.raises(ConfigError):
        foot_indices(NAMES[:4])
    with pytest.raises(ConfigError):
        foot_indices(NAMES, ['LeftFoot', 'RightFoot'])


def test_detect():
    ms = planted_and_lifted()
    contacts = detect_foot_contacts(ms, [1, 2, 3, 4])
    assert len(contacts) == 6
    assert contacts.mask[:, :2].all()
    # right foot moves 2 cm a frame and climbs past the 3 cm threshold
    assert not contacts.mask[:, 2:].any()
    assert list(contacts.counts) == [6, 6, 0, 0]


def test_thresholds():
    ms = planted_and_lifted()
    contacts = detect_foot_contacts(ms, [1, 2, 3, 4], height_threshold=100.0, velocity_threshold=100.0)
    assert contacts.mask.all()
    contacts = detect_foot_contacts(ms, [1, 2, 3, 4], height_threshold=0.0)
    assert not contacts.mask.any()


def test_mask_checks():
    with pytest.raises(ConfigError):
        FootContactMask([1, 2, 3], np.zeros((4, 3), dtype=bool))
    with pytest.raises(ValueError):
        FootContactMask([1, 2, 3, 4], np.zeros((4, 3), dtype=bool))
