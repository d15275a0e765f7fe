import numpy as np
import pytest

import mostyle.config as config
from mostyle.discriminator import Discriminator, discriminate
from mostyle.embedding import HyperParams, PartGrouping
from mostyle.gradcheck import check_gradients
from mostyle.motion import MotionTensors
from mostyle.tensor import DTensor

HP = HyperParams(d=8, d_proj=4, heads=2, blocks=2, max_length=12, mlp_hidden=16, init_std=0.3)
JOINTS = list(config.defaults()['Skeleton']['JointMap'])


def motion(frames=7, padding=0.0, seed=0):
    rng = np.random.default_rng(seed)
    joints = np.full((10, 21, 7), padding)
    joints[:frames] = rng.normal(size=(frames, 21, 7))
    root = np.full((10, 7), padding)
    root[:frames] = rng.normal(size=(frames, 7))
    vel = np.full((10, 4), padding)
    vel[:frames] = rng.normal(size=(frames, 4))
    return MotionTensors(DTensor(joints), DTensor(root), DTensor(vel), np.arange(10) < frames)


def disc():
    return Discriminator(np.random.default_rng(0), PartGrouping.from_config(JOINTS), HP)


def test_probability():
    d = disc()
    p = discriminate(motion(), d)
    assert p.shape == ()
    assert 0.0 < p.item() < 1.0
    assert np.isclose(p.item(), 1.0 / (1.0 + np.exp(-d.logit(motion()).item())))


def test_padding_does_not_matter():
    d = disc()
    assert np.isclose(discriminate(motion(), d).item(), discriminate(motion(padding=9.0), d).item())


def test_depends_on_motion():
    d = disc()
    assert not np.isclose(d.logit(motion(seed=0)).item(), d.logit(motion(seed=1)).item())


def test_empty_motion():
    with pytest.raises(ValueError):
        discriminate(motion(frames=0), disc())


def test_gradients():
    d = disc()
    m = motion()
    for t in (m.joints, m.root, m.vel):
        t.requires_grad = True
    params = [m.joints, m.root, m.vel] + [p for _, p in d.named_parameters()]
    assert check_gradients(lambda: discriminate(m, d), params, samples=4) < 1e-4
