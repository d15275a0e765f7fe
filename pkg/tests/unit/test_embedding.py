import numpy as np
import pytest

import mostyle.config as config
from mostyle.config import ConfigError
from mostyle.embedding import Embedding, HyperParams, LOSS_KEYS, PartGrouping, assemble, embed, embed_parts
from mostyle.motion import MotionTensors
from mostyle.tensor import DTensor, ShapeError

JOINTS = list(config.defaults()['Skeleton']['JointMap'])


def motion(frames=5, length=8, seed=0):
    rng = np.random.default_rng(seed)
    joints = np.zeros((length, 21, 7))
    joints[:frames] = rng.normal(size=(frames, 21, 7))
    root = np.zeros((length, 7))
    root[:frames] = rng.normal(size=(frames, 7))
    vel = np.zeros((length, 4))
    vel[:frames] = rng.normal(size=(frames, 4))
    return MotionTensors(DTensor(joints), DTensor(root), DTensor(vel), np.arange(length) < frames)


def test_hyperparams_from_config():
    hp = HyperParams.from_config()
    assert hp.d == 64 and hp.heads == 4 and hp.blocks == 3 and hp.max_length == 200
    assert hp.use_psm
    assert set(hp.weights) == set(LOSS_KEYS)
    assert hp.weights['Reconstruction'] == 3.0


def test_hyperparams_desk(desk_config):
    hp = HyperParams.from_config()
    assert hp.d == 32 and hp.max_length == 32 and hp.batch == 2


@pytest.mark.parametrize('kwargs', [dict(d=63), dict(d=0), dict(blocks=1), dict(max_length=1),
                                    dict(heads=0), dict(batch=0)])
def test_hyperparams_checks(kwargs):
    with pytest.raises(ConfigError):
        HyperParams(**kwargs)


def test_grouping_from_config():
    g = PartGrouping.from_config(JOINTS)
    assert len(g) == 5
    assert g.names == ['spine', 'L_arm', 'R_arm', 'L_leg', 'R_leg']
    assert g.token_names[-1] == 'traj'
    assert g.widths == [35, 28, 28, 28, 28]
    order = np.concatenate([np.array(p) for p in g.parts])
    assert np.array_equal(order[g.inverse], np.arange(21))


@pytest.mark.parametrize('parts', [
    [[0, 1], [1, 2]],
    [[0, 1], []],
    [[0, 1]],
])
def test_grouping_must_partition(parts):
    with pytest.raises(ConfigError):
        PartGrouping(['a', 'b'][:len(parts)], parts, 3)


def test_grouping_unknown_joint():
    with pytest.raises(ConfigError):
        PartGrouping.from_config(JOINTS, {'all': JOINTS + ['Tail']})


def test_embed_shapes_and_mask():
    g = PartGrouping.from_config(JOINTS)
    emb = Embedding(np.random.default_rng(0), g, 16, std=0.3)
    X = embed(motion(), g, emb)
    assert X.X.shape == (8, 6, 16)
    assert X.length == 8
    assert np.all(X.X.data[5:] == 0.0)
    assert np.any(X.X.data[:5] != 0.0)


def test_part_token_sees_only_its_joints():
    g = PartGrouping.from_config(JOINTS)
    emb = Embedding(np.random.default_rng(0), g, 16, std=0.3)
    a = motion()
    b = motion()
    left_hand = JOINTS.index('LeftHand')
    b.joints.data[:, left_hand] += 5.0
    ta = embed_parts(a, g, emb).data
    tb = embed_parts(b, g, emb).data
    changed = [i for i in range(5) if not np.allclose(ta[:, i], tb[:, i])]
    assert changed == [g.names.index('L_arm')]


def test_global_token_halves():
    g = PartGrouping.from_config(JOINTS)
    emb = Embedding(np.random.default_rng(0), g, 16, std=0.3)
    a = motion()
    b = motion()
    b.vel.data[:5] += 1.0
    xa = embed(a, g, emb).X.data[:, -1]
    xb = embed(b, g, emb).X.data[:, -1]
    assert np.allclose(xa[:, :8], xb[:, :8])
    assert not np.allclose(xa[:5, 8:], xb[:5, 8:])


def test_embed_errors():
    g = PartGrouping.from_config(JOINTS)
    with pytest.raises(ConfigError):
        Embedding(np.random.default_rng(0), g, 15)
    emb = Embedding(np.random.default_rng(0), g, 16)
    m = motion()
    m.joints = DTensor(np.zeros((8, 20, 7)))
    with pytest.raises(ShapeError):
        embed_parts(m, g, emb)
    with pytest.raises(ShapeError):
        assemble(DTensor(np.zeros((8, 5, 16))), DTensor(np.zeros((7, 1, 16))), np.ones(8, dtype=bool))
