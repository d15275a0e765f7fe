import os

import numpy as np
import pytest

import mostyle.bvh as bvh
import mostyle.synth as synth


def test_skeleton():
    skel = synth.skeleton()
    assert len(skel) == 31
    assert skel.names[0] == 'Hips'
    assert 'LHipJoint' in skel.names and 'RThumb' in skel.names


def test_clip_is_seeded():
    _, a, fps = synth.clip('walk', 'old', frames=30, seed=3)
    _, b, _ = synth.clip('walk', 'old', frames=30, seed=3)
    _, c, _ = synth.clip('walk', 'old', frames=30, seed=4)
    assert fps == 120.0
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_styles_differ():
    _, neutral, _ = synth.clip('kick', 'neutral', frames=30, seed=0)
    _, angry, _ = synth.clip('kick', 'angry', frames=30, seed=0)
    assert neutral.shape == angry.shape
    assert not np.allclose(neutral, angry)


def test_unknown_labels():
    with pytest.raises(ValueError):
        synth.clip('dance', 'neutral')
    with pytest.raises(ValueError):
        synth.clip('walk', 'sleepy')


def test_write_dataset(tmp_path):
    path = synth.write_dataset(str(tmp_path), styles=['neutral', 'old'], contents=['walk', 'jump'],
                               frames=20, clips=2)
    assert path == os.path.join(str(tmp_path), 'manifest.tsv')
    with open(path) as f:
        lines = [line.rstrip('\n').split('\t') for line in f if not line.startswith('#')]
    assert len(lines) == 8
    assert lines[0] == ['walk_neutral_0.bvh', 'neutral', 'walk']
    skel, frames, fps = bvh.read_bvh(str(tmp_path / 'jump_old_1.bvh'))
    assert len(skel) == 31
    assert frames.shape[0] == 20
    assert fps == pytest.approx(120.0)
    assert os.path.exists(str(tmp_path / 'stamp.yml'))
