'''
Procedural mocap-like clips on a 31-joint skeleton, so everything can be
exercised without licensed motion capture.

Contents are periodic actions; styles scale amplitude and tempo, add a
posture lean, raised arms and vertical bounce.
'''

import logging
import os

import numpy as np
from scipy.spatial.transform import Rotation

from . import bvh
from . import export
from .motion import Pose, from_rotation, pose_to_channels

LOGGER = logging.getLogger(__name__)

FPS = 120.0
STANDING_HEIGHT = 97.0

ROOT_CHANNELS = ['Xposition', 'Yposition', 'Zposition', 'Zrotation', 'Yrotation', 'Xrotation']
ZYX = ['Zrotation', 'Yrotation', 'Xrotation']
ZXY = ['Zrotation', 'Xrotation', 'Yrotation']

# name, parent, offset, channels, end site
_JOINTS = [
    ('Hips', None, (0, 0, 0), ROOT_CHANNELS, None),
    ('LHipJoint', 'Hips', (5, -3, 0), ZYX, None),
    ('LeftUpLeg', 'LHipJoint', (4, -5, 0), ZYX, None),
    ('LeftLeg', 'LeftUpLeg', (0, -42, 0), ZYX, None),
    ('LeftFoot', 'LeftLeg', (0, -42, 0), ZYX, None),
    ('LeftToeBase', 'LeftFoot', (0, -5, 12), ZYX, (0, 0, 4)),
    ('RHipJoint', 'Hips', (-5, -3, 0), ZYX, None),
    ('RightUpLeg', 'RHipJoint', (-4, -5, 0), ZYX, None),
    ('RightLeg', 'RightUpLeg', (0, -42, 0), ZYX, None),
    ('RightFoot', 'RightLeg', (0, -42, 0), ZYX, None),
    ('RightToeBase', 'RightFoot', (0, -5, 12), ZYX, (0, 0, 4)),
    ('LowerBack', 'Hips', (0, 5, 0), ZXY, None),
    ('Spine', 'LowerBack', (0, 10, 0), ZXY, None),
    ('Spine1', 'Spine', (0, 10, 0), ZXY, None),
    ('Neck', 'Spine1', (0, 12, 0), ZXY, None),
    ('Neck1', 'Neck', (0, 4, 0), ZXY, None),
    ('Head', 'Neck1', (0, 6, 0), ZXY, (0, 8, 0)),
    ('LeftShoulder', 'Spine1', (4, 10, 0), ZYX, None),
    ('LeftArm', 'LeftShoulder', (14, 0, 0), ZYX, None),
    ('LeftForeArm', 'LeftArm', (28, 0, 0), ZYX, None),
    ('LeftHand', 'LeftForeArm', (25, 0, 0), ZYX, None),
    ('LeftFingerBase', 'LeftHand', (5, 0, 0), ZYX, None),
    ('LeftHandIndex1', 'LeftFingerBase', (4, 0, 0), ZYX, (3, 0, 0)),
    ('LThumb', 'LeftHand', (3, 0, 3), ZYX, (2, 0, 2)),
    ('RightShoulder', 'Spine1', (-4, 10, 0), ZYX, None),
    ('RightArm', 'RightShoulder', (-14, 0, 0), ZYX, None),
    ('RightForeArm', 'RightArm', (-28, 0, 0), ZYX, None),
    ('RightHand', 'RightForeArm', (-25, 0, 0), ZYX, None),
    ('RightFingerBase', 'RightHand', (-5, 0, 0), ZYX, None),
    ('RightHandIndex1', 'RightFingerBase', (-4, 0, 0), ZYX, (-3, 0, 0)),
    ('RThumb', 'RightHand', (-3, 0, 3), ZYX, (-2, 0, 2)),
]


class Style:
    def __init__(self, amplitude=1.0, tempo=1.0, lean=0.0, arms=0.0, bounce=0.0):
        self.amplitude = amplitude
        self.tempo = tempo
        self.lean = lean  # degrees forward
        self.arms = arms  # degrees raised
        self.bounce = bounce  # cm


STYLES = {
    'neutral': Style(),
    'proud': Style(amplitude=1.1, tempo=0.9, lean=-10.0, arms=5.0),
    'old': Style(amplitude=0.6, tempo=0.7, lean=20.0, arms=-5.0),
    'angry': Style(amplitude=1.4, tempo=1.3, lean=5.0, arms=20.0),
    'childlike': Style(amplitude=1.2, tempo=1.4, bounce=4.0, arms=10.0),
}

CONTENTS = ('walk', 'kick', 'punch', 'jump')


def skeleton():
    names = [j[0] for j in _JOINTS]
    joints = []
    for name, parent, offset, channels, end in _JOINTS:
        joints.append(bvh.Joint(name, -1 if parent is None else names.index(parent), offset, channels, end_site=end))
    return bvh.Skeleton(joints)


class _Angles:
    '''
    Per-joint (F, 3) x/y/z angles in degrees, composed as Rx Ry Rz.
    '''
    def __init__(self, frames):
        self.frames = frames
        self.angles = {}

    def add(self, joint, x=0.0, y=0.0, z=0.0):
        a = self.angles.setdefault(joint, np.zeros((self.frames, 3)))
        a[:, 0] += x
        a[:, 1] += y
        a[:, 2] += z

    def rotations(self, skel):
        q = np.zeros((self.frames, len(skel), 4))
        q[..., 0] = 1.0
        for joint, a in self.angles.items():
            r = Rotation.from_euler('zyx', a[:, ::-1], degrees=True)
            q[:, skel.index(joint)] = from_rotation(r)
        return q


def _arms_down(angles, style, down=75.0):
    angles.add('LeftArm', z=-(down - style.arms))
    angles.add('RightArm', z=down - style.arms)


def _walk(angles, phase, style, root):
    a = style.amplitude
    s = np.sin(phase)
    angles.add('LeftUpLeg', x=-25 * a * s)
    angles.add('RightUpLeg', x=25 * a * s)
    angles.add('LeftLeg', x=35 * a * np.maximum(0, np.sin(phase - np.pi / 2)))
    angles.add('RightLeg', x=35 * a * np.maximum(0, np.sin(phase + np.pi / 2)))
    _arms_down(angles, style)
    angles.add('LeftArm', x=20 * a * s)
    angles.add('RightArm', x=-20 * a * s)
    angles.add('LeftForeArm', y=-15.0)
    angles.add('RightForeArm', y=15.0)
    angles.add('Hips', y=3 * a * s)
    frames = np.arange(len(phase))
    root[:, 2] = 0.9 * a * style.tempo * frames
    root[:, 1] -= 2 * a * np.sin(phase) ** 2


def _kick(angles, phase, style, root):
    a = style.amplitude
    k = np.maximum(0, np.sin(phase)) ** 2
    angles.add('RightUpLeg', x=-70 * a * k)
    angles.add('RightLeg', x=40 * a * k * (1 - k) * 4)
    angles.add('Spine', x=-10 * a * k)
    _arms_down(angles, style, down=60.0)
    angles.add('LeftArm', x=-20.0)
    angles.add('RightArm', x=-20.0)


def _punch(angles, phase, style, root):
    a = style.amplitude
    left = np.maximum(0, np.sin(phase)) ** 2
    right = np.maximum(0, -np.sin(phase)) ** 2
    _arms_down(angles, style, down=60.0)
    angles.add('LeftArm', x=-30 - 50 * a * left)
    angles.add('RightArm', x=-30 - 50 * a * right)
    angles.add('LeftForeArm', y=-90 * (1 - left))
    angles.add('RightForeArm', y=90 * (1 - right))
    angles.add('Spine1', y=15 * a * (left - right))


def _jump(angles, phase, style, root):
    a = style.amplitude
    air = np.maximum(0, np.sin(phase))
    crouch = 15 * a * np.maximum(0, -np.sin(phase))
    for side in ('Left', 'Right'):
        angles.add(side + 'UpLeg', x=-3 * crouch)
        angles.add(side + 'Leg', x=6 * crouch)
        angles.add(side + 'Foot', x=-3 * crouch)
    _arms_down(angles, style)
    angles.add('LeftArm', z=60 * air)
    angles.add('RightArm', z=-60 * air)
    root[:, 1] += 30 * a * air - crouch * 0.6


_CONTENT_FNS = {'walk': (_walk, 1.0), 'kick': (_kick, 0.5), 'punch': (_punch, 0.8), 'jump': (_jump, 0.7)}


def clip(content, style_name, frames=240, seed=0):
    '''
    Returns (skeleton, channel frames, fps) for one clip.
    '''
    if content not in _CONTENT_FNS:
        raise ValueError('unknown content {!r}, expected one of {}'.format(content, CONTENTS))
    if style_name not in STYLES:
        raise ValueError('unknown style {!r}, expected one of {}'.format(style_name, sorted(STYLES)))
    style = STYLES[style_name]
    rng = np.random.default_rng(seed)
    fn, hz = _CONTENT_FNS[content]

    skel = skeleton()
    t = np.arange(frames) / FPS
    phase = 2 * np.pi * hz * style.tempo * t + rng.uniform(0, 2 * np.pi)
    angles = _Angles(frames)
    root = np.zeros((frames, 3))
    root[:, 1] = STANDING_HEIGHT
    fn(angles, phase, style, root)

    angles.add('Spine', x=style.lean * 0.5)
    angles.add('Spine1', x=style.lean * 0.5)
    angles.add('Neck', x=-style.lean * 0.3)
    root[:, 1] += style.bounce * np.abs(np.sin(2 * phase))
    root[:, 0] += rng.normal(0, 0.2)

    translations = np.repeat(skel.offsets[None], frames, axis=0)
    translations[:, 0] = root
    pose = Pose(angles.rotations(skel), translations)
    return skel, pose_to_channels(skel, pose), FPS


def write_dataset(out, styles=None, contents=None, frames=240, clips=1, seed=0, manifest='manifest.tsv'):
    '''
    Write one BVH per (content, style, clip) and a tab-separated manifest
    of relative path, style and content. Returns the manifest path.
    '''
    styles = list(styles or STYLES)
    contents = list(contents or CONTENTS)
    os.makedirs(out, exist_ok=True)
    lines = []
    count = 0
    for content in contents:
        for style in styles:
            for k in range(clips):
                name = '{}_{}_{}.bvh'.format(content, style, k)
                skel, channels, fps = clip(content, style, frames=frames, seed=seed * 1000003 + count)
                with open(os.path.join(out, name), 'wb') as f:
                    f.write(bvh.format_bvh(skel, channels, fps))
                lines.append('\t'.join((name, style, content)))
                count += 1
    path = os.path.join(out, manifest)
    with open(path, 'w', encoding='utf-8') as f:
        f.write('# path\tstyle\tcontent\n')
        f.write('\n'.join(lines) + '\n')
    export.write_stamp(out, seed=seed)
    LOGGER.info('wrote %d synthetic clips to %s', count, out)
    return path
