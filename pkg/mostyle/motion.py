'''
Skeleton poses, retargeting, and the per-frame motion representation the
network consumes: joint vectors (root-relative world offset + rotation in
the body-facing frame), the root vector, and the global velocity.

Quaternions are (w, x, y, z) with w >= 0. Units are cm and radians,
velocities per frame.
'''

import logging

import numpy as np
from scipy.spatial.transform import Rotation

from . import bvh
from .config import ConfigError
from .tensor import DTensor

LOGGER = logging.getLogger(__name__)

UP = np.array([0.0, 1.0, 0.0])
FORWARD = np.array([0.0, 0.0, 1.0])
UNIT_TOLERANCE = 1e-3


def canonical(q):
    q = np.asarray(q, dtype=np.float64)
    return np.where(q[..., :1] < 0, -q, q)


def to_rotation(q):
    '''
    (..., 4) wxyz quaternions -> flat scipy Rotation.
    '''
    q = np.asarray(q, dtype=np.float64).reshape(-1, 4)
    return Rotation.from_quat(q[:, [1, 2, 3, 0]])


def from_rotation(r, shape=None):
    q = np.atleast_2d(r.as_quat())[:, [3, 0, 1, 2]]
    q = canonical(q)
    if shape is not None:
        q = q.reshape(tuple(shape) + (4,))
    return q


def yaw_rotation(theta):
    theta = np.asarray(theta, dtype=np.float64).reshape(-1)
    return Rotation.from_rotvec(theta[:, None] * UP)


def yaw_of(q):
    '''
    Heading angle of each rotation: where it sends +z, measured about +y.
    '''
    v = to_rotation(q).apply(FORWARD)
    return np.arctan2(v[:, 0], v[:, 2])


def facing_angle(across):
    '''
    Facing direction is up x (left hip -> right hip), already horizontal.
    Returns theta with R_y(theta) taking +x onto it.
    '''
    f = np.cross(UP, across)
    return np.arctan2(-f[..., 2], f[..., 0])


def wrap_angle(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


class Pose:
    '''
    Local joint rotations (F, J, 4) and local translations (F, J, 3).
    '''
    def __init__(self, rotations, translations):
        self.rotations = np.asarray(rotations, dtype=np.float64)
        self.translations = np.asarray(translations, dtype=np.float64)
        if self.rotations.shape[:2] != self.translations.shape[:2]:
            raise ValueError('pose rotations {} and translations {} disagree'.format(
                self.rotations.shape, self.translations.shape))

    @property
    def frames(self):
        return self.rotations.shape[0]


def channels_to_pose(skel, frames):
    frames = np.asarray(frames, dtype=np.float64)
    F, J = len(frames), len(skel)
    rot = np.zeros((F, J, 4))
    rot[..., 0] = 1.0
    trans = np.repeat(skel.offsets[None], F, axis=0)
    for i, joint in enumerate(skel.joints):
        values = frames[:, skel.channel_slice(i)]
        rot_cols = [k for k, c in enumerate(joint.channels) if c in bvh.ROTATION_CHANNELS]
        if rot_cols and F:
            r = Rotation.from_euler(joint.rotation_order, values[:, rot_cols], degrees=True)
            rot[:, i] = from_rotation(r)
        for k, c in enumerate(joint.channels):
            if c in bvh.POSITION_CHANNELS:
                trans[:, i, bvh.POSITION_CHANNELS.index(c)] = values[:, k]
    return Pose(rot, trans)


def pose_to_channels(skel, pose):
    F = pose.frames
    frames = np.zeros((F, skel.num_channels))
    for i, joint in enumerate(skel.joints):
        start = skel.channel_start[i]
        rot_cols = [k for k, c in enumerate(joint.channels) if c in bvh.ROTATION_CHANNELS]
        if rot_cols:
            euler = to_rotation(pose.rotations[:, i]).as_euler(joint.rotation_order, degrees=True)
            for n, k in enumerate(rot_cols):
                frames[:, start + k] = euler[:, n]
        for k, c in enumerate(joint.channels):
            if c in bvh.POSITION_CHANNELS:
                frames[:, start + k] = pose.translations[:, i, bvh.POSITION_CHANNELS.index(c)]
    return frames


def fk(skel, pose):
    '''
    World rotations (F, J, 4) and world positions (F, J, 3).
    '''
    F, J = pose.frames, len(skel)
    world = [None] * J
    positions = np.zeros((F, J, 3))
    for j in range(J):
        local = to_rotation(pose.rotations[:, j])
        p = skel.parents[j]
        if p < 0:
            world[j] = local
            positions[:, j] = pose.translations[:, j]
        else:
            world[j] = world[p] * local
            positions[:, j] = positions[:, p] + world[p].apply(pose.translations[:, j])
    quats = np.stack([from_rotation(w) for w in world], axis=1)
    return quats, positions


def retarget(skel, pose, joint_map):
    '''
    Reduce a skeleton to the joints named by joint_map (kept name -> source
    name). A kept joint's local transform absorbs the chain of removed
    joints above it, frame by frame, so kept-joint world transforms are
    unchanged. Joints below the last kept joint of a branch are dropped.
    '''
    missing = [src for src in joint_map.values() if src not in skel.names]
    if missing:
        raise ConfigError('skeleton lacks joints named in Skeleton.JointMap: {}'.format(', '.join(missing)))
    rename = {src: tgt for tgt, src in joint_map.items()}
    if len(rename) != len(joint_map):
        raise ConfigError('Skeleton.JointMap maps two kept joints to one source joint')
    kept = sorted(skel.index(src) for src in rename)
    if kept[0] != 0:
        raise ConfigError('the root joint {} must be kept'.format(skel.names[0]))
    kept_set = set(kept)
    new_index = {old: new for new, old in enumerate(kept)}

    F = pose.frames
    joints = []
    rotations = np.zeros((F, len(kept), 4))
    translations = np.zeros((F, len(kept), 3))
    for new, old in enumerate(kept):
        src = skel.joints[old]
        chain = [old]
        ancestor = src.parent
        while ancestor >= 0 and ancestor not in kept_set:
            chain.append(ancestor)
            ancestor = skel.joints[ancestor].parent
        chain.reverse()

        acc = Rotation.identity(F)
        t = np.zeros((F, 3))
        rest = np.zeros(3)
        for node in chain:
            t = t + acc.apply(pose.translations[:, node])
            acc = acc * to_rotation(pose.rotations[:, node])
            rest = rest + skel.offsets[node]
        rotations[:, new] = from_rotation(acc)
        translations[:, new] = t

        if old == 0:
            channels = src.channels
        else:
            channels = [c for c in src.channels if c in bvh.ROTATION_CHANNELS] or \
                ['Zrotation', 'Yrotation', 'Xrotation']
            # removed joints that can move make this bone's offset vary per frame
            if any(skel.joints[node].channels for node in chain[:-1]):
                channels = list(bvh.POSITION_CHANNELS) + channels
        parent = -1 if ancestor < 0 else new_index[ancestor]
        joints.append(bvh.Joint(rename[src.name], parent, rest, channels, end_site=src.end_site))

    return bvh.Skeleton(joints), Pose(rotations, translations)


def velocities(root):
    '''
    Per-frame [root displacement, wrapped yaw change]; the last frame
    repeats the previous one.
    '''
    root = np.asarray(root, dtype=np.float64)
    if len(root) < 2:
        raise ValueError('velocities need at least 2 frames, got {}'.format(len(root)))
    yaw = yaw_of(root[:, 3:7])
    vel = np.zeros((len(root), 4))
    vel[:-1, :3] = root[1:, :3] - root[:-1, :3]
    vel[:-1, 3] = wrap_angle(yaw[1:] - yaw[:-1])
    vel[-1] = vel[-2]
    return vel


class MotionSequence:
    '''
    joints (T, J, 7): root-relative world offset and facing-frame rotation
    root (T, 7): world position and world rotation of the root
    vel (T, 4): root displacement and yaw change per frame
    '''
    def __init__(self, joints, root, vel, fps, style=None, content=None, name=None):
        self.joints = np.asarray(joints, dtype=np.float64)
        self.root = np.asarray(root, dtype=np.float64)
        self.vel = np.asarray(vel, dtype=np.float64)
        self.fps = fps
        self.style = style
        self.content = content
        self.name = name
        T = len(self.joints)
        if self.joints.ndim != 3 or self.joints.shape[2] != 7:
            raise ValueError('joint vectors must be (T, J, 7), got {}'.format(self.joints.shape))
        if self.root.shape != (T, 7) or self.vel.shape != (T, 4):
            raise ValueError('root {} and velocity {} must cover {} frames'.format(
                self.root.shape, self.vel.shape, T))
        if T < 2:
            raise ValueError('a motion needs at least 2 frames, got {}'.format(T))

    @property
    def frames(self):
        return len(self.joints)

    @property
    def num_joints(self):
        return self.joints.shape[1]

    def labels(self):
        return dict(style=self.style, content=self.content, name=self.name)

    def copy(self):
        return MotionSequence(self.joints.copy(), self.root.copy(), self.vel.copy(), self.fps, **self.labels())

    def window(self, start, length):
        '''
        Frames [start, start+length) with velocities recomputed inside the window.
        '''
        stop = start + length
        if start < 0 or length < 2 or stop > self.frames:
            raise ValueError('window [{}, {}) outside a {}-frame motion'.format(start, stop, self.frames))
        root = self.root[start:stop].copy()
        return MotionSequence(self.joints[start:stop].copy(), root, velocities(root), self.fps, **self.labels())

    def foot_positions(self, feet):
        '''
        World positions (T, len(feet), 3) of the given joint indices.
        '''
        return self.joints[:, feet, :3] + self.root[:, None, :3]


def to_motion_sequence(skel, pose, fps, left_hip, right_hip, style=None, content=None, name=None):
    if pose.frames < 2:
        raise ValueError('a motion needs at least 2 frames, got {}'.format(pose.frames))
    try:
        li, ri = skel.index(left_hip), skel.index(right_hip)
    except KeyError as e:
        raise ConfigError('hip joint for the facing direction: {}'.format(e))
    F, J = pose.frames, len(skel)

    world_q, world_p = fk(skel, pose)
    root_pos = world_p[:, 0]
    offsets = world_p - root_pos[:, None]

    theta = facing_angle(world_p[:, ri] - world_p[:, li])
    heading = yaw_rotation(np.repeat(theta, J))
    local = heading.inv() * to_rotation(world_q)
    q = from_rotation(local, (F, J))

    joints = np.concatenate([offsets, q], axis=-1)
    root = np.concatenate([root_pos, world_q[:, 0]], axis=-1)
    return MotionSequence(joints, root, velocities(root), fps, style=style, content=content, name=name)


def downsample(ms, factor=2):
    if factor < 1:
        raise ValueError('downsample factor must be >= 1, got {}'.format(factor))
    if factor == 1:
        return ms.copy()
    root = ms.root[::factor].copy()
    if len(root) < 2:
        raise ValueError('downsampling {} frames by {} leaves fewer than 2'.format(ms.frames, factor))
    return MotionSequence(ms.joints[::factor].copy(), root, velocities(root), ms.fps / factor, **ms.labels())


def crop_window(rng, frames, min_len, max_len):
    '''
    (start, length): length uniform in [min_len, min(max_len, frames)],
    then start uniform over the positions that fit.
    '''
    if min_len > frames:
        raise ValueError('crop of at least {} frames from a {}-frame motion'.format(min_len, frames))
    if min_len < 2:
        raise ValueError('crops need at least 2 frames')
    hi = min(max_len, frames)
    if hi < min_len:
        raise ValueError('crop range [{}, {}] is empty'.format(min_len, max_len))
    length = int(rng.integers(min_len, hi + 1))
    start = int(rng.integers(0, frames - length + 1))
    return start, length


def random_crop(ms, rng, min_len, max_len):
    start, length = crop_window(rng, ms.frames, min_len, max_len)
    return ms.window(start, length)


def normalize_quaternions(ms):
    '''
    Copy of ms with every quaternion scaled to unit length; zero ones
    become the identity.
    '''
    def unit(q):
        n = np.linalg.norm(q, axis=-1, keepdims=True)
        ident = np.zeros_like(q)
        ident[..., 0] = 1.0
        return np.where(n > 0, q / np.where(n > 0, n, 1.0), ident)

    joints = ms.joints.copy()
    root = ms.root.copy()
    joints[..., 3:] = unit(joints[..., 3:])
    root[:, 3:] = unit(root[:, 3:])
    return MotionSequence(joints, root, ms.vel.copy(), ms.fps, **ms.labels())


def sequence_to_pose(skel, ms):
    '''
    Invert the representation onto skel: world rotations come back from
    the facing frame via the root, local rotations are parent-relative.
    Bones take the skeleton offsets, except joints with position channels,
    whose offsets are rebuilt from the joint positions frame by frame.
    '''
    if ms.num_joints != len(skel):
        raise ValueError('motion has {} joints, skeleton {}'.format(ms.num_joints, len(skel)))
    for what, q in (('joint', ms.joints[..., 3:]), ('root', ms.root[:, 3:])):
        err = np.abs(np.linalg.norm(q, axis=-1) - 1.0).max()
        if err > UNIT_TOLERANCE:
            raise ValueError('non-unit {} quaternion (norm off by {:.3g})'.format(what, err))
    F, J = ms.frames, ms.num_joints

    root_world = to_rotation(ms.root[:, 3:])
    heading = root_world * to_rotation(ms.joints[:, 0, 3:]).inv()
    heading = Rotation.from_quat(np.repeat(heading.as_quat(), J, axis=0))
    world = (heading * to_rotation(ms.joints[..., 3:])).as_quat().reshape(F, J, 4)
    world = [Rotation.from_quat(world[:, j]) for j in range(J)]
    world[0] = root_world

    rotations = np.zeros((F, J, 4))
    translations = np.repeat(skel.offsets[None], F, axis=0)
    translations[:, 0] = ms.root[:, :3]
    for j in range(J):
        p = skel.parents[j]
        local = world[j] if p < 0 else world[p].inv() * world[j]
        rotations[:, j] = from_rotation(local)
        if p >= 0 and skel.joints[j].position_axes:
            translations[:, j] = world[p].inv().apply(ms.joints[:, j, :3] - ms.joints[:, p, :3])
    return Pose(rotations, translations)


def write_bvh(skel, ms):
    pose = sequence_to_pose(skel, ms)
    return bvh.format_bvh(skel, pose_to_channels(skel, pose), ms.fps)


class MotionTensors:
    '''
    A motion padded to a fixed length as DTensors, with a frame mask.
    '''
    def __init__(self, joints, root, vel, mask, style=None, content=None, name=None):
        self.joints = joints
        self.root = root
        self.vel = vel
        self.mask = np.asarray(mask, dtype=bool)
        if self.mask.shape != (joints.shape[0],) or root.shape[0] != joints.shape[0] \
           or vel.shape[0] != joints.shape[0]:
            raise ValueError('motion tensors disagree on length: joints {} root {} vel {} mask {}'.format(
                joints.shape, root.shape, vel.shape, self.mask.shape))
        self.style = style
        self.content = content
        self.name = name

    @classmethod
    def from_sequence(cls, ms, length=None, requires_grad=False):
        length = length or ms.frames
        if ms.frames > length:
            raise ValueError('{}-frame motion does not fit in {} frames'.format(ms.frames, length))
        n = ms.frames
        joints = np.zeros((length,) + ms.joints.shape[1:])
        root = np.zeros((length, 7))
        vel = np.zeros((length, 4))
        joints[:n] = ms.joints
        root[:n] = ms.root
        vel[:n] = ms.vel
        mask = np.arange(length) < n
        return cls(DTensor(joints, requires_grad), DTensor(root, requires_grad), DTensor(vel, requires_grad), mask,
                   **ms.labels())

    def labels(self):
        return dict(style=self.style, content=self.content, name=self.name)

    @property
    def length(self):
        return len(self.mask)

    @property
    def n(self):
        return int(self.mask.sum())

    def detach(self):
        return MotionTensors(DTensor(self.joints.data), DTensor(self.root.data), DTensor(self.vel.data),
                             self.mask.copy(), **self.labels())

    def to_sequence(self, fps, **labels):
        n = self.n
        return MotionSequence(self.joints.data[:n].copy(), self.root.data[:n].copy(), self.vel.data[:n].copy(),
                              fps, **(labels or self.labels()))
