'''
BVH hierarchy and motion reader/writer.

Joints are kept in file order, which is a depth-first pre-order, so a
parent always has a smaller index than its children.
'''

import logging

import numpy as np

LOGGER = logging.getLogger(__name__)

POSITION_CHANNELS = ('Xposition', 'Yposition', 'Zposition')
ROTATION_CHANNELS = ('Xrotation', 'Yrotation', 'Zrotation')


class BVHParseError(ValueError):
    def __init__(self, message, lineno=None):
        super().__init__(message, lineno)
        self.message = message
        self.lineno = lineno

    def __str__(self):
        if self.lineno is None:
            return self.message
        return 'line {}: {}'.format(self.lineno, self.message)


class Joint:
    def __init__(self, name, parent, offset, channels, end_site=None):
        self.name = name
        self.parent = parent
        self.offset = np.array(offset, dtype=np.float64)
        self.channels = list(channels)
        self.end_site = None if end_site is None else np.array(end_site, dtype=np.float64)

    @property
    def rotation_order(self):
        '''
        Intrinsic Euler order as scipy spells it, e.g. 'ZXY'.
        '''
        return ''.join(c[0] for c in self.channels if c in ROTATION_CHANNELS)

    @property
    def position_axes(self):
        return [POSITION_CHANNELS.index(c) for c in self.channels if c in POSITION_CHANNELS]

    def __repr__(self):
        return 'Joint({!r}, parent={})'.format(self.name, self.parent)


class Skeleton:
    def __init__(self, joints):
        if not joints:
            raise ValueError('a skeleton needs at least one joint')
        for i, j in enumerate(joints):
            if i == 0 and j.parent != -1:
                raise ValueError('first joint {} must be the root'.format(j.name))
            if i > 0 and not 0 <= j.parent < i:
                raise ValueError('joint {} has parent index {}, must be in [0, {})'.format(j.name, j.parent, i))
        self.joints = list(joints)
        self.names = [j.name for j in joints]
        if len(set(self.names)) != len(self.names):
            raise ValueError('duplicate joint names in skeleton')
        self.parents = np.array([j.parent for j in joints], dtype=np.intp)
        self.offsets = np.stack([j.offset for j in joints])
        self.channel_start = []
        count = 0
        for j in joints:
            self.channel_start.append(count)
            count += len(j.channels)
        self.num_channels = count

    def __len__(self):
        return len(self.joints)

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError('joint {} is not in the skeleton'.format(name))

    def children(self, i):
        return [k for k, j in enumerate(self.joints) if j.parent == i]

    def channel_slice(self, i):
        start = self.channel_start[i]
        return slice(start, start + len(self.joints[i].channels))


class _Lines:
    def __init__(self, text):
        self.lines = [(n + 1, line.split()) for n, line in enumerate(text.splitlines())]
        self.lines = [(n, words) for n, words in self.lines if words]
        self.pos = 0

    def peek(self):
        if self.pos >= len(self.lines):
            last = self.lines[-1][0] if self.lines else 0
            raise BVHParseError('unexpected end of file', last)
        return self.lines[self.pos]

    def next(self):
        ret = self.peek()
        self.pos += 1
        return ret

    def expect(self, word):
        lineno, words = self.next()
        if words[0] != word:
            raise BVHParseError('expected {!r}, saw {!r}'.format(word, ' '.join(words)), lineno)
        return lineno, words

    def done(self):
        return self.pos >= len(self.lines)


def _floats(words, lineno, what):
    try:
        return [float(w) for w in words]
    except ValueError:
        raise BVHParseError('non-numeric value in {}'.format(what), lineno)


def _parse_offset(lines):
    lineno, words = lines.expect('OFFSET')
    if len(words) != 4:
        raise BVHParseError('OFFSET needs 3 values', lineno)
    return _floats(words[1:], lineno, 'OFFSET')


def _parse_joint(lines, joints, parent):
    lineno, words = lines.next()
    if len(words) < 2:
        raise BVHParseError('joint without a name', lineno)
    name = '_'.join(words[1:])
    lines.expect('{')
    offset = _parse_offset(lines)
    lineno, words = lines.expect('CHANNELS')
    try:
        n = int(words[1])
    except (IndexError, ValueError):
        raise BVHParseError('CHANNELS needs a count', lineno)
    channels = words[2:]
    if len(channels) != n:
        raise BVHParseError('CHANNELS declares {} channels but lists {}'.format(n, len(channels)), lineno)
    for c in channels:
        if c not in POSITION_CHANNELS and c not in ROTATION_CHANNELS:
            raise BVHParseError('unknown channel {}'.format(c), lineno)
    if len([c for c in channels if c in ROTATION_CHANNELS]) not in (0, 3):
        raise BVHParseError('joint {} needs 0 or 3 rotation channels'.format(name), lineno)

    index = len(joints)
    joint = Joint(name, parent, offset, channels)
    joints.append(joint)

    while True:
        lineno, words = lines.peek()
        if words[0] == 'JOINT':
            _parse_joint(lines, joints, index)
        elif words[0] == 'End':
            lines.next()
            lines.expect('{')
            joint.end_site = np.array(_parse_offset(lines))
            lines.expect('}')
        elif words[0] == '}':
            lines.next()
            return
        else:
            raise BVHParseError('unexpected {!r} inside joint {}'.format(' '.join(words), name), lineno)


def parse_bvh(data):
    '''
    Parse a BVH document. Returns (Skeleton, frames (F, C) ndarray, fps).
    '''
    if isinstance(data, bytes):
        try:
            data = data.decode('utf-8')
        except UnicodeDecodeError:
            raise BVHParseError('BVH must be UTF-8 or ASCII text')
    lines = _Lines(data)

    lines.expect('HIERARCHY')
    lineno, words = lines.peek()
    if words[0] != 'ROOT':
        raise BVHParseError('expected ROOT, saw {!r}'.format(' '.join(words)), lineno)
    joints = []
    _parse_joint(lines, joints, -1)
    skel = Skeleton(joints)

    lines.expect('MOTION')
    lineno, words = lines.expect('Frames:')
    try:
        declared = int(words[1])
    except (IndexError, ValueError):
        raise BVHParseError('Frames: needs an integer', lineno)
    lineno, words = lines.next()
    if words[:2] != ['Frame', 'Time:'] or len(words) != 3:
        raise BVHParseError('expected "Frame Time: <seconds>"', lineno)
    frame_time = _floats(words[2:], lineno, 'Frame Time')[0]
    if frame_time <= 0:
        raise BVHParseError('Frame Time must be positive', lineno)

    frames = np.zeros((declared, skel.num_channels))
    count = 0
    while not lines.done():
        lineno, words = lines.next()
        if count >= declared:
            raise BVHParseError('more frames than the {} declared'.format(declared), lineno)
        if len(words) != skel.num_channels:
            raise BVHParseError('frame has {} values, hierarchy declares {} channels'.format(
                len(words), skel.num_channels), lineno)
        frames[count] = _floats(words, lineno, 'frame')
        count += 1
    if count != declared:
        last = lines.lines[-1][0] if lines.lines else 0
        raise BVHParseError('{} frames declared but {} present'.format(declared, count), last)

    return skel, frames, 1.0 / frame_time


def _fmt(values):
    return ' '.join('{:.10g}'.format(v) for v in values)


def _write_joint(out, skel, i, depth):
    joint = skel.joints[i]
    pad = '\t' * depth
    out.append('{}{} {}'.format(pad, 'ROOT' if joint.parent < 0 else 'JOINT', joint.name))
    out.append(pad + '{')
    out.append('{}\tOFFSET {}'.format(pad, _fmt(joint.offset)))
    out.append('{}\tCHANNELS {} {}'.format(pad, len(joint.channels), ' '.join(joint.channels)).rstrip())
    children = skel.children(i)
    for c in children:
        _write_joint(out, skel, c, depth + 1)
    if joint.end_site is not None or not children:
        end = joint.end_site if joint.end_site is not None else np.zeros(3)
        out.append(pad + '\tEnd Site')
        out.append(pad + '\t{')
        out.append('{}\t\tOFFSET {}'.format(pad, _fmt(end)))
        out.append(pad + '\t}')
    out.append(pad + '}')


def format_bvh(skel, frames, fps):
    '''
    Render a skeleton and (F, C) channel frames as BVH bytes.
    '''
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2 or frames.shape[1] != skel.num_channels:
        raise ValueError('frames of shape {} do not match {} channels'.format(frames.shape, skel.num_channels))
    out = ['HIERARCHY']
    _write_joint(out, skel, 0, 0)
    out.append('MOTION')
    out.append('Frames: {}'.format(len(frames)))
    out.append('Frame Time: {!r}'.format(1.0 / fps))
    for f in frames:
        out.append(_fmt(f))
    return ('\n'.join(out) + '\n').encode('utf-8')


def read_bvh(path):
    with open(path, 'rb') as f:
        data = f.read()
    try:
        return parse_bvh(data)
    except BVHParseError as e:
        raise BVHParseError('{}: {}'.format(path, e.message), e.lineno)
