'''
Labeled clip manifests, clip loading, and training triplet sampling.
'''

import functools
import logging
import os

import cachetools

from . import bvh
from . import config
from . import stats
from .burner import Burner
from .config import ConfigError
from .losses import SamplingError
from .motion import channels_to_pose, downsample, random_crop, retarget, to_motion_sequence

LOGGER = logging.getLogger(__name__)

_clip_cache = None


class ManifestEntry:
    def __init__(self, path, style, content):
        self.path = path
        self.style = style
        self.content = content

    @property
    def name(self):
        return os.path.splitext(os.path.basename(self.path))[0]

    def __repr__(self):
        return 'ManifestEntry({!r}, {!r}, {!r})'.format(self.path, self.style, self.content)


def read_manifest(path, delimiter=None):
    '''
    One path<delim>style<delim>content per line; blank lines and # comments
    are skipped; relative paths are relative to the manifest.
    '''
    if delimiter is None:
        delimiter = config.read('Data', 'Delimiter') or '\t'
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            fields = [x.strip() for x in line.split(delimiter)]
            if len(fields) != 3 or not all(fields):
                raise ConfigError('{}:{}: expected path, style and content, saw {!r}'.format(path, lineno, line))
            clip_path = fields[0] if os.path.isabs(fields[0]) else os.path.join(base, fields[0])
            entries.append(ManifestEntry(clip_path, fields[1], fields[2]))
    if not entries:
        raise ConfigError('manifest {} lists no clips'.format(path))
    return entries


def load_clip(path, style=None, content=None, name=None, settings=None):
    '''
    Parse, retarget, convert and downsample one BVH file.
    Returns (retargeted skeleton, MotionSequence).
    '''
    settings = settings or clip_settings()
    skel, frames, fps = bvh.read_bvh(path)
    pose = channels_to_pose(skel, frames)
    skel, pose = retarget(skel, pose, settings['joint_map'])
    try:
        ms = to_motion_sequence(skel, pose, fps, settings['left_hip'], settings['right_hip'],
                                style=style, content=content, name=name)
        ms = downsample(ms, settings['downsample'])
    except ValueError as e:
        raise ValueError('{}: {}'.format(path, e))
    stats.stats_sum('clips loaded', 1)
    return skel, ms


def clip_settings():
    '''
    The config values load_clip depends on, in a picklable form.
    '''
    return {'joint_map': dict(config.read('Skeleton', 'JointMap')),
            'left_hip': config.read('Skeleton', 'LeftHip'),
            'right_hip': config.read('Skeleton', 'RightHip'),
            'downsample': int(config.read('Data', 'Downsample'))}


def _cache():
    global _clip_cache
    if _clip_cache is None:
        _clip_cache = cachetools.LRUCache(int(config.read('Data', 'CacheSize') or 256))
    return _clip_cache


def _cache_key(entry, settings):
    return (os.path.abspath(entry.path), os.path.getmtime(entry.path), entry.style, entry.content,
            settings['downsample'], tuple(settings['joint_map'].items()),
            settings['left_hip'], settings['right_hip'])


def load_entries(entries, burner=None):
    '''
    Load every entry in manifest order, from the cache when possible.
    Returns (skeleton, [MotionSequence]).
    '''
    settings = clip_settings()
    cache = _cache()
    keys = [_cache_key(e, settings) for e in entries]
    results = {i: cache[k] for i, k in enumerate(keys) if k in cache}
    todo = [i for i in range(len(entries)) if i not in results]

    if todo:
        own = burner is None
        burner = burner or Burner('loader')
        try:
            partials = [functools.partial(load_clip, entries[i].path, entries[i].style, entries[i].content,
                                          entries[i].name, settings) for i in todo]
            loaded = burner.burn_all(partials, labels=[entries[i].path for i in todo])
        finally:
            if own:
                burner.close()
        for i, result in zip(todo, loaded):
            cache[keys[i]] = result
            results[i] = result

    skel = None
    clips = []
    for i in range(len(entries)):
        s, ms = results[i]
        if skel is not None and s.names != skel.names:
            raise ConfigError('clips retarget to different skeletons')
        skel = s
        clips.append(ms)
    return skel, clips


class Triplet:
    def __init__(self, content, style, style_b=None):
        self.content = content
        self.style = style
        self.style_b = style_b


class Dataset:
    def __init__(self, skeleton, clips):
        if not clips:
            raise ConfigError('dataset is empty')
        self.skeleton = skeleton
        self.clips = list(clips)
        self.by_label = {}
        for i, clip in enumerate(self.clips):
            self.by_label.setdefault(clip.style, {}).setdefault(clip.content, []).append(i)
        self.pair_styles = sorted(s for s, contents in self.by_label.items() if len(contents) >= 2)
        if not self.pair_styles:
            LOGGER.warning('no style has clips of 2 different contents, the disentangle loss is disabled')

    @classmethod
    def from_manifest(cls, path, burner=None):
        skel, clips = load_entries(read_manifest(path), burner=burner)
        LOGGER.info('loaded %d clips from %s', len(clips), path)
        return cls(skel, clips)

    def __len__(self):
        return len(self.clips)

    @property
    def can_disentangle(self):
        return bool(self.pair_styles)

    @property
    def styles(self):
        return sorted(self.by_label)

    @property
    def contents(self):
        return sorted({c for contents in self.by_label.values() for c in contents})

    def _crop(self, i, rng, min_len, max_len):
        clip = self.clips[i]
        return random_crop(clip, rng, min(min_len, clip.frames), min(max_len, clip.frames))

    def sample_pair(self, rng, style=None):
        '''
        Two clips of one style with different contents: (style, index a, index b).
        '''
        if not self.pair_styles:
            raise SamplingError('no style has clips of 2 different contents')
        if style is None:
            style = self.pair_styles[int(rng.integers(len(self.pair_styles)))]
        elif style not in self.pair_styles:
            raise SamplingError('style {!r} does not have 2 different contents'.format(style))
        contents = sorted(self.by_label[style])
        ca, cb = rng.choice(len(contents), size=2, replace=False)
        a = self.by_label[style][contents[int(ca)]]
        b = self.by_label[style][contents[int(cb)]]
        return style, a[int(rng.integers(len(a)))], b[int(rng.integers(len(b)))]

    def sample(self, rng, min_len, max_len, disentangle=True):
        '''
        A training triplet of cropped clips. style_b is None when the
        disentangle loss cannot or should not be computed.
        '''
        content = int(rng.integers(len(self.clips)))
        if disentangle and self.can_disentangle:
            _, a, b = self.sample_pair(rng)
            return Triplet(self._crop(content, rng, min_len, max_len), self._crop(a, rng, min_len, max_len),
                           self._crop(b, rng, min_len, max_len))
        style = int(rng.integers(len(self.clips)))
        return Triplet(self._crop(content, rng, min_len, max_len), self._crop(style, rng, min_len, max_len))


def clear_cache():
    global _clip_cache
    _clip_cache = None
