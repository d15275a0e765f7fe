'''
Using a trained checkpoint: style transfer between two BVH files,
evaluation over labeled manifests, and style-space feature dumps.
'''

import logging
import os

import numpy as np

from . import checkpoint
from . import config
from . import export
from . import stats
from .config import ConfigError
from .dataset import load_clip, load_entries, read_manifest
from .embedding import HyperParams, PartGrouping
from .metrics import EvalPair, category_metrics, split_metrics
from .model import MotionStyleTransfer
from .motion import MotionSequence, MotionTensors, normalize_quaternions, write_bvh
from .tensor import no_grad

LOGGER = logging.getLogger(__name__)


def load_model(path):
    '''
    Rebuild the model a checkpoint was trained with. The checkpoint's
    config becomes the global config. Returns (model, joint names, meta).
    '''
    meta, sections = checkpoint.read(path)
    config.config_from_string(meta['config'])
    joints = meta.get('joints')
    if not joints:
        raise checkpoint.CheckpointError('{}: no joint list in the header'.format(path))
    hp = HyperParams.from_config()
    model = MotionStyleTransfer(PartGrouping.from_config(joints), hp, seed=int(config.read('Train', 'Seed')))
    checkpoint.restore(meta, sections, model)
    LOGGER.info('loaded %s, trained for %d iterations', path, meta['iteration'])
    return model, joints, meta


def _check_joints(skel, joints, path):
    if skel.names != list(joints):
        raise ConfigError('{} retargets to joints {}, the checkpoint expects {}'.format(path, skel.names, joints))


def _windows(frames, length):
    '''
    (start, skip) per window: every window has min(length, frames) frames
    and the last one is pulled back to end at the final frame; skip counts
    the leading frames already covered by the previous window.
    '''
    if frames <= length:
        return [(0, 0)]
    out = []
    start = 0
    while start < frames:
        if start + length <= frames:
            out.append((start, 0))
        else:
            pulled = frames - length
            out.append((pulled, start - pulled))
        start += length
    return out


def run_transfer(model, content, style, trace=None):
    '''
    Transfer between MotionSequences. Content longer than the model's
    maximum length goes through in consecutive windows; the style motion
    is cut to its first window. Returns the raw generated MotionSequence.
    '''
    T_max = model.hp.max_length
    style_t = MotionTensors.from_sequence(style.window(0, min(style.frames, T_max)), T_max)
    length = min(content.frames, T_max)
    joints, root, vel = [], [], []
    with no_grad():
        for k, (start, skip) in enumerate(_windows(content.frames, T_max)):
            window = MotionTensors.from_sequence(content.window(start, length), T_max)
            out = model(window, style_t, trace=trace if k == 0 else None)
            n = out.n
            joints.append(out.joints.data[skip:n])
            root.append(out.root.data[skip:n])
            vel.append(out.vel.data[skip:n])
    return MotionSequence(np.concatenate(joints), np.concatenate(root), np.concatenate(vel), content.fps,
                          style=style.style, content=content.content, name=content.name)


def _stamp(outdir):
    export.write_stamp(outdir, seed=int(config.read('Train', 'Seed')))


def transfer(ckpt, content_path, style_path, out_path, export_dir=None, content_label=None, style_label=None):
    '''
    The labels only tag the output; a standalone BVH file carries none.
    '''
    model, joints, _ = load_model(ckpt)
    skel, content = load_clip(content_path, content=content_label, name='content')
    _check_joints(skel, joints, content_path)
    style_skel, style = load_clip(style_path, style=style_label, name='style')
    _check_joints(style_skel, joints, style_path)

    trace = {}
    generated = run_transfer(model, content, style, trace=trace)
    with open(out_path, 'wb') as f:
        f.write(write_bvh(skel, normalize_quaternions(generated)))
    LOGGER.info('wrote %d frames to %s', generated.frames, out_path)

    export_dir = export_dir or os.path.dirname(os.path.abspath(out_path))
    os.makedirs(export_dir, exist_ok=True)
    names = model.grouping.token_names
    if 'psm' in trace:
        export.write_attention(export_dir, trace['psm'], names, per_head=bool(config.read('Eval', 'PerHeadAttention')))
    export.write_feature(os.path.join(export_dir, 'style_feature.csv'), trace['style'], names)
    export.write_feature(os.path.join(export_dir, 'modulated_style.csv'), trace['modulated'], names)
    _stamp(export_dir)
    stats.stats_sum('transfers', 1)
    return generated, trace


def evaluate(ckpt, test_manifest, train_manifest, outdir):
    '''
    CC, SC and SC++ over every ordered pair of distinct test clips, with
    SC++ cells drawn from the training manifest. Each clip paired with
    itself fills the self_pairs column only.
    '''
    model, joints, _ = load_model(ckpt)
    skel, test = load_entries(read_manifest(test_manifest))
    _check_joints(skel, joints, test_manifest)
    skel, train = load_entries(read_manifest(train_manifest))
    _check_joints(skel, joints, train_manifest)

    pairs = [EvalPair(c, s) for i, c in enumerate(test) for j, s in enumerate(test) if i != j]
    self_pairs = [EvalPair(c, c) for c in test]
    for p in pairs + self_pairs:
        p.generated = run_transfer(model, p.content, p.style)
    table = split_metrics(pairs, training_set=train, self_pairs=self_pairs)
    rows = category_metrics(pairs, training_set=train)

    os.makedirs(outdir, exist_ok=True)
    _stamp(outdir)
    export.write_metrics(os.path.join(outdir, 'metrics.csv'), table)
    export.write_category_metrics(os.path.join(outdir, 'metrics_by_category.csv'), rows)
    for metric, row in table.items():
        LOGGER.info('%s: %s', metric, ', '.join('{}={}'.format(k, 'absent' if v is None else '{:.4f}'.format(v))
                                                for k, v in row.items()))
    return table, rows


def features(ckpt, content_path, manifest, outdir):
    '''
    Style feature and modulated style of every manifest clip, each used as
    the style motion against one content motion.
    '''
    model, joints, _ = load_model(ckpt)
    skel, content = load_clip(content_path, name='content')
    _check_joints(skel, joints, content_path)
    entries = read_manifest(manifest)
    skel, clips = load_entries(entries)
    _check_joints(skel, joints, manifest)

    T_max = model.hp.max_length
    content_t = MotionTensors.from_sequence(content.window(0, min(content.frames, T_max)), T_max)
    rows = []
    with no_grad():
        for clip in clips:
            style_t = MotionTensors.from_sequence(clip.window(0, min(clip.frames, T_max)), T_max)
            S, modulated, _, _ = model.style_features(content_t, style_t)
            rows.append((clip.name, clip.style, clip.content, S.data, modulated.data))

    os.makedirs(outdir, exist_ok=True)
    _stamp(outdir)
    path = os.path.join(outdir, 'features.csv')
    export.write_features_table(path, rows, model.grouping.token_names, model.hp.d)
    LOGGER.info('wrote %d feature rows to %s', len(rows), path)
    return path
