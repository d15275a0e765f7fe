'''
Content consistency (CC), style consistency (SC) and SC++.

Distances ignore the global translation (root and velocity vectors) and
compare two motions over the shorter one's frames.
'''

import logging

import numpy as np

from . import stats
from .motion import MotionTensors
from .tensor import no_grad

LOGGER = logging.getLogger(__name__)


class EvalPair:
    '''
    A content motion, a style motion (both MotionSequence) and, once
    generated, the transferred motion.
    '''
    def __init__(self, content, style, generated=None):
        self.content = content
        self.style = style
        self.generated = generated

    @property
    def same_content(self):
        return self.content.content == self.style.content

    @property
    def same_style(self):
        return self.content.style == self.style.style


def motion_distance(a, b):
    n = min(a.frames, b.frames)
    return float(np.linalg.norm(a.joints[:n] - b.joints[:n], axis=-1).sum())


def transfer_pair(pair, model, length=None):
    length = length or model.hp.max_length
    content = MotionTensors.from_sequence(pair.content.window(0, min(pair.content.frames, length)), length)
    style = MotionTensors.from_sequence(pair.style.window(0, min(pair.style.frames, length)), length)
    with no_grad():
        out = model(content, style)
    return out.to_sequence(pair.content.fps, style=pair.style.style, content=pair.content.content,
                           name=pair.content.name)


def _generated(pair, model):
    if pair.generated is None:
        if model is None:
            raise ValueError('pair has no generated motion and no model was given')
        pair.generated = transfer_pair(pair, model)
    return pair.generated


def metric_cc(pairs, model=None):
    chosen = [p for p in pairs if p.same_style]
    if not chosen:
        raise ValueError('CC needs pairs with equal style labels')
    return float(np.mean([motion_distance(_generated(p, model), p.content) for p in chosen]))


def metric_sc(pairs, model=None):
    chosen = [p for p in pairs if p.same_content]
    if not chosen:
        raise ValueError('SC needs pairs with equal content labels')
    return float(np.mean([motion_distance(_generated(p, model), p.style) for p in chosen]))


def metric_scpp(pairs, model=None, training_set=()):
    '''
    Mean over pairs of the mean distance from the output to every training
    clip with the content motion's content and the style motion's style.
    Pairs with an empty cell are skipped and counted.
    '''
    cells = {}
    for clip in training_set:
        cells.setdefault((clip.content, clip.style), []).append(clip)
    inner = []
    for p in pairs:
        cell = cells.get((p.content.content, p.style.style))
        if not cell:
            stats.stats_sum('eval scpp empty cells', 1)
            LOGGER.warning('no training clips with content %r and style %r, skipping pair',
                           p.content.content, p.style.style)
            continue
        generated = _generated(p, model)
        inner.append(np.mean([motion_distance(generated, m) for m in cell]))
    if not inner:
        raise ValueError('SC++ found no pair with a populated training cell')
    return float(np.mean(inner))


def split_metrics(pairs, model=None, training_set=(), self_pairs=()):
    '''
    Table rows: {CC, SC, SC++} x {average, same_content, diff_content,
    self_pairs}; None where a split has no pairs. self_pairs use one clip
    as both content and style and are kept out of the other splits.
    '''
    same = [p for p in pairs if p.same_content]
    diff = [p for p in pairs if not p.same_content]
    kernels = (('CC', lambda ps: metric_cc(ps, model)),
               ('SC', lambda ps: metric_sc(ps, model)),
               ('SC++', lambda ps: metric_scpp(ps, model, training_set)))
    table = {}
    for name, kernel in kernels:
        row = {}
        for split, chosen in (('average', pairs), ('same_content', same), ('diff_content', diff),
                              ('self_pairs', list(self_pairs))):
            try:
                row[split] = kernel(chosen)
            except ValueError:
                row[split] = None
        table[name] = row
    return table


def category_metrics(pairs, model=None, training_set=()):
    '''
    Per content category (grouping on the content motion) and per style
    category (grouping on the style motion): rows of kind, label, CC, SC, SC++.
    '''
    rows = []
    for kind, key in (('content', lambda p: p.content.content), ('style', lambda p: p.style.style)):
        labels = sorted({key(p) for p in pairs}, key=str)
        for label in labels:
            chosen = [p for p in pairs if key(p) == label]
            row = {'kind': kind, 'label': label}
            for name, kernel in (('CC', metric_cc), ('SC', metric_sc)):
                try:
                    row[name] = kernel(chosen, model)
                except ValueError:
                    row[name] = None
            try:
                row['SC++'] = metric_scpp(chosen, model, training_set)
            except ValueError:
                row['SC++'] = None
            rows.append(row)
    return rows
