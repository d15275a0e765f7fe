'''
CSV and YAML artifacts: attention maps, style features, loss logs,
metrics tables and the per-run reproducibility stamp.
'''

import csv
import logging
import os
import sys

from pkg_resources import get_distribution, DistributionNotFound
from setuptools_scm import get_version
import yaml

from . import config

LOGGER = logging.getLogger(__name__)


def _fmt(v):
    return '' if v is None else repr(float(v))


def write_matrix_csv(path, matrix, row_names, col_names, corner='part'):
    with open(path, 'w', newline='', encoding='utf-8') as f:
        w = csv.writer(f)
        w.writerow([corner] + list(col_names))
        for name, row in zip(row_names, matrix):
            w.writerow([name] + [_fmt(v) for v in row])


def read_matrix_csv(path):
    '''
    Returns (row names, col names, rows of floats).
    '''
    with open(path, newline='', encoding='utf-8') as f:
        rows = list(csv.reader(f))
    cols = rows[0][1:]
    return [r[0] for r in rows[1:]], cols, [[float(v) for v in r[1:]] for r in rows[1:]]


def write_attention(outdir, attn, token_names, prefix='psm_attention', per_head=True):
    '''
    attn is (h, K, K): rows are content-motion parts, columns style-motion
    parts. Writes the head average and optionally one file per head.
    '''
    paths = [os.path.join(outdir, prefix + '.csv')]
    write_matrix_csv(paths[0], attn.mean(axis=0), token_names, token_names, corner='content\\style')
    if per_head:
        for h, head in enumerate(attn):
            paths.append(os.path.join(outdir, '{}_head{}.csv'.format(prefix, h)))
            write_matrix_csv(paths[-1], head, token_names, token_names, corner='content\\style')
    return paths


def write_feature(path, feature, token_names):
    write_matrix_csv(path, feature, token_names, ['c{}'.format(i) for i in range(feature.shape[1])])


class LossLog:
    '''
    One row per iteration: iteration then every LossBreakdown field.
    Appends, so a resumed run continues the same file.
    '''
    def __init__(self, path, fields):
        self.path = path
        self.fields = list(fields)
        new = not os.path.exists(path) or os.path.getsize(path) == 0
        self.f = open(path, 'a', newline='', encoding='utf-8')
        self.writer = csv.writer(self.f)
        if new:
            self.writer.writerow(['iteration'] + self.fields)

    def write(self, iteration, breakdown):
        self.writer.writerow([iteration] + [_fmt(v) for v in breakdown.values()])
        self.f.flush()

    def close(self):
        self.f.close()


def read_loss_log(path):
    with open(path, newline='', encoding='utf-8') as f:
        return list(csv.DictReader(f))


def truncate_loss_log(path, iteration):
    '''
    Drop rows after iteration, for resuming from an earlier checkpoint.
    '''
    if not os.path.exists(path):
        return
    with open(path, newline='', encoding='utf-8') as f:
        rows = list(csv.reader(f))
    keep = rows[:1] + [r for r in rows[1:] if int(r[0]) <= iteration]
    with open(path, 'w', newline='', encoding='utf-8') as f:
        csv.writer(f).writerows(keep)


METRIC_SPLITS = ('average', 'same_content', 'diff_content', 'self_pairs')


def write_metrics(path, table):
    '''
    table: {metric: {split: value or None}}. Absent splits stay empty.
    '''
    with open(path, 'w', newline='', encoding='utf-8') as f:
        w = csv.writer(f)
        w.writerow(['metric'] + list(METRIC_SPLITS))
        for metric, row in table.items():
            w.writerow([metric] + [_fmt(row.get(s)) for s in METRIC_SPLITS])


def write_category_metrics(path, rows):
    with open(path, 'w', newline='', encoding='utf-8') as f:
        w = csv.writer(f)
        w.writerow(['kind', 'label', 'CC', 'SC', 'SC++'])
        for r in rows:
            w.writerow([r['kind'], r['label'], _fmt(r['CC']), _fmt(r['SC']), _fmt(r['SC++'])])


def write_features_table(path, rows, token_names, d):
    '''
    rows: (name, style, content, S (K, d), modulated (K, d)).
    '''
    header = ['name', 'style', 'content']
    for kind in ('style', 'modulated'):
        header += ['{}.{}.{}'.format(kind, part, c) for part in token_names for c in range(d)]
    with open(path, 'w', newline='', encoding='utf-8') as f:
        w = csv.writer(f)
        w.writerow(header)
        for name, style, content, S, modulated in rows:
            w.writerow([name, style, content] + [_fmt(v) for v in S.reshape(-1)]
                       + [_fmt(v) for v in modulated.reshape(-1)])


def code_version():
    try:
        return get_distribution('mostyle').version
    except DistributionNotFound:
        # this works for an uninstalled git checkout
        try:
            return get_version(root='..', relative_to=__file__)
        except LookupError:
            return 'unknown'


def write_stamp(outdir, seed=None, command=None):
    stamp = {'config_hash': config.config_hash(),
             'seed': seed,
             'version': code_version(),
             'command': command or ' '.join(sys.argv)}
    path = os.path.join(outdir, 'stamp.yml')
    with open(path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(stamp, f, default_flow_style=False)
    LOGGER.info('wrote %s', path)
    return path
