import numpy as np
import pytest

import mostyle.stats as stats
from mostyle.metrics import (EvalPair, category_metrics, metric_cc, metric_sc, metric_scpp, motion_distance,
                             split_metrics, transfer_pair)
from mostyle.motion import MotionSequence


def seq(seed, frames=6, style='neutral', content='walk', name=None):
    rng = np.random.default_rng(seed)
    return MotionSequence(rng.normal(size=(frames, 3, 7)), rng.normal(size=(frames, 7)),
                          rng.normal(size=(frames, 4)), 30, style=style, content=content,
                          name=name or 'clip{}'.format(seed))


def toy_pairs():
    '''
    Four pairs covering same and different style and content labels.
    '''
    pairs = [EvalPair(seq(0, style='neutral', content='walk'), seq(1, style='neutral', content='kick')),
             EvalPair(seq(2, style='neutral', content='walk'), seq(3, frames=4, style='old', content='walk')),
             EvalPair(seq(4, style='proud', content='kick'), seq(5, style='proud', content='kick')),
             EvalPair(seq(6, frames=5, style='proud', content='jump'), seq(7, style='old', content='kick'))]
    for i, p in enumerate(pairs):
        p.generated = seq(10 + i, frames=p.content.frames, style=p.style.style, content=p.content.content)
    return pairs


def training_set():
    return [seq(20, style='old', content='walk'), seq(21, style='old', content='walk'),
            seq(22, style='neutral', content='kick'), seq(23, style='proud', content='kick')]


def naive_distance(a, b):
    total = 0.0
    for t in range(min(a.frames, b.frames)):
        for j in range(a.joints.shape[1]):
            total += np.sqrt(sum((a.joints[t, j, k] - b.joints[t, j, k]) ** 2 for k in range(7)))
    return total


def naive_mean(values):
    return sum(values) / len(values)


class IdentityModel:
    '''
    Hands back the content motion unchanged.
    '''
    class hp:
        max_length = 8

    def __call__(self, content, style):
        return content


def test_motion_distance():
    a, b = seq(0), seq(1, frames=4)
    assert motion_distance(a, b) == pytest.approx(naive_distance(a, b), abs=1e-12)
    assert motion_distance(a, a) == 0.0


def test_translation_is_ignored():
    a, b = seq(0), seq(1)
    moved = MotionSequence(b.joints, np.zeros_like(b.root), np.zeros_like(b.vel), 30)
    assert motion_distance(a, b) == motion_distance(a, moved)


def test_cc_sc_match_loops():
    pairs = toy_pairs()
    cc = naive_mean([naive_distance(p.generated, p.content) for p in pairs if p.content.style == p.style.style])
    sc = naive_mean([naive_distance(p.generated, p.style) for p in pairs if p.content.content == p.style.content])
    assert metric_cc(pairs) == pytest.approx(cc, abs=1e-12)
    assert metric_sc(pairs) == pytest.approx(sc, abs=1e-12)


def test_scpp_matches_loop():
    pairs = toy_pairs()
    train = training_set()
    inner = []
    for p in pairs:
        cell = [m for m in train if m.content == p.content.content and m.style == p.style.style]
        if cell:
            inner.append(naive_mean([naive_distance(p.generated, m) for m in cell]))
    assert len(inner) == 2
    assert metric_scpp(pairs, training_set=train) == pytest.approx(naive_mean(inner), abs=1e-12)


def test_scpp_skips_empty_cells():
    before = stats.stat_value('eval scpp empty cells') or 0
    metric_scpp(toy_pairs(), training_set=training_set())
    assert stats.stat_value('eval scpp empty cells') == before + 2
    with pytest.raises(ValueError):
        metric_scpp(toy_pairs(), training_set=())


def test_needs_a_model():
    pair = EvalPair(seq(0), seq(1))
    with pytest.raises(ValueError):
        metric_cc([pair])


def test_identity_model_has_zero_cc():
    pairs = [EvalPair(seq(0, frames=6), seq(1)), EvalPair(seq(2, frames=10), seq(3, content='kick'))]
    assert metric_cc(pairs, IdentityModel()) == 0.0
    # long content is cut to the model's length
    assert pairs[1].generated.frames == 8
    assert pairs[1].generated.style == 'neutral' and pairs[1].generated.name == 'clip2'


def test_transfer_pair_labels():
    out = transfer_pair(EvalPair(seq(0), seq(1, style='old')), IdentityModel())
    assert (out.style, out.content, out.name) == ('old', 'walk', 'clip0')


def test_split_metrics():
    pairs = toy_pairs()
    table = split_metrics(pairs, training_set=training_set())
    assert list(table) == ['CC', 'SC', 'SC++']
    assert table['CC']['average'] == pytest.approx(metric_cc(pairs))
    same = [p for p in pairs if p.content.content == p.style.content]
    assert table['SC']['same_content'] == pytest.approx(metric_sc(same))
    # SC needs equal content labels, which the diff_content split never has
    assert table['SC']['diff_content'] is None


def test_category_metrics():
    pairs = toy_pairs()
    rows = category_metrics(pairs, training_set=training_set())
    labels = [(r['kind'], r['label']) for r in rows]
    assert labels == [('content', 'jump'), ('content', 'kick'), ('content', 'walk'),
                      ('style', 'neutral'), ('style', 'old'), ('style', 'proud')]
    walk = rows[2]
    assert walk['CC'] == pytest.approx(metric_cc([p for p in pairs if p.content.content == 'walk']))
    jump = rows[0]
    assert jump['CC'] is None and jump['SC'] is None and jump['SC++'] is None


def test_self_pairs_split():
    selfs = [EvalPair(seq(30), seq(30)), EvalPair(seq(31, style='old'), seq(31, style='old'))]
    table = split_metrics(toy_pairs(), IdentityModel(), training_set=training_set(), self_pairs=selfs)
    assert table['CC']['self_pairs'] == 0.0
    assert table['SC']['self_pairs'] == 0.0
    assert table['CC']['average'] == pytest.approx(metric_cc(toy_pairs()))
    assert split_metrics(toy_pairs(), training_set=training_set())['CC']['self_pairs'] is None
