import os

import numpy as np
import pytest

import mostyle
import mostyle.config as config
import mostyle.export as export
import mostyle.stats as stats
import mostyle.synth as synth
from mostyle.config import ConfigError
from mostyle.dataset import Dataset


def use_manifest(path):
    config.get_config()['Data']['Manifest'] = path


def params(trainer):
    return {n: p.data.copy() for n, p in trainer.model.named_parameters()}


def test_needs_a_manifest(tiny_config):
    with pytest.raises(ConfigError, match='Data.Manifest is not set'):
        mostyle.Trainer()


def test_sample_batch(tiny_config, tiny_manifest):
    use_manifest(tiny_manifest)
    t = mostyle.Trainer()
    assert t.disentangle
    batch = t.sample_batch()
    assert len(batch) == 2
    for content, style, style_b, contacts in batch:
        assert content.length == 12 and 8 <= content.n <= 12
        assert style.style == style_b.style
        assert len(contacts) == content.n


def test_step_moves_parameters(tiny_config, tiny_manifest):
    use_manifest(tiny_manifest)
    t = mostyle.Trainer()
    before = params(t)
    disc_before = t.disc.readout.W.data.copy()
    iterations = stats.stat_value('train iterations') or 0
    parts = t.step()
    assert t.iteration == 1
    assert stats.stat_value('train iterations') == iterations + 1
    assert np.isfinite(parts.total.item())
    assert parts.reconstruction.item() > 0 and parts.disentangle.item() > 0
    assert any(not np.array_equal(before[n], p.data) for n, p in t.model.named_parameters())
    assert not np.array_equal(disc_before, t.disc.readout.W.data)
    assert stats.stat_value('train recon ratio') == 1.0


def test_disentangle_skipped(tiny_config, tmp_path):
    path = synth.write_dataset(str(tmp_path / 'one'), styles=['old'], contents=['walk'], frames=40)
    use_manifest(path)
    t = mostyle.Trainer()
    assert not t.disentangle
    skipped = stats.stat_value('train disentangle skipped') or 0
    parts = t.step()
    assert parts.disentangle == 0.0
    assert stats.stat_value('train disentangle skipped') == skipped + 1


def test_train_writes_outputs(tiny_config, tiny_manifest):
    use_manifest(tiny_manifest)
    t = mostyle.Trainer(no_test=True)
    t.train()
    outdir = t.outdir
    for name in ('ckpt-2.most', 'ckpt-4.most', 'final.most', 'final.most.stats', 'stamp.yml', 'losses.csv'):
        assert os.path.exists(os.path.join(outdir, name)), name
    rows = export.read_loss_log(os.path.join(outdir, 'losses.csv'))
    assert [r['iteration'] for r in rows] == ['1', '2', '3', '4']
    assert all(float(r['adv_d']) < 0 for r in rows)


def test_resume_matches_straight_run(tiny_config, tiny_manifest):
    use_manifest(tiny_manifest)
    ds = Dataset.from_manifest(tiny_manifest)
    straight = mostyle.Trainer(no_test=True, dataset=ds)
    straight.train()
    straight_rows = export.read_loss_log(os.path.join(straight.outdir, 'losses.csv'))

    config.get_config()['Train']['RunName'] = 'resumed'
    resumed = mostyle.Trainer(load=os.path.join(straight.outdir, 'ckpt-2.most'), no_test=True, dataset=ds)
    assert resumed.iteration == 2
    resumed.train()
    for n, p in resumed.model.named_parameters():
        assert np.array_equal(p.data, dict(straight.model.named_parameters())[n].data), n
    rows = export.read_loss_log(os.path.join(resumed.outdir, 'losses.csv'))
    assert rows == straight_rows[2:]


def test_resume_rejects_other_joints(tiny_config, tiny_manifest, tmp_path):
    use_manifest(tiny_manifest)
    t = mostyle.Trainer()
    path = str(tmp_path / 'c.most')
    t.joints = t.joints[::-1]
    t.save(path)
    with pytest.raises(mostyle.checkpoint.CheckpointError):
        mostyle.Trainer(load=path)


def test_non_finite_loss_saves_state(tiny_config, tiny_manifest):
    use_manifest(tiny_manifest)
    t = mostyle.Trainer()
    with pytest.raises(FloatingPointError):
        t.check_finite('generator', float('nan'))
    assert os.path.exists(os.path.join(t.outdir, 'nan-0.most'))


def test_same_seed_runs_write_identical_logs(tiny_config, tiny_manifest):
    use_manifest(tiny_manifest)
    logs = []
    for name in ('first', 'second'):
        config.get_config()['Train']['RunName'] = name
        t = mostyle.Trainer(no_test=True)
        t.train()
        with open(os.path.join(t.outdir, 'losses.csv')) as f:
            logs.append(f.read())
    assert logs[0] == logs[1]
    assert len(logs[0].splitlines()) == 5
