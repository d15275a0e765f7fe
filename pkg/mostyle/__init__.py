'''
Motion style transfer: training loop
'''

import logging
import os

import numpy as np

from . import checkpoint
from . import config
from . import export
from . import stats
from . import tensor as T
from .config import ConfigError
from .contacts import detect_foot_contacts, foot_indices
from .dataset import Dataset
from .discriminator import Discriminator
from .embedding import HyperParams, PartGrouping
from .losses import (LossBreakdown, generator_adversarial, loss_adversarial, loss_cycle, loss_disentangle,
                     loss_physics, loss_reconstruction, total_loss)
from .model import MotionStyleTransfer
from .motion import MotionTensors
from .optim import Adam

LOGGER = logging.getLogger(__name__)
__title__ = 'mostyle'
__license__ = 'Apache 2.0'
__version__ = export.code_version()

RATIO_STATS = {'reconstruction': 'train recon ratio', 'disentangle': 'train disentangle ratio'}


class Trainer:
    '''
    Each iteration takes one discriminator step and then one step of the
    embedding, encoder, modulator and generator on the same batch.
    '''
    def __init__(self, load=None, no_test=False, dataset=None):
        self.no_test = no_test
        self.hp = HyperParams.from_config()
        self.seed = int(config.read('Train', 'Seed'))
        self.iterations = int(config.read('Train', 'Iterations'))
        self.checkpoint_every = int(config.read('Train', 'CheckpointEvery') or 0)
        self.report_every = int(config.read('Train', 'ReportEvery') or 0)
        self.min_crop = int(config.read('Data', 'MinCrop'))

        if dataset is None:
            manifest = config.read('Data', 'Manifest')
            if not manifest:
                raise ConfigError('Data.Manifest is not set')
            dataset = Dataset.from_manifest(manifest)
        self.dataset = dataset
        self.joints = list(dataset.skeleton.names)
        self.grouping = PartGrouping.from_config(self.joints)
        self.feet = foot_indices(self.joints)

        self.model = MotionStyleTransfer(self.grouping, self.hp, seed=self.seed)
        self.disc = Discriminator(np.random.default_rng([self.seed, 1]), self.grouping, self.hp)
        self.adam_eg = Adam(self.model.named_parameters(), self.hp.lr_eg)
        self.adam_d = Adam(self.disc.named_parameters(), self.hp.lr_d)
        self.rng = np.random.default_rng([self.seed, 2])
        self.iteration = 0
        self.initial = {}
        self.recent = {'reconstruction': [], 'disentangle': []}

        self.disentangle = self.hp.weights['Disentangle'] > 0 and dataset.can_disentangle
        if self.hp.weights['Disentangle'] > 0 and not dataset.can_disentangle:
            LOGGER.warning('disentangle loss disabled: no style label spans 2 content labels')

        self.outdir = os.path.join(config.read('Output', 'Dir'), config.read('Train', 'RunName'))
        os.makedirs(self.outdir, exist_ok=True)
        log_path = os.path.join(self.outdir, config.read('Output', 'LossLog'))
        if load is not None:
            self.load(load)
            export.truncate_loss_log(log_path, self.iteration)
        elif os.path.exists(log_path):
            os.unlink(log_path)
        self.loss_log = export.LossLog(log_path, LossBreakdown.fields)
        export.write_stamp(self.outdir, seed=self.seed)

    def sample_batch(self):
        T_max = self.hp.max_length
        batch = []
        for _ in range(self.hp.batch):
            trip = self.dataset.sample(self.rng, self.min_crop, T_max, disentangle=self.disentangle)
            contacts = detect_foot_contacts(trip.content, self.feet)
            batch.append((MotionTensors.from_sequence(trip.content, T_max),
                          MotionTensors.from_sequence(trip.style, T_max),
                          None if trip.style_b is None else MotionTensors.from_sequence(trip.style_b, T_max),
                          contacts))
        return batch

    def discriminator_step(self, batch):
        with T.no_grad():
            fakes = [self.model(content, style) for content, style, _, _ in batch]
        self.disc.zero_grad()
        adv = 0.0
        for (content, style, _, _), fake in zip(batch, fakes):
            adv = adv + loss_adversarial(self.disc, style, fake.detach())[0]
        adv = adv * (1.0 / len(batch))
        self.check_finite('discriminator', adv.item())
        T.backward(-adv)
        self.adam_d.step()
        return adv.item()

    def generator_step(self, batch):
        self.model.zero_grad()
        weights = self.hp.weights
        sums = dict.fromkeys(('disentangle', 'velocity', 'acceleration', 'foot', 'adv_g', 'reconstruction',
                              'cycle_style', 'cycle_content'), 0.0)
        for content, style, style_b, contacts in batch:
            generated = self.model(content, style)
            sums['adv_g'] = sums['adv_g'] + generator_adversarial(self.disc, generated)
            sums['reconstruction'] = sums['reconstruction'] + loss_reconstruction(self.model, content)
            cyc_s, cyc_c = loss_cycle(self.model, content, style, generated)
            sums['cycle_style'] = sums['cycle_style'] + cyc_s
            sums['cycle_content'] = sums['cycle_content'] + cyc_c
            _, r_vel, r_acc, r_foot = loss_physics(generated, contacts, weights, self.feet)
            sums['velocity'] = sums['velocity'] + r_vel
            sums['acceleration'] = sums['acceleration'] + r_acc
            sums['foot'] = sums['foot'] + r_foot
            if style_b is not None:
                sums['disentangle'] = sums['disentangle'] + loss_disentangle(
                    self.model, content, style, style_b, generated_a=generated)
        scale = 1.0 / len(batch)
        parts = LossBreakdown(**{k: v * scale for k, v in sums.items()})
        parts.total = total_loss(parts, weights)
        self.check_finite('generator', parts.total.item(), parts)
        T.backward(parts.total)
        self.adam_eg.step()
        self.disc.zero_grad()
        return parts

    def check_finite(self, what, value, parts=None):
        if np.isfinite(value):
            return
        path = os.path.join(self.outdir, 'nan-{}.most'.format(self.iteration))
        self.save(path)
        LOGGER.error('%s loss is %r at iteration %d; state saved to %s', what, value, self.iteration, path)
        if parts is not None:
            LOGGER.error('last loss breakdown: %r', parts)
        raise FloatingPointError('{} loss is not finite at iteration {}'.format(what, self.iteration))

    def step(self):
        batch = self.sample_batch()
        with stats.record_latency('train step', label=str(self.iteration)):
            with stats.record_burn('train discriminator step'):
                adv_d = self.discriminator_step(batch)
            with stats.record_burn('train generator step'):
                parts = self.generator_step(batch)
        parts.adv_d = adv_d
        self.iteration += 1
        stats.stats_sum('train iterations', 1)
        if not self.disentangle:
            stats.stats_sum('train disentangle skipped', 1)
        self.loss_log.write(self.iteration, parts)
        self.track(parts)
        return parts

    def track(self, parts):
        '''
        Ratios of recent to first-window reconstruction and disentangle losses.
        '''
        values = parts.as_dict()
        window = max(self.report_every, 1)
        for key, recent in self.recent.items():
            recent.append(values[key])
            del recent[:-window]
            if key not in self.initial and len(recent) == window:
                self.initial[key] = float(np.mean(recent))
            if self.initial.get(key):
                stats.stats_set(RATIO_STATS[key], float(np.mean(recent)) / self.initial[key])
        if self.report_every and self.iteration % self.report_every == 0:
            LOGGER.info('iteration %d: total %.4f recon %.4f cycle %.4f/%.4f disentangle %.4f adv %.4f/%.4f',
                        self.iteration, values['total'], values['reconstruction'], values['cycle_style'],
                        values['cycle_content'], values['disentangle'], values['adv_g'], values['adv_d'])

    def train(self):
        try:
            while self.iteration < self.iterations:
                self.step()
                if self.checkpoint_every and self.iteration % self.checkpoint_every == 0:
                    self.save(os.path.join(self.outdir, 'ckpt-{}.most'.format(self.iteration)))
            self.save(os.path.join(self.outdir, 'final.most'))
        finally:
            self.loss_log.close()
            stats.report()
            stats.check(no_test=self.no_test)

    def save(self, path):
        checkpoint.save(path, self.model, self.disc, self.adam_eg, self.adam_d, self.iteration,
                        self.rng.bit_generator.state, config.dump(),
                        extra={'joints': self.joints, 'initial': self.initial})
        with open(path + '.stats', 'wb') as f:
            stats.save(f)
        stats.stats_sum('checkpoint saves', 1)

    def load(self, path):
        meta, sections = checkpoint.read(path)
        if meta.get('joints') != self.joints:
            raise checkpoint.CheckpointError('{} was trained on joints {}'.format(path, meta.get('joints')))
        checkpoint.restore(meta, sections, self.model, self.disc, self.adam_eg, self.adam_d)
        self.iteration = int(meta['iteration'])
        self.rng.bit_generator.state = meta['rng']
        self.initial = dict(meta.get('initial') or {})
        if meta['config'] != config.dump():
            LOGGER.warning('resuming %s under a different config than it was saved with', path)
        if os.path.exists(path + '.stats'):
            with open(path + '.stats', 'rb') as f:
                stats.load(f)
        LOGGER.info('resumed from %s at iteration %d', path, self.iteration)
