'''
Training objectives. Distances are sums of Euclidean norms of the
per-frame joint, root and velocity vector differences over valid frames.
'''

import logging

import numpy as np

from . import tensor as T
from .tensor import ShapeError, no_grad

LOGGER = logging.getLogger(__name__)

LOG_CLAMP = 1e-7


class SamplingError(ValueError):
    pass


class LossBreakdown:
    fields = ('disentangle', 'velocity', 'acceleration', 'foot', 'adv_g', 'adv_d',
              'reconstruction', 'cycle_style', 'cycle_content', 'total')

    def __init__(self, **kwargs):
        for f in self.fields:
            setattr(self, f, kwargs.pop(f, 0.0))
        if kwargs:
            raise TypeError('unknown loss terms: {}'.format(sorted(kwargs)))

    def values(self):
        '''
        Plain floats, in field order.
        '''
        return [_value(getattr(self, f)) for f in self.fields]

    def as_dict(self):
        return dict(zip(self.fields, self.values()))

    def __repr__(self):
        return 'LossBreakdown({})'.format(', '.join('{}={:.6g}'.format(k, v) for k, v in self.as_dict().items()))


def _value(x):
    return x.item() if isinstance(x, T.DTensor) else float(x)


def _check_lengths(A, B):
    if A.joints.shape != B.joints.shape or not np.array_equal(A.mask, B.mask):
        raise ShapeError('seq_distance: motions of shape {} and {} with {} and {} valid frames'.format(
            A.joints.shape, B.joints.shape, A.n, B.n))


def seq_distance(A, B):
    _check_lengths(A, B)
    mask = A.mask
    dj = T.valid_rows(A.joints, mask) - T.valid_rows(B.joints, mask)
    dr = T.valid_rows(A.root, mask) - T.valid_rows(B.root, mask)
    dv = T.valid_rows(A.vel, mask) - T.valid_rows(B.vel, mask)
    return T.norm_lastdim(dj).sum() + T.norm_lastdim(dr).sum() + T.norm_lastdim(dv).sum()


def check_triplet(style_a, style_b):
    if style_a.style != style_b.style:
        raise SamplingError('disentangle pair has styles {!r} and {!r}'.format(style_a.style, style_b.style))
    if style_a.content == style_b.content and style_a.name != style_b.name:
        raise SamplingError('disentangle pair shares content {!r}'.format(style_a.content))


def loss_disentangle(model, content, style_a, style_b, generated_a=None):
    '''
    Distance between the content stylized by two clips of one style. The
    second branch is computed without a gradient path.
    '''
    check_triplet(style_a, style_b)
    if generated_a is None:
        generated_a = model(content, style_a)
    with no_grad():
        generated_b = model(content, style_b)
    return seq_distance(generated_a, generated_b.detach())


def loss_physics(generated, contacts, weights, feet):
    '''
    Returns (weighted sum, velocity, acceleration, foot). Contact frames come from
    the content motion; a contact at frame t penalizes the foot's change
    from t to t+1.
    '''
    n = generated.n
    if n < 3:
        raise ValueError('physics regularizers need at least 3 frames, got {}'.format(n))
    if len(contacts) != n:
        raise ShapeError('contact mask covers {} frames, motion has {}'.format(len(contacts), n))
    mask = generated.mask
    joints = T.valid_rows(generated.joints, mask)
    root = T.valid_rows(generated.root, mask)
    vel = T.valid_rows(generated.vel, mask)

    dj = joints[1:] - joints[:-1]
    dr = root[1:] - root[:-1]
    r_vel = (T.norm_lastdim(dj).sum() + T.norm_lastdim(dr).sum()) * (1.0 / (n - 1))

    ddj = dj[1:] - dj[:-1]
    dv = vel[1:] - vel[:-1]
    r_acc = (T.norm_lastdim(ddj).sum() + T.norm_lastdim(dv[:-1]).sum()) * (1.0 / (n - 2))

    contact = contacts.mask[:-1].astype(np.float64)
    counts = contact.sum(axis=0)
    scale = np.where(counts > 0, contact / np.where(counts > 0, counts, 1.0), 0.0)
    foot_steps = T.norm_lastdim(T.take(dj, feet, axis=1))
    r_foot = (foot_steps * scale).sum()

    total = r_vel * weights['Velocity'] + r_acc * weights['Acceleration'] + r_foot * weights['FootContact']
    return total, r_vel, r_acc, r_foot


def _log_clamped(p):
    return T.log(T.clip(p, LOG_CLAMP, 1.0 - LOG_CLAMP))


def loss_adversarial(disc, real, generated):
    '''
    (discriminator term, generator term): log D(real) + log(1 - D(generated)), which the
    discriminator maximizes, and log(1 - D(generated)), which the
    generator minimizes.
    '''
    d_real = disc(real)
    d_fake = disc(generated)
    fake_term = _log_clamped(1.0 - d_fake)
    return _log_clamped(d_real) + fake_term, fake_term


def generator_adversarial(disc, generated):
    '''
    The generator's half of loss_adversarial alone: log(1 - D(generated)).
    '''
    return _log_clamped(1.0 - disc(generated))


def loss_reconstruction(model, content, generated=None):
    if generated is None:
        generated = model(content, content)
    return seq_distance(generated, content)


def loss_cycle(model, content, style, generated):
    '''
    (|model(style, generated) - style|, |model(generated, content) - content|)
    '''
    cyc_s = seq_distance(model(style, generated), style)
    cyc_c = seq_distance(model(generated, content), content)
    return cyc_s, cyc_c


def total_loss(parts, weights):
    '''
    Weighted sum of every generator-side term. Physics weights apply to
    the individual regularizers; adv_d belongs to the discriminator.
    '''
    return (parts.disentangle * weights['Disentangle']
            + parts.velocity * weights['Velocity']
            + parts.acceleration * weights['Acceleration']
            + parts.foot * weights['FootContact']
            + parts.adv_g * weights['Adversarial']
            + parts.reconstruction * weights['Reconstruction']
            + (parts.cycle_style + parts.cycle_content) * weights['Cycle'])
