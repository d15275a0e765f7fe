'''
Checkpoint container: magic, format version, a JSON header indexing named
tensors, then their values as little-endian float64.
'''

import json
import logging
import struct

import numpy as np

LOGGER = logging.getLogger(__name__)

MAGIC = b'MOSTCKPT'
VERSION = 1
SECTIONS = ('model', 'discriminator', 'adam_eg', 'adam_d')
_PREAMBLE = struct.Struct('<IQ')


class CheckpointError(ValueError):
    pass


def pack(sections, meta):
    '''
    sections: {section: {tensor name: ndarray}}; meta: JSON-able dict.
    '''
    index = []
    chunks = []
    offset = 0
    for section in sorted(sections):
        for name in sorted(sections[section]):
            arr = np.ascontiguousarray(sections[section][name], dtype='<f8')
            index.append({'section': section, 'name': name, 'shape': list(arr.shape), 'offset': offset})
            chunks.append(arr.tobytes())
            offset += arr.size
    header = dict(meta)
    header['tensors'] = index
    header['count'] = offset
    encoded = json.dumps(header, sort_keys=True, separators=(',', ':')).encode('utf-8')
    return MAGIC + _PREAMBLE.pack(VERSION, len(encoded)) + encoded + b''.join(chunks)


def unpack(data):
    '''
    Returns (meta, sections).
    '''
    if data[:len(MAGIC)] != MAGIC:
        raise CheckpointError('not a checkpoint: bad magic')
    start = len(MAGIC) + _PREAMBLE.size
    if len(data) < start:
        raise CheckpointError('truncated checkpoint preamble')
    version, length = _PREAMBLE.unpack(data[len(MAGIC):start])
    if version != VERSION:
        raise CheckpointError('checkpoint format version {}, this code reads {}'.format(version, VERSION))
    try:
        header = json.loads(data[start:start + length].decode('utf-8'))
    except ValueError as e:
        raise CheckpointError('corrupt checkpoint header: {}'.format(e))
    payload = data[start + length:]
    if len(payload) != 8 * header.get('count', -1):
        raise CheckpointError('checkpoint payload is {} bytes, header wants {} values'.format(
            len(payload), header.get('count')))
    values = np.frombuffer(payload, dtype='<f8')

    sections = {}
    for t in header.pop('tensors'):
        size = int(np.prod(t['shape'])) if t['shape'] else 1
        arr = values[t['offset']:t['offset'] + size].astype(np.float64).reshape(tuple(t['shape']))
        sections.setdefault(t['section'], {})[t['name']] = arr
    header.pop('count')
    return header, sections


def save(path, model, disc, adam_eg, adam_d, iteration, rng_state, config_text, extra=None):
    step_eg, opt_eg = adam_eg.state_dict()
    step_d, opt_d = adam_d.state_dict()
    sections = {'model': model.state_dict(), 'discriminator': disc.state_dict(),
                'adam_eg': opt_eg, 'adam_d': opt_d}
    meta = {'iteration': int(iteration), 'rng': rng_state, 'config': config_text,
            'adam_steps': {'adam_eg': step_eg, 'adam_d': step_d}}
    meta.update(extra or {})
    data = pack(sections, meta)
    with open(path, 'wb') as f:
        f.write(data)
    LOGGER.info('saved checkpoint %s at iteration %d', path, iteration)
    return data


def read(path):
    with open(path, 'rb') as f:
        data = f.read()
    try:
        return unpack(data)
    except CheckpointError as e:
        raise CheckpointError('{}: {}'.format(path, e))


def restore(meta, sections, model, disc=None, adam_eg=None, adam_d=None):
    '''
    Load parameters (and optimizer state when given) into live objects.
    '''
    try:
        model.load_state_dict(sections.get('model', {}))
        if disc is not None:
            disc.load_state_dict(sections.get('discriminator', {}))
        if adam_eg is not None:
            adam_eg.load_state_dict(meta['adam_steps']['adam_eg'], sections.get('adam_eg', {}))
        if adam_d is not None:
            adam_d.load_state_dict(meta['adam_steps']['adam_d'], sections.get('adam_d', {}))
    except ValueError as e:
        raise CheckpointError('checkpoint does not match this model: {}'.format(e))
