import os
import collections.abc
import copy
import hashlib
import logging
import yaml

LOGGER = logging.getLogger(__name__)

__global_config = None


class ConfigError(ValueError):
    pass


'''
default_yaml exists to both set defaults and to document all
possible configuration variables.
'''

default_yaml = '''
Data:
  Manifest: null  # path<delim>style<delim>content per line
  TestManifest: null
  Delimiter: "\\t"
  Downsample: 2  # 120 fps capture -> 60 fps
  MinCrop: 64  # frames, after downsampling
  LoaderWorkers: 0  # 0 = load clips in the main process
  CacheSize: 256  # parsed clips kept in memory

Skeleton:
  # kept joint -> joint name in the source file; kept joints stay in
  # source file order
  JointMap:
    Hips: Hips
    LeftUpLeg: LeftUpLeg
    LeftLeg: LeftLeg
    LeftFoot: LeftFoot
    LeftToeBase: LeftToeBase
    RightUpLeg: RightUpLeg
    RightLeg: RightLeg
    RightFoot: RightFoot
    RightToeBase: RightToeBase
    Spine: Spine
    Spine1: Spine1
    Neck: Neck
    Head: Head
    LeftShoulder: LeftShoulder
    LeftArm: LeftArm
    LeftForeArm: LeftForeArm
    LeftHand: LeftHand
    RightShoulder: RightShoulder
    RightArm: RightArm
    RightForeArm: RightForeArm
    RightHand: RightHand
  LeftHip: LeftUpLeg  # facing direction is built from the hip line
  RightHip: RightUpLeg
  Feet:  # exactly 4: heel and toe of each foot
  - LeftFoot
  - LeftToeBase
  - RightFoot
  - RightToeBase

Contacts:
  HeightThreshold: 3.0  # cm above the per-clip floor
  VelocityThreshold: 0.5  # cm/frame

Model:
  Parts:  # ordered; each a list of kept joint names
    spine: [Hips, Spine, Spine1, Neck, Head]
    L_arm: [LeftShoulder, LeftArm, LeftForeArm, LeftHand]
    R_arm: [RightShoulder, RightArm, RightForeArm, RightHand]
    L_leg: [LeftUpLeg, LeftLeg, LeftFoot, LeftToeBase]
    R_leg: [RightUpLeg, RightLeg, RightFoot, RightToeBase]
  Dim: 64  # must be even
  ProjDim: 32  # per head
  Heads: 4
  Blocks: 3
  MaxLength: 200  # frames
  MlpHidden: 128
  InitStd: 0.02
  UsePSM: True  # False feeds the raw style feature to the generator

Loss:
  Adversarial: 1.0
  Disentangle: 1.0
  Reconstruction: 3.0
  Cycle: 3.0
  Velocity: 1.0
  Acceleration: 0.1
  FootContact: 1.0

Train:
  Seed: 0
  Iterations: 300000
  BatchSize: 8
  LearningRateEG: 1.0e-5
  LearningRateD: 1.0e-6
  CheckpointEvery: 10000  # 0 = only the final checkpoint
  ReportEvery: 100
  RunName: run
  DeskScale: False  # apply the small desk configuration below

Eval:
  PerHeadAttention: True  # also dump one attention csv per head

Output:
  Dir: runs  # MOSTYLE_OUTPUT overrides
  LossLog: losses.csv

Logging:
  LoggingLevel: INFO  # DEBUG, INFO, WARNING, ERROR, CRITICAL

Testing: {}
#  StatsEQ:
#    train iterations: 2000
#  StatsLE:
#    train recon ratio: 0.1
'''

desk_overrides = {
    ('Model', 'Dim'): 32,
    ('Model', 'ProjDim'): 16,
    ('Model', 'MlpHidden'): 64,
    ('Model', 'MaxLength'): 32,
    ('Data', 'MinCrop'): 16,
    ('Train', 'BatchSize'): 2,
    ('Train', 'Iterations'): 2000,
    ('Train', 'LearningRateEG'): 1.0e-3,
    ('Train', 'LearningRateD'): 1.0e-4,
    ('Train', 'CheckpointEvery'): 500,
    ('Train', 'ReportEvery'): 50,
}

free_form_sections = {
    'Testing': ('StatsEQ', 'StatsGE', 'StatsLE'),
}


def print_default():
    print(default_yaml)


def print_final():
    print(yaml.dump(__global_config))


def merge_dicts(a, b):
    '''
    Merge 2-level dict b into a, b values overwriting a if present.
    Changes a.
    '''
    for k1 in b:
        if k1 not in a:
            a[k1] = {}
        if a[k1] is None:
            raise ConfigError('Top level section should not be none: '+k1)
        if not isinstance(b[k1], collections.abc.Mapping):
            raise ConfigError('Top level section should be a mapping: '+k1)
        a[k1].update(b[k1])
    return a


def validate(candidate, source):
    '''
    Reject sections and keys that default_yaml does not document.
    '''
    default = yaml.safe_load(default_yaml)
    for section, body in candidate.items():
        if section not in default:
            raise ConfigError('unknown config section {} in {}'.format(section, source))
        if not body:
            continue
        if not isinstance(body, collections.abc.Mapping):
            raise ConfigError('config section {} in {} should be a mapping'.format(section, source))
        allowed = free_form_sections.get(section) or default[section]
        for key in body:
            if key not in allowed:
                raise ConfigError('unknown config key {}.{} in {}'.format(section, key, source))


def make_list(configfile):
    cwd = os.getcwd().split('/')

    filelist = []
    if configfile:
        filelist.append(configfile)
    for x in range(len(cwd), 1, -1):
        filelist.append('/'.join(cwd[0:x]) + '/.mostyle-config.yml')
    return filelist


def load_files(configfile):
    filelist = make_list(configfile)
    combined = {}

    if configfile and not os.path.isfile(configfile):
        raise ConfigError('config file {} does not exist'.format(configfile))

    for f in filelist:
        if os.path.isfile(f):
            LOGGER.info('loading %s', f)
            with open(f, 'r', encoding='utf-8') as c:
                from_file = yaml.safe_load(c) or {}
            root = from_file.get('root', False)
            if 'root' in from_file:
                del from_file['root']
            validate(from_file, f)
            combined = merge_dicts(combined, from_file)
            if root:  # it was actually true
                LOGGER.info('saw root=True in %s', f)
                break
    return combined


def parse_override(c):
    '''
    Section.Key:value -> (section, key, value)
    '''
    if ':' not in c:
        raise ConfigError('invalid config override {!r}, expected Section.Key:value'.format(c))
    lhs, rhs = c.split(':', maxsplit=1)
    if lhs.count('.') != 1:
        raise ConfigError('invalid config override {!r}, expected Section.Key:value'.format(c))
    section, key = lhs.split('.')
    validate({section: {key: None}}, 'override '+c)
    return section, key, type_fixup(rhs)


def config(configfile, overrides):
    '''
    Set the global config to the sum of the defaults, the desk-scale
    values if asked for, any config files, and Section.Key:value overrides.
    '''
    default = yaml.safe_load(default_yaml)
    file_config = load_files(configfile)
    parsed = [parse_override(c) for c in overrides or ()]

    desk = (file_config.get('Train') or {}).get('DeskScale', default['Train']['DeskScale'])
    for section, key, value in parsed:
        if (section, key) == ('Train', 'DeskScale'):
            desk = value
    if desk:
        LOGGER.info('applying desk-scale configuration')
        for (section, key), value in desk_overrides.items():
            default[section][key] = value

    combined = merge_dicts(default, file_config)
    for section, key, value in parsed:
        if combined.get(section) is None:
            combined[section] = {}
        combined[section][key] = value

    output = os.getenv('MOSTYLE_OUTPUT')
    if output:
        combined['Output']['Dir'] = output

    global __global_config
    __global_config = combined
    return combined


def config_from_string(text):
    '''
    Restore a config saved by dump(), e.g. from a checkpoint header.
    '''
    saved = yaml.safe_load(text) or {}
    validate(saved, 'saved config')
    combined = merge_dicts(yaml.safe_load(default_yaml), saved)
    global __global_config
    __global_config = combined
    return combined


def read(*l):
    if not isinstance(l, collections.abc.Sequence):
        l = (l,)
    c = __global_config
    for name in l:
        if c is None:
            LOGGER.error('invalid config key %r', l)
            raise ConfigError('invalid config key')
        c = c.get(name)
    return c


def write(value, *l):
    if not isinstance(l, collections.abc.Sequence):
        l = (l,)
    l = list(l)  # so I can pop it
    last = l.pop()
    c = __global_config
    for name in l:
        if c is None:
            LOGGER.error('invalid config key %r', l)
            raise ConfigError('invalid config key')
        c = c.get(name)

    if not isinstance(c, collections.abc.MutableMapping):
        LOGGER.error('invalid config key %r', l)
        raise ConfigError('invalid config key')

    c[last] = value


def set_config(c):
    '''
    Used in unit tests
    '''
    global __global_config
    __global_config = c


def get_config():
    return __global_config


def dump():
    return yaml.safe_dump(__global_config, sort_keys=False, default_flow_style=False)


def config_hash():
    return hashlib.sha1(dump().encode('utf-8')).hexdigest()


def defaults():
    '''
    A fresh copy of the default config, used in unit tests.
    '''
    return copy.deepcopy(yaml.safe_load(default_yaml))


def type_fixup(rhs):
    '''
    Override values are YAML, with a float fallback for things like 1e-5
    that YAML 1.1 reads as strings.
    '''
    value = yaml.safe_load(rhs)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    return value
