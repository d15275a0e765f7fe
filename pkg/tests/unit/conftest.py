import pytest

import mostyle.config as config
import mostyle.dataset as dataset


@pytest.fixture(autouse=True)
def default_config():
    '''
    Every test starts from the documented defaults.
    '''
    config.set_config(config.defaults())
    dataset.clear_cache()
    yield config.get_config()


@pytest.fixture
def desk_config():
    '''
    The small desk-scale model, as Train.DeskScale:True would set it.
    '''
    c = config.defaults()
    for (section, key), value in config.desk_overrides.items():
        c[section][key] = value
    config.set_config(c)
    return c


@pytest.fixture
def tiny_config(tmp_path):
    '''
    A model small enough to train a few iterations inside a unit test,
    writing under tmp_path.
    '''
    c = config.defaults()
    c['Model'].update({'Dim': 8, 'ProjDim': 4, 'Heads': 2, 'Blocks': 2, 'MaxLength': 12, 'MlpHidden': 16,
                       'InitStd': 0.3})
    c['Data']['MinCrop'] = 8
    c['Train'].update({'BatchSize': 2, 'Iterations': 4, 'CheckpointEvery': 2, 'ReportEvery': 1,
                       'LearningRateEG': 1e-3, 'LearningRateD': 1e-4})
    c['Output']['Dir'] = str(tmp_path / 'runs')
    config.set_config(c)
    return c


@pytest.fixture
def tiny_manifest(tmp_path):
    import mostyle.synth as synth
    return synth.write_dataset(str(tmp_path / 'data'), styles=['neutral', 'old'], contents=['walk', 'kick'],
                               frames=40)
