from unittest import mock

import pytest

import mostyle.config as config
from mostyle.config import ConfigError


def test_merge_dicts():
    a = {'a': {'a': 1}}
    b = {'b': {'b': 2}}

    c = config.merge_dicts(a, b)

    assert c == {'a': {'a': 1}, 'b': {'b': 2}}

    a = {'a': {'a': 1}, 'b': {'c': 3}}
    c = config.merge_dicts(a, b)

    assert c == {'a': {'a': 1}, 'b': {'b': 2, 'c': 3}}

    with pytest.raises(ConfigError):
        config.merge_dicts({'a': None}, {'a': {}})


def test_make_list():
    configfile = 'foo'
    ret = ['foo',
           '/home/kilroy/bar/.mostyle-config.yml',
           '/home/kilroy/.mostyle-config.yml',
           '/home/.mostyle-config.yml']

    with mock.patch('mostyle.config.os.getcwd', return_value='/home/kilroy/bar'):
        assert config.make_list(configfile) == ret


def test_type_fixup():
    tests = (('a', 'a'),
             ('a,b,c', 'a,b,c'),
             ('[a,b,c]', ['a', 'b', 'c']),
             ('3', 3),
             ('1e-5', 1e-5),
             ('True', True))

    for arg, result in tests:
        assert config.type_fixup(arg) == result


def test_parse_override():
    assert config.parse_override('Train.BatchSize:4') == ('Train', 'BatchSize', 4)
    assert config.parse_override('Data.Manifest:/a:b.tsv') == ('Data', 'Manifest', '/a:b.tsv')
    for bad in ('Train.BatchSize', 'BatchSize:4', 'Train.Nope:1', 'Nope.Seed:1'):
        with pytest.raises(ConfigError):
            config.parse_override(bad)


def test_validate():
    config.validate({'Model': {'Dim': 8}, 'Testing': {'StatsEQ': {'x': 1}}}, 'test')
    with pytest.raises(ConfigError):
        config.validate({'Model': {'Dimension': 8}}, 'test')
    with pytest.raises(ConfigError):
        config.validate({'Testing': {'StatsNE': {}}}, 'test')


def test_config_layers(tmp_path, monkeypatch):
    monkeypatch.delenv('MOSTYLE_OUTPUT', raising=False)
    monkeypatch.chdir(tmp_path)
    path = tmp_path / 'run.yml'
    path.write_text('root: True\nModel:\n  Dim: 16\nTrain:\n  Seed: 5\n')
    c = config.config(str(path), ['Train.Seed:7'])
    assert c['Model']['Dim'] == 16
    assert c['Train']['Seed'] == 7
    assert c['Model']['Heads'] == 4
    assert config.read('Train', 'Seed') == 7


def test_desk_scale(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv('MOSTYLE_OUTPUT', str(tmp_path / 'out'))
    c = config.config(None, ['Train.DeskScale:True', 'Train.BatchSize:3'])
    assert c['Model']['Dim'] == 32
    assert c['Train']['BatchSize'] == 3
    assert c['Output']['Dir'] == str(tmp_path / 'out')


def test_missing_file(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(ConfigError):
        config.config(str(tmp_path / 'nope.yml'), [])


def test_read_write():
    config.write(9, 'Train', 'Seed')
    assert config.read('Train', 'Seed') == 9
    assert config.read('Train', 'Nope') is None
    with pytest.raises(ConfigError):
        config.read('Nope', 'Seed', 'Deeper')
    with pytest.raises(ConfigError):
        config.write(1, 'Train', 'Seed', 'Deeper')


def test_dump_roundtrip():
    config.write(11, 'Train', 'Seed')
    text = config.dump()
    h = config.config_hash()
    config.set_config(config.defaults())
    assert config.config_hash() != h
    config.config_from_string(text)
    assert config.read('Train', 'Seed') == 11
    assert config.config_hash() == h
