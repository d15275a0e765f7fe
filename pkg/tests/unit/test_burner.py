import functools

import pytest

import mostyle.burner as burner
import mostyle.stats as stats


def trivial():
    return 42,


def boom():
    raise RuntimeError('boom')


def square(x):
    return x * x


def test_stats_wrap():
    '''
    This code only runs in a separate process, so pytest doesn't do coverage
    for it, even though the loader tests use it. Do a trivial test here.
    '''
    s, ret = burner.stats_wrap(functools.partial(trivial), 'trivial')
    assert ret == (42,)
    assert s['burners']['trivial']['count'] == 1

    s, ret = burner.stats_wrap(functools.partial(boom), 'boom')
    assert isinstance(ret, RuntimeError)
    assert s['sums']['burner raised'] == 1


def test_available_cpus():
    assert burner.available_cpus() >= 1


def test_in_process():
    b = burner.Burner('square', workers=0)
    assert b.executor is None
    before = stats.burn_values('burner square total cpu time')[1] or 0
    assert b.burn_all([functools.partial(square, x) for x in range(5)]) == [0, 1, 4, 9, 16]
    assert stats.burn_values('burner square total cpu time')[1] == before + 5
    b.close()


def test_worker_processes():
    b = burner.Burner('square', workers=2)
    try:
        assert b.burn_all([functools.partial(square, x) for x in range(6)],
                          labels=[str(x) for x in range(6)]) == [0, 1, 4, 9, 16, 25]
        with pytest.raises(RuntimeError):
            b.burn_all([functools.partial(boom)])
    finally:
        b.close()
    assert b.executor is None
