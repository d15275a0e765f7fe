import logging
from concurrent.futures import ProcessPoolExecutor
import functools
import traceback

import psutil

from . import stats
from . import config

LOGGER = logging.getLogger(__name__)


def stats_wrap(partial, name, label=None):
    '''
    Helper function to propagate stats back to the main process.
    An exception is returned rather than raised, so that it arrives with
    the stats.
    '''
    stats.clear()
    with stats.record_burn(name, label=label):
        try:
            ret = partial()
        except Exception as e:
            stats.stats_sum('burner raised', 1)
            LOGGER.info('burner process sees an exception %r', e)
            traceback.print_exc()
            ret = e
    s = stats.raw()
    return s, ret


def available_cpus():
    p = psutil.Process()
    try:
        return len(p.cpu_affinity())
    except AttributeError:  # no affinity on this platform
        return psutil.cpu_count() or 1


class Burner:
    '''
    Use processes for cpu-burning stuff like parsing and retargeting clips.

    Results come back in submission order, whatever the worker count, so
    anything seeded downstream sees the same sequence.
    '''
    def __init__(self, name, workers=None):
        if workers is None:
            workers = int(config.read('Data', 'LoaderWorkers') or 0)
        self.name = name
        self.workers = workers
        self.executor = ProcessPoolExecutor(workers) if workers > 0 else None
        cpus = available_cpus()
        if workers > cpus:
            LOGGER.warning('fewer cpus (%d) than burner processes (%d), performance will suffer',
                           cpus, workers)

    def burn_all(self, partials, labels=None):
        '''
        Run every partial and return the results in order. Use functools.partial
        to wrap up your work function and its args.
        '''
        name = 'burner {} total cpu time'.format(self.name)
        labels = labels or [None] * len(partials)

        if self.executor is None:
            ret = []
            for partial, label in zip(partials, labels):
                with stats.record_burn(name, label=label):
                    ret.append(partial())
            return ret

        futures = [self.executor.submit(functools.partial(stats_wrap, partial, name, label=label))
                   for partial, label in zip(partials, labels)]
        ret = []
        for f in futures:
            s, r = f.result()
            stats.update(s)
            if isinstance(r, Exception):
                raise r
            ret.append(r)
        return ret

    def close(self):
        if self.executor is not None:
            self.executor.shutdown()
            self.executor = None
