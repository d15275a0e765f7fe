'''
Run counters and timers: training and evaluation code bumps named
counters, wraps cpu-heavy work in record_burn and wall-clock work in
record_latency. report() logs everything; check() compares against the
Testing config section and sets exitstatus.

Counters and cpu timers travel between processes (raw/update) and into
checkpoints (save/load); latency histograms stay local.
'''

import logging
import pickle
import time
from contextlib import contextmanager

from hdrh.histogram import HdrHistogram
from sortedcollections import ValueSortedDict

from . import config

LOGGER = logging.getLogger(__name__)

SNAPSHOT_TAG = 'mostyle stats 1'
BIGGEST = 10

start_time = time.time()
start_cpu = time.process_time()
maxes = {}
sums = {}
sets = {}
burners = {}
latencies = {}
exitstatus = 0


class Timer:
    '''
    Call count, total seconds, and the BIGGEST slowest labeled calls
    (most expensive first). Latency timers also keep a millisecond histogram.
    '''
    def __init__(self, histogram=False):
        self.count = 0
        self.time = 0.0
        self.biggest = None
        self.hist = HdrHistogram(1, 600 * 1000, 2) if histogram else None

    @property
    def avg(self):
        return self.time / self.count if self.count else None

    def note(self, label, elapsed):
        if self.biggest is None:
            self.biggest = ValueSortedDict()
        self.biggest[label or 'none'] = -elapsed
        while len(self.biggest) > BIGGEST:
            self.biggest.popitem()

    def add(self, count, seconds, biggest=None):
        self.count += count
        self.time += seconds
        for label, negative in (biggest or {}).items():
            self.note(label, -negative)

    def plain(self):
        return {'count': self.count, 'time': self.time, 'biggest': dict(self.biggest or {})}


def stats_max(name, value):
    maxes[name] = max(maxes.get(name, value), value)


def stats_sum(name, value):
    sums[name] = sums.get(name, 0) + value
    return sums[name]


def stats_set(name, value):
    sets[name] = value


def _timer(table, name, histogram=False):
    if name not in table:
        table[name] = Timer(histogram=histogram)
    return table[name]


def record_a_burn(name, start, label=None):
    elapsed = time.process_time() - start
    timer = _timer(burners, name)
    previous = timer.avg
    timer.add(1, elapsed)
    # only calls far above the running average, and long enough to matter
    if previous is not None and elapsed > 10 * previous and elapsed > 0.015:
        timer.note(label, elapsed)


def record_a_latency(name, start, label=None, elapsedmin=10.0):
    elapsed = time.time() - start
    timer = _timer(latencies, name, histogram=True)
    timer.add(1, elapsed)
    timer.hist.record_value(max(1, int(elapsed * 1000)))
    if elapsed > elapsedmin:
        timer.note(label, elapsed)


def update_cpu_burn(name, count, seconds, biggest=None):
    _timer(burners, name).add(count, seconds, biggest)


@contextmanager
def record_burn(name, label=None):
    start = time.process_time()
    try:
        yield
    finally:
        record_a_burn(name, start, label=label)


@contextmanager
def record_latency(name, label=None, elapsedmin=10.0):
    start = time.time()
    try:
        yield
    finally:
        record_a_latency(name, start, label=label, elapsedmin=elapsedmin)


def _report_biggest(timer, what):
    if timer.biggest:
        LOGGER.info('    biggest %s', what)
        for label, negative in timer.biggest.items():
            LOGGER.info('      %.3fs: %s', -negative, label)


def report():
    LOGGER.info('Stats report:')
    for fmt, table in (('  %s: %d', sums), ('  %s: %g', maxes), ('  %s: %g', sets)):
        for name in sorted(table):
            LOGGER.info(fmt, name, table[name])

    LOGGER.info('CPU burn report:')
    for name, timer in sorted(burners.items(), key=lambda kv: kv[1].time, reverse=True):
        LOGGER.info('  %s has %d calls taking %.3f cpu seconds.', name, timer.count, timer.time)
        _report_biggest(timer, 'burners')

    LOGGER.info('Latency report:')
    for name, timer in sorted(latencies.items(), key=lambda kv: kv[1].time, reverse=True):
        LOGGER.info('  %s has %d calls taking %.3f clock seconds.', name, timer.count, timer.time)
        pcts = [timer.hist.get_value_at_percentile(p) / 1000. for p in (50.0, 90.0, 99.0)]
        LOGGER.info('  %s 50/90/99%%tiles are: %.3f/%.3f/%.3f seconds', name, *pcts)
        _report_biggest(timer, 'latencies')

    elapsed = time.time() - start_time
    LOGGER.info('Summary:')
    LOGGER.info('  Elapsed time is %.3f seconds', elapsed)
    LOGGER.info('  Main process cpu time is %.3f seconds', time.process_time() - start_cpu)
    stats_set('elapsed', elapsed)
    if sums.get('train iterations') and elapsed > 0:
        LOGGER.info('  Training rate is %.2f iterations/second', sums['train iterations'] / elapsed)


def stat_value(name):
    '''
    Counter value, or a cpu timer's total seconds; None if never recorded.
    '''
    for table in (maxes, sums, sets):
        if name in table:
            return table[name]
    if name in burners:
        return burners[name].time
    return None


def burn_values(name):
    '''
    (seconds, count) of a cpu timer, or (None, None).
    '''
    if name not in burners:
        return None, None
    return burners[name].time, burners[name].count


def check(no_test=False):
    '''
    Compare stats against Testing.StatsEQ/StatsGE/StatsLE and set exitstatus.
    '''
    if no_test:
        return

    global exitstatus
    comparisons = (('StatsEQ', '==', lambda v, want: v == want),
                   ('StatsGE', '>=', lambda v, want: v >= want),
                   ('StatsLE', '<=', lambda v, want: v <= want))
    for key, word, ok in comparisons:
        wanted = config.read('Testing', key)
        if not wanted:
            continue
        for s in wanted:
            value = stat_value(s)
            if value is None and wanted[s] == 0:
                continue
            elif value is None:
                LOGGER.error('Stat %s does not exist, should be %s %s', s, word, wanted[s])
                exitstatus = 1
            elif not ok(value, wanted[s]):
                LOGGER.error('Stat %s=%s is not %s %s', s, value, word, wanted[s])
                exitstatus = 1
            else:
                LOGGER.debug('Stat %s=%s is %s %s', s, value, word, wanted[s])


def raw():
    '''
    Picklable counters and cpu timers for update() in another process.
    '''
    return {'maxes': dict(maxes), 'sums': dict(sums),
            'burners': {name: timer.plain() for name, timer in burners.items()}}


def update(snapshot):
    for name, value in snapshot['maxes'].items():
        stats_max(name, value)
    for name, value in snapshot['sums'].items():
        stats_sum(name, value)
    for name, t in snapshot['burners'].items():
        update_cpu_burn(name, t['count'], t['time'], t['biggest'])


def clear():
    '''
    Forget counters and timers, so a worker's next raw() holds only new work.
    '''
    global maxes, sums
    maxes = {}
    sums = {}
    burners.clear()
    latencies.clear()


def save(f):
    snapshot = raw()
    snapshot['start_time'] = start_time
    pickle.dump((SNAPSHOT_TAG, snapshot), f)


def load(f):
    '''
    Replace counters and cpu timers with a saved snapshot.
    '''
    try:
        tag, snapshot = pickle.load(f)
    except (pickle.UnpicklingError, EOFError, ValueError, TypeError) as e:
        raise ValueError('invalid stats section in savefile: {}'.format(e))
    if tag != SNAPSHOT_TAG:
        raise ValueError('invalid stats section in savefile: {!r}'.format(tag))
    global start_time, maxes, sums
    start_time = snapshot['start_time']
    maxes = {}
    sums = {}
    burners.clear()
    update(snapshot)
