# -*- coding: utf-8 -*-
"""
ZidLab — Worker pool module.

Runs independent seeded jobs either on daemon threads fed by a queue or
on a process pool. Results come back in job order, so a parallel run
writes the same files as a serial one.

Experiment jobs are pure-Python and CPU bound; threads share one
interpreter lock and only overlap I/O, so the experiment commands use
processes. Process jobs must be picklable: a module-level function and
plain-data arguments.
"""

import logging
import queue
import threading
from concurrent.futures import ProcessPoolExecutor

from ..config import thread_count, setup_logging, POOLS

log = logging.getLogger(__name__)

__all__ = ["run_jobs", "POOLS"]

_DONE = object()


def run_jobs(fn, jobs, threads=None, pool="threads"):
    """Apply `fn` to every job; returns results in job order.

    `threads` caps the worker count (ZIDLAB_THREADS when None). The first
    exception raised by any job, by job index, is re-raised.
    """
    jobs = list(jobs)
    if threads is None:
        threads = thread_count()
    threads = max(1, min(threads, len(jobs)))
    if threads == 1:
        return [fn(job) for job in jobs]
    if pool == "processes":
        return _run_processes(fn, jobs, threads)
    return _run_threads(fn, jobs, threads)


def _init_process(level):
    setup_logging().setLevel(level)


def _run_processes(fn, jobs, workers):
    log.debug("running %d jobs on %d processes", len(jobs), workers)
    level = logging.getLogger("zidlab_pkg").getEffectiveLevel()
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_process,
                             initargs=(level,)) as executor:
        # map yields in submission order and raises at the first failed job
        return list(executor.map(fn, jobs))


def _run_threads(fn, jobs, threads):
    todo = queue.Queue()
    for index, job in enumerate(jobs):
        todo.put((index, job))
    for _ in range(threads):
        todo.put(_DONE)

    results = [None] * len(jobs)
    errors = []
    lock = threading.Lock()

    def worker():
        while True:
            item = todo.get()
            if item is _DONE:
                return
            index, job = item
            with lock:
                if errors:
                    continue
            try:
                results[index] = fn(job)
            except Exception as exc:
                with lock:
                    errors.append((index, exc))

    workers = [
        threading.Thread(target=worker, daemon=True, name=f"zidlab-worker-{i}")
        for i in range(threads)
    ]
    log.debug("running %d jobs on %d threads", len(jobs), threads)
    for t in workers:
        t.start()
    for t in workers:
        t.join()
    if errors:
        raise min(errors, key=lambda e: e[0])[1]
    return results
