# -*- coding: utf-8 -*-
import pickle
import threading

import pytest

from zidlab_pkg.cli.commands import explore_job
from zidlab_pkg.cli.workers import run_jobs
from zidlab_pkg.errors import NoConvergence, StateCapExceeded, ValidationError
from zidlab_pkg.gridworld import load_map
from zidlab_pkg.rollout import random_explore


def test_results_keep_job_order():
    assert run_jobs(lambda x: x * x, range(20), threads=4) == [x * x for x in range(20)]


def test_serial_and_threaded_agree():
    fn = lambda job: sum(range(job))  # noqa: E731
    assert run_jobs(fn, range(30), threads=1) == run_jobs(fn, range(30), threads=5)


def test_threads_are_named_workers():
    names = run_jobs(lambda _: threading.current_thread().name, range(6), threads=3)
    assert all(name.startswith("zidlab-worker-") for name in names)


def test_job_error_is_reraised():
    def fn(job):
        if job == 3:
            raise ValueError(job)
        return job

    with pytest.raises(ValueError) as info:
        run_jobs(fn, range(10), threads=3)
    assert info.value.args == (3,)


def test_no_jobs():
    assert run_jobs(lambda x: x, [], threads=4) == []
    assert run_jobs(abs, [], threads=4, pool="processes") == []


def test_process_pool_keeps_job_order():
    jobs = list(range(-10, 10))
    assert run_jobs(abs, jobs, threads=3, pool="processes") == [abs(j) for j in jobs]


def test_process_pool_runs_experiment_jobs(maps_dir):
    path = str(maps_dir / "chain.map")
    jobs = [(path, 0, 4, seed, 200) for seed in range(4)]
    results = run_jobs(explore_job, jobs, threads=2, pool="processes")
    spec = load_map(path)
    assert results == [random_explore(spec, 4, 200, seed) for seed in range(4)]


def test_process_pool_reraises_job_error(maps_dir):
    jobs = [(str(maps_dir / "chain.map"), 0, 4, 0, 50), (str(maps_dir / "chain.map"), 7, 4, 0, 50)]
    with pytest.raises(ValidationError):
        run_jobs(explore_job, jobs, threads=2, pool="processes")


def test_errors_survive_pickling():
    error = pickle.loads(pickle.dumps(StateCapExceeded(10, 3)))
    assert (error.cap, error.frontier) == (10, 3)
    assert str(error) == str(StateCapExceeded(10, 3))
    error = pickle.loads(pickle.dumps(NoConvergence(1e-3, 50)))
    assert (error.residual, error.iterations) == (1e-3, 50)
