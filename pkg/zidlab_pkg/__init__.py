# -*- coding: utf-8 -*-
"""
ZidLab — Zero-incentive dynamics toolkit

Builds the induced graph of a laser grid-world, finds its state space
bottlenecks and tells whether they carry any reward, and runs the
experiments around them: random-exploration density sweeps, delayed
potential-based shaping with tabular learners, and spectral subgoal
discovery.
"""

from .cli import main as run_cli


def main(argv=None):
    """Main entry point for ZidLab."""
    raise SystemExit(run_cli(argv))


__all__ = ["main", "run_cli"]
__version__ = "1.0.0"
