# -*- coding: utf-8 -*-
"""
ZidLab — Errors module.

One exception hierarchy for the whole toolkit. ValidationError subclasses
are caller mistakes (bad maps, bad configs, unmet preconditions); the CLI
maps them to exit code 1. AnalysisError subclasses are runtime failures
of an otherwise valid request (exit code 2).
"""


class ZidlabError(Exception):
    """Base class for every error raised by ZidLab."""

    exit_code = 2


class ValidationError(ZidlabError):
    exit_code = 1


class AnalysisError(ZidlabError):
    exit_code = 2


# ============================================================
# MAP PARSING
# ============================================================


class MapError(ValidationError):
    """A map file failed to parse or validate."""

    def __init__(self, message, line=None):
        self.line = line
        self.message = message
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

    def __reduce__(self):
        return type(self), (self.message, self.line)


class NonRectangular(MapError):
    pass


class NoExit(MapError):
    pass


class DuplicateStartId(MapError):
    pass


class UnknownToken(MapError):
    pass


class BeamHitsNothing(MapError):
    pass


class MissingStart(MapError):
    pass


# ============================================================
# DYNAMICS / GRAPHS
# ============================================================


class ActionUnavailable(ValidationError):
    """step() was called with an action outside available_actions()."""


class StateCapExceeded(AnalysisError):
    def __init__(self, cap, frontier):
        self.cap = cap
        self.frontier = frontier
        super().__init__(
            f"state cap {cap} exceeded (frontier size {frontier} when the cap was hit)"
        )

    def __reduce__(self):
        return type(self), (self.cap, self.frontier)


class EmptyGraph(ValidationError):
    pass


class NoWinningWalk(AnalysisError):
    pass


class DisconnectedInitial(ValidationError):
    """The graph has no usable initial vertex."""


class InsufficientTraces(AnalysisError):
    pass


class NonFinite(AnalysisError):
    pass


# ============================================================
# SPECTRAL
# ============================================================


class TooSmall(ValidationError):
    pass


class NoConvergence(AnalysisError):
    def __init__(self, residual, iterations):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"eigensolver did not converge after {iterations} iterations "
            f"(residual {residual:.3e})"
        )

    def __reduce__(self):
        return type(self), (self.residual, self.iterations)


# ============================================================
# CONFIG
# ============================================================


class ConfigError(ValidationError):
    pass
