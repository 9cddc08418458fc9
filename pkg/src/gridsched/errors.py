"""Exception hierarchy shared by all gridsched modules."""


class GridschedError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(GridschedError, ValueError):
    """A physical or numerical parameter violates its documented range."""


class InfeasibleTripError(GridschedError):
    """An EV trip would deplete the battery below zero state of charge."""


class InvalidDispatchError(GridschedError):
    """A generating-unit dispatch is inconsistent with its commitment."""


class WrongSolverError(GridschedError):
    """An LP-only solver was asked to handle integer variables."""


class InvalidModelError(GridschedError):
    """An optimization model contains non-finite or inconsistent data."""


class ModelBuildError(GridschedError):
    """A scheduling model could not be assembled from its inputs."""


class InfeasibleScheduleError(GridschedError):
    """A scheduling problem has no feasible solution.

    ``groups`` names the requirement groups whose relaxation restored
    feasibility during diagnosis (in probing order).
    """

    def __init__(self, message, groups=()):
        super().__init__(message)
        self.groups = tuple(groups)


class UndefinedMetricError(GridschedError):
    """A comparison metric is undefined for the given inputs."""


class ConfigError(GridschedError):
    """A configuration document failed validation.

    ``path`` points into the offending document, e.g. ``households[0].evs[1].soc_min``.
    """

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
