"""Exception hierarchy shared by every module of the toolkit."""


class MJSError(Exception):
    """Base class; ``module`` records which subsystem raised it."""

    module = "mjs"


class DegenerateImmersion(MJSError):
    module = "geometry"


class OutsideDomain(MJSError):
    module = "geometry"


class NonFiniteIntegrand(MJSError):
    module = "geometry"


class StepTooLarge(MJSError):
    module = "geometry"


class InvalidAngles(MJSError):
    module = "catalog"


class SolveFailure(MJSError):
    module = "catalog"


class NotOrthonormal(MJSError):
    module = "catalog"


class IncompatibleField(MJSError):
    module = "stability"


class NotMinimal(MJSError):
    module = "stability"


class NotCompactlySupported(MJSError):
    module = "stability"


class ConstraintRankFailure(MJSError):
    module = "stability"


class EigSolveFailure(MJSError):
    module = "stability"


class ZeroAngleField(MJSError):
    module = "lp"


class ExponentOutOfRange(MJSError):
    module = "lp"


class ConfigError(MJSError):
    module = "cli"
