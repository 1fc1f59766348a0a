"""Exception hierarchy.

Every error carries the process exit code the command line front end maps
it to, so callers never need a lookup table.
"""


class OqhoError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 5
    kind = "numeric-failure"

    def to_dict(self):
        return {"error": type(self).__name__, "kind": self.kind, "message": str(self)}


class ParseError(OqhoError):
    exit_code = 2
    kind = "parse"


class InvalidParams(OqhoError, ValueError):
    exit_code = 3
    kind = "invalid-params"


class DimensionMismatch(InvalidParams):
    pass


class NegativeEps(InvalidParams):
    pass


class ConfigInvalid(InvalidParams):
    pass


class MuTooLarge(InvalidParams):
    pass


class NotHurwitz(OqhoError):
    exit_code = 4
    kind = "not-hurwitz"


class SingularSolve(OqhoError):
    pass


class NotPsd(OqhoError):
    pass


class ThetaOutOfRange(OqhoError, ValueError):
    pass


class ThetaSupercritical(OqhoError, ValueError):
    pass


class QuadratureFailure(OqhoError):
    pass
