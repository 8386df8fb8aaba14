"""Exception hierarchy shared by the library and the command line."""


class GucError(Exception):
    """Base class for every error raised by :mod:`gucsynth`."""

    exit_code = 1


class InvalidDimension(GucError, ValueError):
    pass


class InvalidArgument(GucError, ValueError):
    pass


class NotSymplectic(GucError, ValueError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SqueezeOverflow(GucError, ValueError):
    pass


class NonGenericPair(GucError):
    """A quadrature pair vanishes on exactly one side of a local match.

    ``side`` is ``"source"`` or ``"target"``; ``label`` names the matrix the
    offending vector was taken from when known.
    """

    exit_code = 4

    def __init__(self, mode, side, label=None):
        self.mode = mode
        self.side = side
        self.label = label
        where = f" in {label}" if label else ""
        super().__init__(
            f"quadrature pair of mode {mode} vanishes on the {side} side only{where}"
        )


class NonGenericIntermediate(GucError):
    exit_code = 4

    def __init__(self, level, mode, cause=None):
        self.level = level
        self.mode = mode
        self.cause = cause
        super().__init__(
            f"decoupling of mode {mode} at recursion level {level} stayed "
            f"non-generic after all retries ({cause})"
        )


class NonGenericCoupler(GucError):
    exit_code = 4


class InfeasibleTarget(GucError):
    """Target modes span more than one color set."""

    exit_code = 3

    def __init__(self, target_modes, color_sets):
        self.target_modes = list(target_modes)
        self.color_sets = [sorted(c) for c in color_sets]
        super().__init__(
            f"target modes {self.target_modes} are split across color sets "
            f"{self.color_sets}"
        )


class SaturationNotReached(GucError):
    exit_code = 4


class InconsistentPartition(GucError):
    pass


class FormatError(GucError, ValueError):
    """Malformed matrix, sequence or partition file."""

    exit_code = 2
