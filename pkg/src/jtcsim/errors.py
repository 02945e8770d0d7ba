"""Exception hierarchy for jtcsim."""


class JTCError(Exception):
    """Base class for all jtcsim errors."""


class NumericalError(JTCError):
    """Failure of a numerical step (maps to CLI exit code 2)."""


class SingularMatrix(NumericalError):
    def __init__(self, rcond, msg=None):
        self.rcond = rcond
        super().__init__(msg or f"matrix is singular to working precision (rcond={rcond:.3e})")


class SingularSystem(NumericalError):
    def __init__(self, rcond, x_f=None):
        self.rcond = rcond
        self.x_f = x_f
        where = "" if x_f is None else f" at x_f={x_f:g} m"
        super().__init__(f"ill-conditioned boundary system{where} (rcond={rcond:.3e})")


class DegenerateModes(NumericalError):
    pass


class FitDiverged(NumericalError):
    pass


class DegenerateVariance(NumericalError):
    pass


class EmptyAfterExclusion(NumericalError):
    pass


class ParameterError(JTCError, ValueError):
    """Invalid physical parameter."""


class NonPositive(ParameterError):
    pass


class NonPositiveBallast(ParameterError):
    pass


class ZeroImpedance(ParameterError):
    pass


class WrongKind(ParameterError):
    pass


class OutOfSection(ParameterError):
    pass


class NoShuntingPoint(ParameterError):
    pass


class ConfigError(JTCError):
    """Malformed scenario file (maps to CLI exit code 1)."""

    def __init__(self, msg, key=None, line=None):
        self.key = key
        self.line = line
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if key is not None:
            loc.append(f"key '{key}'")
        prefix = f"{', '.join(loc)}: " if loc else ""
        super().__init__(prefix + msg)


class TraceFormat(ConfigError):
    pass
