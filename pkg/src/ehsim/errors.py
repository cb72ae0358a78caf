"""Exception hierarchy shared across the package."""


class EhsimError(Exception):
    """Base class for all package errors."""


class ConfigError(EhsimError):
    """Invalid configuration input; maps to CLI exit code 1."""


class ParseError(ConfigError):
    """Malformed config file line."""

    def __init__(self, line_no, reason):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class ValidationError(ConfigError):
    """A config field violates its constraint."""

    def __init__(self, field, constraint):
        self.field = field
        self.constraint = constraint
        super().__init__(f"{field}: {constraint}")


class InexactEnergy(ConfigError):
    """Decimal energy not representable in whole milli-units."""


class StateSpaceTooLarge(EhsimError):
    """Oracle state enumeration exceeded the configured limit."""


class NonLatticeEnergy(EhsimError):
    """Config energies are not commensurable on a common lattice."""


class NoConvergence(EhsimError):
    """Stationary-distribution solver failed to converge."""

    def __init__(self, residual, iterations):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"power iteration did not converge after {iterations} iterations "
            f"(residual {residual:.3e})"
        )
