"""Exception hierarchy."""


class NudgeSimError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(NudgeSimError, ValueError):
    pass


class SingularMatrix(NudgeSimError, ArithmeticError):
    pass


class NoConvergence(NudgeSimError, RuntimeError):
    pass


class UnstableMatrix(NudgeSimError, ValueError):
    """Raised when a discrete Lyapunov equation is requested for rho(A) >= 1."""


class ZeroRow(NudgeSimError, ValueError):
    """An agent has no incoming influence, so its row cannot be normalized."""

    def __init__(self, rows):
        self.rows = sorted(int(r) for r in rows)
        super().__init__(f"rows with zero total weight: {self.rows}")


class AssumptionOneViolated(NudgeSimError, ValueError):
    """Some agents cannot reach any agent with susceptibility below one."""

    def __init__(self, unreachable):
        self.unreachable = sorted(int(v) for v in unreachable)
        super().__init__(
            "Assumption 1 violated: no path to an agent with lambda < 1 "
            f"from agents {self.unreachable}"
        )


class NegativeControl(NudgeSimError, ValueError):
    pass


class ConfigError(NudgeSimError, ValueError):
    """Invalid user configuration; ``field`` names the offending entry."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
