"""Exception types raised across the drive simulation package."""


class InvalidInputError(ValueError):
    """An argument is outside the domain of the operation."""


class SingularParameterError(ValueError):
    """Machine inductances give a non-invertible flux-current relation."""


class InvalidWindowError(ValueError):
    """An analysis window is too short or not uniformly sampled."""


class UndefinedTHDError(ValueError):
    """The fundamental bin is absent or zero, so THD has no meaning."""


class IntegrationDivergedError(RuntimeError):
    """The integrator produced a non-finite state."""

    def __init__(self, t, message=None):
        self.t = float(t)
        super().__init__(message or f"integration diverged at t = {self.t:.9g} s")
