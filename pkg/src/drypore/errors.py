"""Exception types shared across the solver modules."""


class DryporeError(Exception):
    """Base class for all solver errors."""


class ConfigError(DryporeError):
    """Invalid or inconsistent run configuration."""


class StabilityViolation(DryporeError):
    """A requested time step exceeds an explicit stability bound."""

    def __init__(self, dt, bound, what=""):
        self.dt = dt
        self.bound = bound
        super().__init__(f"dt={dt:.3e} exceeds {what or 'stability'} bound {bound:.3e}")


class NoConvergence(DryporeError):
    """Iterative solver hit its iteration cap."""

    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"no convergence after {iterations} iterations (residual {residual:.3e})"
        )


class ConservationUnreachable(DryporeError):
    """Mass correction has no remaining interface support to act on."""

    def __init__(self, deficit):
        self.deficit = deficit
        super().__init__(f"correction support vanished with deficit {deficit:.3e}")


class DimensionMismatch(DryporeError):
    """Input file dimensions do not match the requested grid."""


class MalformedFile(DryporeError):
    """Input file cannot be parsed."""


class PackingFailed(DryporeError):
    """Particle packing could not reach the target solid fraction."""

    def __init__(self, target_chi, achieved_chi):
        self.target_chi = target_chi
        self.achieved_chi = achieved_chi
        super().__init__(
            f"packing reached chi={achieved_chi:.3f}, target {target_chi:.3f}"
        )


class EmptyProfile(DryporeError):
    """No profile rows survive threshold truncation."""


class DegenerateFit(DryporeError):
    """Least-squares fit has no spread in the abscissa."""
