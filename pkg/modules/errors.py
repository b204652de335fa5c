"""Domain exceptions for the trajectory simulator."""


class NumericalGuardError(RuntimeError):
    """A numerical guard tripped; results at these settings cannot be trusted."""


class SingularOverlap(NumericalGuardError, ValueError):
    """An inner product whose argument is required vanished."""

    def __init__(self, message: str, pair_index: int | None = None):
        super().__init__(message)
        self.pair_index = pair_index


class StepTooCoarse(NumericalGuardError):
    """Step probabilities no longer sum to one within tolerance."""

    def __init__(self, step_index: int, time: float, deviation: float):
        super().__init__(
            f"step {step_index} at t={time:.6g}: total probability deviates from 1 by "
            f"{deviation:.3e}; reduce dt"
        )
        self.step_index = step_index
        self.time = time
        self.deviation = deviation


class IntegrationDiverged(NumericalGuardError):
    """Density-matrix integration violated hermiticity, trace or positivity."""


class DegenerateSpectrum(NumericalGuardError, ValueError):
    """Density-matrix eigenvalues came too close to track branches."""


class NoRootInWindow(NumericalGuardError):
    """No singular point could be located inside the search window."""


class SweepThroughSingularity(NumericalGuardError):
    """An angular sweep could not be made continuous."""


class EmptyDistribution(ValueError):
    """A statistic was requested from a histogram holding no samples."""


class ConfigError(ValueError):
    """Experiment configuration is missing fields required by its mode."""
