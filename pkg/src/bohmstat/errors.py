"""Exception types shared across the package."""


class BohmstatError(Exception):
    """Base class for all package-specific errors."""


class MemoryBudgetExceeded(BohmstatError):
    pass


class InvalidExtent(BohmstatError):
    pass


class AxisMismatch(BohmstatError):
    pass


class StepperBoundaryMismatch(BohmstatError):
    pass


class ConvergenceFailure(BohmstatError):
    pass


class NonuniformFrames(BohmstatError):
    pass


class PartitionMismatch(BohmstatError):
    pass


class DenseBudgetExceeded(BohmstatError):
    pass


class TrajectoryEscapedDomain(BohmstatError):
    pass


class NotADensityMatrix(BohmstatError):
    pass


class OutsideAllCells(BohmstatError):
    pass


class EmptyRegion(BohmstatError):
    pass


class TruncationInsufficient(BohmstatError):
    pass


class GridTooCoarse(BohmstatError):
    pass


class WindowEmpty(BohmstatError):
    pass


class DiagonalizationBudget(BohmstatError):
    pass


class AnalyticDensityUnavailable(BohmstatError):
    pass


class ConfigError(BohmstatError):
    """Invalid experiment configuration; carries the offending config path."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
