"""Exception hierarchy.

Three top-level branches map onto the CLI exit codes: configuration
problems (2), malformed or missing data (3), numerical failures (4).
"""


class CogstateError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(CogstateError):
    """Invalid configuration or CLI arguments (exit code 2)."""


class DataFormatError(CogstateError):
    """Malformed input file, schema violation, or missing artifact (exit code 3)."""


class NumericalError(CogstateError):
    """Numerical failure: degenerate inputs, non-convergence, divergence (exit code 4)."""


class DegenerateSignalError(NumericalError):
    """Signal has zero range or zero variance where that is not allowed."""


class UndefinedCorrelationError(NumericalError):
    """Pearson correlation requested against a constant input."""


class WhiteningError(NumericalError):
    """Covariance is rank-deficient; whitening is impossible."""


class UnrecoverableChannelError(NumericalError):
    """A fully corrupted channel has no clean neighbors to interpolate from."""


class AllComponentsRejectedError(NumericalError):
    """Artifact rejection would discard every component."""


class TrainingDivergenceError(NumericalError):
    """Loss became non-finite during training."""
