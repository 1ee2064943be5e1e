"""Exception types shared across the package."""


class CityRiskError(Exception):
    """Base class for all package errors."""


class ParseError(CityRiskError):
    """Malformed input record; message carries file and line context."""


class ValidationError(CityRiskError):
    """Structurally parsed but semantically invalid dataset."""


class UnknownUser(CityRiskError):
    """A user id that does not exist in the dataset."""


class EmptyInput(CityRiskError):
    """An operation that requires at least one element got none."""


class EmptyScores(CityRiskError):
    """Cluster/location selection requires a non-empty score vector."""


class EmptyCluster(CityRiskError):
    """Location selection requires a non-empty cluster."""


class Abstained(CityRiskError):
    """Metric requested for a prediction that abstained."""


class DegenerateTrainingSet(CityRiskError):
    """Logistic training needs both labels present."""


class NonConvergence(CityRiskError):
    """Optimizer did not reach the gradient tolerance.

    Carries the final gradient infinity-norm in ``grad_norm``.
    """

    def __init__(self, grad_norm: float):
        self.grad_norm = grad_norm
        super().__init__(f"gradient descent stopped with |grad|_inf = {grad_norm:.3e}")


class DegenerateDataset(CityRiskError):
    """Forest training got an empty or feature-less dataset."""


class OutOfRange(CityRiskError):
    """A numeric argument fell outside its documented range."""


class ConfigError(CityRiskError):
    """Invalid generator or pipeline configuration."""


class BundleError(CityRiskError):
    """Model bundle missing, malformed, or of an unsupported version."""
