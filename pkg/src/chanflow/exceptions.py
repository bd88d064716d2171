"""Package-level exception types."""


class SimulationError(ValueError):
    """Invalid simulator configuration or inconsistent simulator inputs."""


class EstimationError(ValueError):
    """Estimator preconditions violated or numerically unsolvable system."""


class TrainingDiverged(RuntimeError):
    """Non-finite loss encountered; diagnostic state was dumped to disk."""
