"""Exception types shared across the toolkit."""


class DimensionError(ValueError):
    """Spatial shapes of related inputs do not line up."""


class LabelRangeError(ValueError):
    """A mask or palette refers to a label outside [0, num_labels)."""


class ParameterError(ValueError):
    """A scalar argument is outside its documented range."""


class ConfigurationError(RuntimeError):
    """A required resource or config value is missing or inconsistent."""


class CheckpointError(RuntimeError):
    """Checkpoint file is corrupt or has an unknown format version."""


class TrainingDiverged(RuntimeError):
    """A loss became non-finite; carries the step and loss name."""

    def __init__(self, step: int, loss_name: str, value: float):
        super().__init__(f"non-finite {loss_name} ({value}) at step {step}")
        self.step = step
        self.loss_name = loss_name
        self.value = value
