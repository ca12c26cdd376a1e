"""Exception types shared across the pipeline."""


class DatasetCorruptError(ValueError):
    """On-disk payload disagrees with what the manifest promises."""


class TrainingDivergedError(RuntimeError):
    """Training loss became non-finite."""

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"training diverged at epoch {epoch} (loss={loss!r})")
        self.epoch = epoch
        self.loss = loss


class NonFiniteGradientError(RuntimeError):
    """An optimizer step received a non-finite gradient."""

    def __init__(self, tensor_name: str):
        super().__init__(f"non-finite gradient in tensor {tensor_name!r}; step aborted")
        self.tensor_name = tensor_name
