"""Exception types shared across the pipeline stages."""


class ImageDecodeError(ValueError):
    """Raised when an image payload cannot be decoded as PNG or JPEG."""


class GeometryError(ValueError):
    """Raised for degenerate geometry (zero-length strokes, empty bounding boxes)."""


class TrainingError(RuntimeError):
    """Raised when model training diverges (non-finite loss)."""

    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch


class StageError(RuntimeError):
    """Wraps a failure inside a pipeline stage with the stage name attached."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"pipeline stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
