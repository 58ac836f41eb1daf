"""Exception hierarchy shared across the package."""


class BeewatchError(Exception):
    """Base class for all errors raised by this package."""


class GeometryError(BeewatchError):
    """Invalid box geometry (negative extents, degenerate enclosing box)."""


class AnnotationError(BeewatchError):
    """Malformed annotation or prediction file."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        location = ""
        if path is not None:
            location += str(path)
        if line is not None:
            location += f":{line}"
        if location:
            message = f"{location}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line


class DatasetError(BeewatchError):
    """Invalid corpus, split, or letterbox request."""


class EvaluationError(BeewatchError):
    """Inconsistent evaluation inputs (mixed images, undefined metrics)."""


class BackendError(BeewatchError):
    """Detector backend failure, attributed to a pipeline stage."""

    def __init__(self, message: str, *, stage: str = "backend"):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class VideoError(BeewatchError):
    """Video container or decode failure."""


class ReportError(BeewatchError):
    """Invalid report series or row set."""


class JobError(BeewatchError):
    """Job store or job lifecycle failure."""
