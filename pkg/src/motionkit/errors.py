"""Exception types shared across the library."""


class MotionkitError(ValueError):
    """Base class for all library errors."""


class ShapeMismatchError(MotionkitError):
    """Two tensors were combined but their shapes disagree."""

    def __init__(self, context: str, left, right):
        self.left = tuple(left)
        self.right = tuple(right)
        super().__init__(f"{context}: shape {self.left} vs shape {self.right}")


class FormatError(MotionkitError):
    """A file or byte stream violates one of the on-disk formats.

    ``where`` pins the failure down to a byte offset (binary formats) or a
    JSON path (structured formats).
    """

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        super().__init__(f"{message} (at {where})" if where else message)
