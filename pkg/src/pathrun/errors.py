"""Exception types raised across the package.

Every domain error derives from :class:`PathrunError` so the command line
front end can map them to exit status 1 and print the class name.
"""


class PathrunError(Exception):
    """Base class for domain errors."""


class LevelError(PathrunError, ValueError):
    pass


class NonRectangular(LevelError):
    pass


class UnknownChar(LevelError):
    def __init__(self, char, position):
        self.char = char
        self.position = position
        super().__init__(f"unknown tile character {char!r} at column {position[0]}, row {position[1]}")


class MissingStart(LevelError):
    pass


class MissingGoal(LevelError):
    pass


class MultipleStarts(LevelError):
    pass


class FrameCapExceeded(PathrunError):
    pass


class PathCapExceeded(PathrunError):
    def __init__(self, cap):
        self.cap = cap
        super().__init__(f"more than {cap} paths; instance too large for enumeration")


class StateBudgetExceeded(PathrunError):
    def __init__(self, frame, count):
        self.frame = frame
        self.count = count
        super().__init__(f"{count} live states at frame {frame} exceeds the state budget")


class ZeroField(PathrunError):
    pass


class SlitBlocked(PathrunError):
    pass


class Unreachable(PathrunError):
    def __init__(self, frame_cap):
        self.frame_cap = frame_cap
        super().__init__(f"no admissible endpoint within {frame_cap} frames")


class EmptyInput(PathrunError):
    pass


class NoCompletedRuns(PathrunError):
    pass
