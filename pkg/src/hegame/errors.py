"""Exception hierarchy shared by every module."""


class HegError(Exception):
    """Base class for all errors raised by :mod:`hegame`."""


class InvalidReferenceError(HegError, KeyError):
    """An agent or skill id does not exist in the instance."""

    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class InvalidArgumentError(HegError, ValueError):
    pass


class InvalidPartitionError(HegError, ValueError):
    """Partition is not a valid solution for the given game."""


class CapabilityError(HegError):
    """A brute-force oracle was asked to go beyond its configured budget."""
