"""Exception types shared across the framework."""


class InvalidArgument(ValueError):
    pass


class UnsupportedSize(ValueError):
    pass


class SchemaError(ValueError):
    pass


class OrderingError(ValueError):
    pass


class ProtocolError(RuntimeError):
    pass


class InsufficientHistory(ValueError):
    pass


class ConfigError(ValueError):
    pass


class PersistenceError(OSError):
    """Raised when the snapshot store cannot be read or written.

    ``sequence_number`` names the offending entry when one is known.
    """

    def __init__(self, message, sequence_number=None):
        super().__init__(message)
        self.sequence_number = sequence_number
