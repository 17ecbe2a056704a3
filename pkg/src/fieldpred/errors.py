"""Exception types shared across the package."""


class FieldpredError(Exception):
    """Base class for every error raised by this library."""


class DataError(FieldpredError):
    """Malformed input data, schema violations, or unusable queries."""


class KernelError(FieldpredError):
    """Invalid kernel construction or evaluation outside the kernel domain."""


class PredictorError(FieldpredError):
    """Invalid fit/predict configuration."""


class HarnessError(FieldpredError):
    """Invalid synthetic specification or experiment configuration."""
