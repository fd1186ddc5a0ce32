class AvcError(ValueError):
    """Base class for all errors raised by psilavc."""


class ConfigurationError(AvcError):
    pass


class DesignError(AvcError):
    pass


class MeteringError(AvcError):
    pass


class ProcessingError(AvcError):
    pass
