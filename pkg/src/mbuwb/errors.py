class ParameterError(ValueError):
    """A model parameter is outside its valid domain."""


class ArgumentError(ValueError):
    """An argument has the wrong size, range or shape."""


class ConfigurationError(ValueError):
    """Unsupported configuration (code rate, MCS, scenario key...)."""
