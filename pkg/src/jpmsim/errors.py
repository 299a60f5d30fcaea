"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration document or override could not be parsed or validated."""


class NumericalError(RuntimeError):
    """A solver or quadrature failed to reach its stated tolerance."""


class IdentifiabilityError(NumericalError):
    """A fit was requested on a grid that cannot constrain the parameters."""
