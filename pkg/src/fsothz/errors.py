"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class MeijerGUnsupportedError(ValueError):
    """Meijer-G parameters fall outside the supported evaluation geometry.

    The message names the violated condition; a wrong value is never
    returned silently.
    """

    def __init__(self, condition: str):
        super().__init__(f"unsupported Meijer-G parameters: {condition}")
        self.condition = condition


class NumericalIntegrityError(ArithmeticError):
    """A computed quantity violated a hard sanity bound (e.g. CDF > 1)."""


class ConfigError(ValueError):
    """Scenario configuration is malformed; message names the offending key."""
