from __future__ import annotations


class CovertlabError(ValueError):
    """Base class for toolkit errors. Subclasses ValueError so broad handlers keep working."""


class DomainError(CovertlabError):
    pass


class ConfigError(CovertlabError):
    pass


class QuadratureError(CovertlabError):
    def __init__(self, message: str, *, abscissa: float | None = None, partial_value: float | None = None):
        super().__init__(message)
        self.abscissa = abscissa
        self.partial_value = partial_value


class BracketError(CovertlabError):
    pass


class IntegrabilityError(CovertlabError):
    def __init__(self, message: str, *, term: str | None = None):
        super().__init__(message)
        self.term = term


class DegenerateNoiseError(CovertlabError):
    pass


class GammaRangeError(CovertlabError):
    pass


class BlocklengthTooSmallError(CovertlabError):
    pass


class DivergenceError(CovertlabError):
    pass


class NotSynthesizableError(CovertlabError):
    pass


class CodebookSizeError(CovertlabError):
    pass


# ---------- Warnings ----------

class DegenerateNoiseWarning(RuntimeWarning):
    pass


class QuadratureWarning(RuntimeWarning):
    pass


class ConfigWarning(RuntimeWarning):
    pass
