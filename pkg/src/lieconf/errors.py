"""Exception hierarchy shared by every module."""


class LieConfError(Exception):
    """Base class for all errors raised by this package."""


class AlphabetViolation(LieConfError):
    """A polynomial mentions a symbol outside the allowed subset."""


class WindowViolation(LieConfError):
    """A grade index falls outside the truncated grade window."""


class DegreeLimit(LieConfError):
    """A requested degree bound exceeds the configured guard."""


class PresetOnly(LieConfError):
    """The operation is only defined for the CW(a, c) preset."""


class NotIndexAdditive(LieConfError):
    """No mode shift in the search range makes the bracket index-additive."""


class RegimeMismatch(LieConfError):
    """The parameter regime does not fit the requested operation."""


class ParseError(LieConfError):
    """Malformed polynomial string or presentation config."""
