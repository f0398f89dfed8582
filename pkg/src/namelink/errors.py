"""Exception hierarchy. Each class carries a stable ``code`` for HTTP/CLI surfaces."""

from __future__ import annotations


class NameLinkError(Exception):
    code = "INTERNAL_ERROR"


class EmptyName(NameLinkError, ValueError):
    code = "EMPTY_NAME"


class UnsupportedScript(NameLinkError, ValueError):
    code = "UNSUPPORTED_SCRIPT"


class InconsistentAnnotation(NameLinkError, ValueError):
    code = "INCONSISTENT_ANNOTATION"


class TemplateInvalid(NameLinkError, ValueError):
    code = "TEMPLATE_INVALID"


class LexiconTooSmall(NameLinkError):
    code = "LEXICON_TOO_SMALL"


class NonFiniteScore(NameLinkError, ValueError):
    code = "NON_FINITE_SCORE"


class BackendUnavailable(NameLinkError):
    code = "BACKEND_UNAVAILABLE"


class ProtocolError(NameLinkError):
    code = "PROTOCOL_ERROR"


class ScorerTimeout(NameLinkError):
    code = "TIMEOUT"


class LengthMismatch(NameLinkError, ValueError):
    code = "LENGTH_MISMATCH"


class EmptyInput(NameLinkError, ValueError):
    code = "EMPTY_INPUT"


class NoPositives(NameLinkError, ValueError):
    code = "NO_POSITIVES"


class SplitGuard(NameLinkError, ValueError):
    """Raised when asked to evaluate on a training split."""

    code = "SPLIT_GUARD"


class ConfigInvalid(NameLinkError, ValueError):
    code = "CONFIG_INVALID"
