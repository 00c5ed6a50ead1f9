"""Exception hierarchy shared by every layer of the package."""

from __future__ import annotations


class ZeusError(Exception):
    """Base class for all errors raised by zeus_auth."""


# -- domain model -----------------------------------------------------------

class InvalidIdentifier(ZeusError, ValueError):
    pass


class MagnitudeOverflow(ZeusError, OverflowError):
    pass


class PropertyViolation(ZeusError, ValueError):
    pass


class DuplicateFactId(ZeusError, ValueError):
    pass


class DomainMismatch(ZeusError, ValueError):
    pass


class UnknownOperator(ZeusError, LookupError):
    pass


class NotAMember(ZeusError, LookupError):
    pass


class ClosureViolation(ZeusError, ValueError):
    pass


class MappingIncomplete(ZeusError, LookupError):
    pass


class MappingInconsistent(ZeusError, ValueError):
    pass


class IndexOutOfRange(ZeusError, IndexError):
    pass


# -- protocol ---------------------------------------------------------------

class InvalidConfig(ZeusError, ValueError):
    pass


class RoundAfterTermination(ZeusError, RuntimeError):
    pass


class FinalizeWhileRunnable(ZeusError, RuntimeError):
    pass


class ProtocolViolation(ZeusError):
    pass


class SelfPair(ZeusError, ValueError):
    pass


class UnknownUser(ZeusError, LookupError):
    pass


class EmptyPairList(ZeusError, ValueError):
    pass


# -- agents -----------------------------------------------------------------

class EmptyDomain(ZeusError, ValueError):
    pass


class UnresolvedFactId(ZeusError, LookupError):
    pass


# -- wire -------------------------------------------------------------------

class CodecError(ZeusError, ValueError):
    """A line could not be decoded.

    ``kind`` is one of ``UnknownType``, ``MissingField``, ``TypeMismatch``
    or ``TrailingGarbage``; ``field`` names the offending field.
    """

    KINDS = ("UnknownType", "MissingField", "TypeMismatch", "TrailingGarbage")

    def __init__(self, kind: str, field: str, detail: str = ""):
        if kind not in self.KINDS:
            raise ValueError(f"unknown codec error kind {kind!r}")
        self.kind = kind
        self.field = field
        self.detail = detail
        msg = f"{kind}: {field}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class TransportClosed(ZeusError, ConnectionError):
    pass


# -- harness ----------------------------------------------------------------

class ConfigError(ZeusError, ValueError):
    def __init__(self, message: str, *, file: str | None = None,
                 line: int | None = None, field: str | None = None):
        self.file = file
        self.line = line
        self.field = field
        where = []
        if file:
            where.append(str(file) + (f":{line}" if line is not None else ""))
        if field:
            where.append(f"field {field}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class UnresolvedReference(ConfigError):
    pass


class InstanceTooLarge(ZeusError, ValueError):
    pass


class ReplayMismatch(ZeusError):
    """First divergence between a transcript and its re-execution.

    ``round`` is the round number, or a marker such as ``"HELLO"``,
    ``"FINAL"``, ``"DIGEST"`` or ``"line N"`` for divergences outside the
    round loop.
    """

    def __init__(self, round, field: str, expected, found):
        self.round = round
        self.field = field
        self.expected = expected
        self.found = found
        super().__init__(
            f"replay mismatch at {round}: field {field} expected {expected!r}, found {found!r}"
        )
