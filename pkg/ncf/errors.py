"""Exceptions raised by the ncf package."""
from typing import Optional


class NcfError(Exception):
    """Base class for all ncf errors."""


# Field arithmetic

class InvalidField(NcfError, ValueError):
    """Field exponent out of range or reduction polynomial not irreducible."""


class FieldValueError(NcfError, ValueError):
    """A scalar is not an element of the field."""


class ZeroInverse(NcfError, ZeroDivisionError):
    """Zero has no multiplicative inverse."""


class DimensionMismatch(NcfError, ValueError):
    """Matrix or vector shapes do not line up."""


class InconsistentSystem(NcfError, ValueError):
    """A linear system has no solution."""


# Coding pipeline

class IndexOutOfRange(NcfError, IndexError):
    """A node or gateway index lies outside the network."""


class GenerationMismatch(NcfError, ValueError):
    """Packets from different generations were mixed."""


class PayloadLengthMismatch(NcfError, ValueError):
    """Packets in one system carry payloads of different lengths."""


class DuplicatePacket(NcfError, ValueError):
    """A node sent more than one packet in a generation."""


class VectorsExhausted(NcfError, ValueError):
    """A gateway received more owned packets than it holds encoding vectors."""


class MalformedPacket(NcfError, ValueError):
    """Serialized packet bytes could not be parsed."""


# Scenario / simulation

class InvalidConfig(NcfError, ValueError):
    """Scenario parameters violate their constraints."""


class DecodeCorruption(NcfError):
    """A decoded payload differs from the transmitted one."""


# Command line

class ParseError(NcfError, ValueError):
    """Configuration text or flags could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConflictError(NcfError, ValueError):
    """Two configuration keys exclude each other."""


class UnknownPreset(NcfError, ValueError):
    """No experiment preset with the requested name."""
