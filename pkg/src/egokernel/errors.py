"""Exception hierarchy shared by every module."""

from __future__ import annotations


class EgoError(Exception):
    """Base class for all package errors."""


class ParseError(EgoError, ValueError):
    """Malformed formula text. ``offset`` is the byte offset of the fault."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


class ResourceError(EgoError, RuntimeError):
    """A configured size limit (depth, width, pairings, chain length) was exceeded."""


class DomainError(EgoError, ValueError):
    """An operation was applied outside the inputs its definition covers."""


class ScenarioError(EgoError, ValueError):
    """A scenario file failed schema validation."""
