"""Exception hierarchy; each class carries the CLI exit code it maps to."""

from __future__ import annotations


class MassesError(Exception):
    exit_code = 4


class InputError(MassesError):
    """Malformed or unreadable input file."""

    exit_code = 2

    def __init__(self, message, path=None, offset=None, question_id=None):
        parts = [message]
        if path is not None:
            parts.append(f"file={path}")
        if offset is not None:
            parts.append(f"offset={offset}")
        if question_id is not None:
            parts.append(f"question_id={question_id!r}")
        super().__init__("; ".join(parts))
        self.path = path
        self.offset = offset
        self.question_id = question_id


class DuplicateIdError(InputError):
    pass


class IdResolutionError(MassesError):
    """Predictions and annotations do not line up."""

    exit_code = 3

    def __init__(self, message, ids=()):
        self.ids = list(ids)
        listing = ", ".join(repr(i) for i in self.ids[:50])
        if len(self.ids) > 50:
            listing += f", ... ({len(self.ids) - 50} more)"
        super().__init__(f"{message}: [{listing}]" if self.ids else message)


class DegeneratePatternError(MassesError, ValueError):
    """Pattern too small for the requested score (e.g. S with n < 2)."""


class InvariantViolation(MassesError):
    exit_code = 4
