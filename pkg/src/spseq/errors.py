"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class SpseqError(Exception):
    """Base class for all errors raised by :mod:`spseq`."""


class DimensionMismatch(SpseqError, ValueError):
    pass


class NonChainMap(SpseqError):
    pass


class NotAMorphism(SpseqError):
    def __init__(self, page: int, message: str = ""):
        self.page = page
        super().__init__(f"not a morphism at page {page}" + (f": {message}" if message else ""))


class NotASurjection(SpseqError):
    pass


class InvalidObject(SpseqError):
    """Raised when a constructed object fails its validator."""

    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


class InternalInvariantViolation(SpseqError, AssertionError):
    """An invariant guaranteed by the mathematics failed: an implementation bug."""


class UnsupportedGenerator(SpseqError):
    pass


class RelationViolation(SpseqError):
    pass


class DocumentSyntaxError(SpseqError):
    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")
