"""Exception hierarchy shared by every pipeline stage.

Each error carries a stable ``code`` (used in CLI error payloads) and an
``exit_code``: 1 for domain/validation failures, 2 for I/O or parse failures.
"""

from __future__ import annotations


class SemcafeError(Exception):
    exit_code = 1

    @property
    def code(self) -> str:
        return type(self).__name__


# -- I/O and parse failures (exit 2) ----------------------------------------


class ParseError(SemcafeError):
    exit_code = 2


class MissingFile(ParseError):
    def __init__(self, path):
        self.path = str(path)
        super().__init__(f"missing required file: {self.path}")


class MalformedLine(ParseError):
    def __init__(self, file, line: int, reason: str = ""):
        self.file = str(file)
        self.line = line
        msg = f"{self.file}:{line}: malformed line"
        super().__init__(f"{msg}: {reason}" if reason else msg)


class MalformedJson(ParseError):
    def __init__(self, line: int, reason: str = ""):
        self.line = line
        super().__init__(f"line {line}: invalid JSON record" + (f": {reason}" if reason else ""))


class MissingRequiredField(ParseError):
    def __init__(self, field: str, line: int):
        self.field = field
        self.line = line
        super().__init__(f"line {line}: missing required field {field!r}")


class InvalidFieldValue(ParseError):
    def __init__(self, field: str, line: int, value):
        self.field = field
        self.line = line
        super().__init__(f"line {line}: invalid value for {field!r}: {value!r}")


class DuplicateDocId(ParseError):
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(f"duplicate doc_id {doc_id!r}")


class MalformedModelFile(ParseError):
    pass


# -- domain / validation failures (exit 1) -----------------------------------


class CycleDetected(SemcafeError):
    def __init__(self, path):
        self.path = list(path)
        super().__init__("subclass cycle: " + " -> ".join(self.path))


class DanglingReference(SemcafeError):
    pass


class MissingRoots(SemcafeError):
    pass


class InvalidRoot(SemcafeError):
    pass


class DimensionMismatch(SemcafeError):
    pass


class LayoutMismatch(SemcafeError):
    pass


class EmptyCorpus(SemcafeError):
    pass


class SingleClassCorpus(SemcafeError):
    pass


class UnlabeledDocument(SemcafeError):
    pass


class DegenerateClass(SemcafeError):
    pass


class LengthMismatch(SemcafeError):
    pass


class EmptyInput(SemcafeError):
    pass


class MissingFingerprint(SemcafeError):
    pass
