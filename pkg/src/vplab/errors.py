class VplabError(Exception):
    """Base class for errors raised by vplab."""


class GuardExceeded(VplabError):
    """A search or materialization went past its configured resource guard."""

    def __init__(self, what, limit, progress=None):
        self.what = what
        self.limit = limit
        self.progress = progress
        msg = f"{what}: resource guard {limit} exceeded"
        if progress is not None:
            msg += f" (partial progress: {progress})"
        super().__init__(msg)


class ParseError(VplabError, ValueError):
    def __init__(self, message, text=None, pos=None):
        self.text = text
        self.pos = pos
        if pos is not None:
            message = f"{message} at position {pos}"
        super().__init__(message)


class FormulaError(VplabError, ValueError):
    pass


class StructureError(VplabError, ValueError):
    pass
