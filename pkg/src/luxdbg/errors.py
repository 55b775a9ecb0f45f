"""Error types shared across the debugger layers."""


class LuxdbgError(Exception):
    """Base class for all debugger-raised errors."""


class ScriptError(LuxdbgError):
    """An extension-language level error; catchable by the script `catch` command."""

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ImageError(LuxdbgError):
    """Program image failed to parse or violates the image contract."""
