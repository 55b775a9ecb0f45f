"""luxdbg: a scriptable multi-processor embedded-system debugger.

The kernel embeds a command-string extension language whose primitives drive
deterministic lx16 simulation cores through circuit, machine-code, assembly
and procedural layers of abstraction.
"""

from .errors import ImageError, LuxdbgError, ScriptError
from .kernel import Debugger

__version__ = "0.1.0"

__all__ = ["Debugger", "LuxdbgError", "ScriptError", "ImageError", "__version__"]
