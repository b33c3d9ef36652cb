"""Pick the kernel backend once, at import.

``ECHOSCAFFOLD_BACKEND=python`` forces the numpy fallback;
``ECHOSCAFFOLD_BACKEND=compiled`` makes a missing extension an error.
"""
import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

_choice = os.environ.get("ECHOSCAFFOLD_BACKEND", "auto").lower()
if _choice not in ("auto", "python", "compiled"):
    raise ImportError(f"ECHOSCAFFOLD_BACKEND must be auto, python or compiled, got {_choice!r}")

try:
    from . import _ckernels
except ImportError:
    if _choice == "compiled":
        raise
    _ckernels = None

if _ckernels is not None and _choice != "python":
    kernels = _ckernels
    BACKEND = "compiled"
else:
    kernels = _pykernels
    BACKEND = "python"
    if _ckernels is None:
        log.debug("compiled kernels not built; using numpy fallback")

fallback = _pykernels
compiled = _ckernels
