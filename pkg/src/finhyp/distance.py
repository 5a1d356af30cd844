"""Edit-distance backend selection.

The compiled kernel (``finhyp._editdist``) is picked when it was built;
otherwise the pure-Python twin takes over. Set FINHYP_PURE_PYTHON=1 to force
the fallback, e.g. when benchmarking one backend against the other.
"""
import os

from . import _editdist_py

if os.environ.get("FINHYP_PURE_PYTHON") == "1":
    _impl = _editdist_py
else:
    try:
        from . import _editdist as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _editdist_py

BACKEND = "python" if _impl is _editdist_py else "c"

levenshtein = _impl.levenshtein
nearest = _impl.nearest
