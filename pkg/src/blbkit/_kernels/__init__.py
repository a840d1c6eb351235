"""Weighted estimator kernels with a compiled core and a numpy fallback.

The compiled extension is preferred when present; set ``BLBKIT_KERNELS``
to ``python`` or ``c`` to force a backend (``c`` raises if the extension
is missing). ``BACKEND`` records what was selected at import.
"""

import os

from . import py_backend

_choice = os.environ.get("BLBKIT_KERNELS", "auto")

if _choice == "python":
    _impl = py_backend
    BACKEND = "python"
elif _choice in ("auto", "c"):
    try:
        from . import _speedups as _impl

        BACKEND = "c"
    except ImportError:
        if _choice == "c":
            raise
        _impl = py_backend
        BACKEND = "python"
else:
    raise ValueError(f"BLBKIT_KERNELS must be auto, c, or python; got {_choice!r}")

weighted_mean = _impl.weighted_mean
weighted_least_squares = _impl.weighted_least_squares
weighted_logistic_newton = _impl.weighted_logistic_newton
