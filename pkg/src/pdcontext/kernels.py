"""Backend selection for the integration kernel.

The compiled extension is used when it imports; set ``PDCONTEXT_PURE_PYTHON=1``
to force the pure-Python loop.
"""

import os

from . import _purepy
from ._purepy import (  # noqa: F401
    ABSORBED,
    CONVERGED,
    GENERAL,
    LEFT_SIMPLEX,
    MAX_STEPS_DONE,
    NONFINITE,
    REDUCED3,
    REDUCED4,
)

compiled = None
if os.environ.get("PDCONTEXT_PURE_PYTHON") != "1":
    try:
        from . import _kernels as compiled
    except ImportError:
        compiled = None

BACKEND = "cython" if compiled is not None else "python"
rk4_integrate = compiled.rk4_integrate if compiled is not None else _purepy.rk4_integrate

BACKENDS = {"python": _purepy.rk4_integrate}
if compiled is not None:
    BACKENDS["cython"] = compiled.rk4_integrate
