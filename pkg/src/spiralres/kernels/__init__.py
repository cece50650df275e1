"""Numerical kernel backend selection.

Two interchangeable implementations of the hot numerical paths exist:

  * ``_fastpath``  -- compiled (Cython) scalar kernels
  * ``reference``  -- pure Python/numpy, always available

The compiled backend is preferred when importable.  Set the environment
variable ``SPIRALRES_BACKEND`` to ``python`` or ``compiled`` to force a
choice (forcing ``compiled`` raises if the extension is missing).
"""

import os

from . import reference


def load_backend(name):
    """Return the kernel module for an explicit backend name."""
    if name == "python":
        return reference
    if name == "compiled":
        from . import _fastpath
        return _fastpath
    raise ValueError(f"unknown backend {name!r}; use 'python' or 'compiled'")


_requested = os.environ.get("SPIRALRES_BACKEND", "auto").strip().lower() or "auto"
if _requested == "auto":
    try:
        from . import _fastpath as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = reference
        BACKEND = "python"
else:
    _impl = load_backend(_requested)
    BACKEND = _requested

mb_sigma_ratios = _impl.mb_sigma_ratios
digamma_half_real = _impl.digamma_half_real
adaptive_gk15 = reference.adaptive_gk15
