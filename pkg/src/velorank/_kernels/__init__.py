"""Kernel backend selection.

The compiled Cython kernel is preferred when importable; the pure-Python
twin is the fallback.  Both produce bit-identical results, so the choice
only affects speed.  Set ``VELORANK_BACKEND=python`` or ``=cython`` to force
one (forcing an unavailable backend raises at import).
"""

from __future__ import annotations

import os

from . import fixedpoint_py

CONVERGED = fixedpoint_py.CONVERGED
MAX_ITERATIONS = fixedpoint_py.MAX_ITERATIONS
ZERO_DENOMINATOR = fixedpoint_py.ZERO_DENOMINATOR

try:
    from . import fixedpoint as _compiled
except ImportError:
    _compiled = None

_ENV_VAR = "VELORANK_BACKEND"


def available_backends() -> tuple[str, ...]:
    return ("cython", "python") if _compiled is not None else ("python",)


def get_kernel(backend: str | None = None):
    """Return the ``solve_team`` callable for ``backend`` (default: active)."""
    if backend is None:
        backend = ACTIVE_BACKEND
    if backend == "python":
        return fixedpoint_py.solve_team
    if backend == "cython":
        if _compiled is None:
            raise ImportError("compiled kernel not available; build the extension or use the python backend")
        return _compiled.solve_team
    raise ValueError(f"unknown backend {backend!r}; expected 'cython' or 'python'")


_forced = os.environ.get(_ENV_VAR)
if _forced:
    if _forced not in ("cython", "python"):
        raise ImportError(f"{_ENV_VAR} must be 'cython' or 'python', got {_forced!r}")
    if _forced == "cython" and _compiled is None:
        raise ImportError(f"{_ENV_VAR}=cython but the compiled kernel is not importable")
    ACTIVE_BACKEND = _forced
else:
    ACTIVE_BACKEND = "cython" if _compiled is not None else "python"

solve_team = get_kernel(ACTIVE_BACKEND)
