"""Backend selection for the scalar numeric kernels.

The compiled backend (``_core_cy``, built from Cython) is preferred when
importable; otherwise the pure-Python backend (``_core_py``) is used.  Both
implement the same algorithms with the same operation order and produce
identical results.  Set ``LMAUDIT_PURE_PYTHON=1`` to force the pure-Python
backend, e.g. to compare the two or to rule out the extension.
"""

from __future__ import annotations

import os

from . import _core_py

if os.environ.get("LMAUDIT_PURE_PYTHON"):
    _impl = _core_py
    BACKEND = "python"
else:
    try:
        from . import _core_cy as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _core_py
        BACKEND = "python"

log_gamma = _impl.log_gamma
reg_incomplete_beta = _impl.reg_incomplete_beta
f_sf = _impl.f_sf
t_cdf = _impl.t_cdf
t_sf = _impl.t_sf
t_pdf = _impl.t_pdf
t_quantile = _impl.t_quantile
normal_quantile = _impl.normal_quantile
Pcg32 = _impl.Pcg32

__all__ = [
    "BACKEND",
    "log_gamma",
    "reg_incomplete_beta",
    "f_sf",
    "t_cdf",
    "t_sf",
    "t_pdf",
    "t_quantile",
    "normal_quantile",
    "Pcg32",
]
