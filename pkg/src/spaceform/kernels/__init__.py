"""Batched inner kernels of the W-chart searches.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``SPACEFORM_PURE`` is set to a non-empty value, the
numpy reference implementation is selected.
"""

import os

from . import _pure

BACKEND = "pure"
if not os.environ.get("SPACEFORM_PURE"):
    try:
        from . import _ext as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pure
else:
    _impl = _pure

chart_points = _impl.chart_points
chart_log_components = _impl.chart_log_components

__all__ = ["BACKEND", "chart_points", "chart_log_components"]
