"""Kernel backend selection: compiled extension with pure-numpy fallback.

Set QHODGE_PURE_PYTHON=1 to force the numpy path.
"""

import os

if os.environ.get("QHODGE_PURE_PYTHON", "") not in ("", "0"):
    from ._conv_py import conv_scatter

    BACKEND = "python"
else:
    try:
        from ._conv_cy import conv_scatter

        BACKEND = "cython"
    except ImportError:
        from ._conv_py import conv_scatter

        BACKEND = "python"

__all__ = ["conv_scatter", "BACKEND"]
