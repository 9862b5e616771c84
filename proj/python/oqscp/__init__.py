"""Weak-coupling reduced-dynamics laboratory: python surface of the C++ core."""

try:
    from oqscp._oqscp import *  # noqa: F401,F403  (installed layout)
    from oqscp import _oqscp as _core
except ImportError:  # in-tree / build-dir layout
    from _oqscp import *  # noqa: F401,F403
    import _oqscp as _core

__all__ = [name for name in dir(_core) if not name.startswith("_")]
__version__ = "0.1.0"
