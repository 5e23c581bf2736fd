"""Hybrid retrieval environments and search-agent sessions."""

try:
    from ._core import *  # noqa: F401,F403  (installed package layout)
except ImportError:  # pragma: no cover - in-tree test layout
    from _core import *  # noqa: F401,F403

__version__ = "0.1.0"
