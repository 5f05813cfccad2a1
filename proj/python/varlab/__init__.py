"""Variability analysis of deep networks: V3, C/G matrices, trainability."""

try:
    from ._varlab import *  # noqa: F401,F403
    from ._varlab import __doc__  # noqa: F401
except ImportError:  # pragma: no cover - in-tree test layout
    from _varlab import *  # noqa: F401,F403
