"""Smart-meter phase identification from voltage correlation.

Thin Python surface over the C++ core: ingestion, low-power segmentation,
pairwise correlation distances, hierarchical clustering, majority-vote
labeling, CTS ensemble clustering and the secondary-circuit simulator.
"""

try:
    from ._phaseid import *  # noqa: F401,F403
    from ._phaseid import __version__  # noqa: F401
except ImportError:  # running against a build tree where _phaseid sits flat
    from _phaseid import *  # noqa: F401,F403
    from _phaseid import __version__  # noqa: F401
