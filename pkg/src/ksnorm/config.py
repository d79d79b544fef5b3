"""Shared defaults: truncation levels, search radii, enumeration version tag."""

import os

#: Identifier of the frozen rational/cube enumeration.  It is embedded in every
#: serialized report; norm values are only comparable for equal ids.
ENUMERATION_ID = "cw-boustrophedon-v1"

#: Default truncation level K for the weighted norm sums (t_k = 2^-k makes the
#: omitted tail at most 2^-64 per unit of per-term bound).
DEFAULT_K = 64

#: Half-width R of the box substituted for an unbounded search region.
DEFAULT_SEARCH_RADIUS = 64.0

#: Version string stamped into CLI reports.
TOOL_VERSION = "0.1.0"


def thread_cap() -> int:
    """Worker cap from KSNORM_THREADS (>=1); defaults to 1 (serial, deterministic)."""
    raw = os.environ.get("KSNORM_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)
