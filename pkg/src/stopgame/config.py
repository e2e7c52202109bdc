"""Desk-scale guards for enumeration and dynamic programming.

The caps keep brute-force oracles honest about instance size.  They can be
raised through the ``STOPGAME_GUARD_OVERRIDE`` environment variable, either
as a bare integer applied to both caps or as ``enum=N,dp=M``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

ENV_OVERRIDE = "STOPGAME_GUARD_OVERRIDE"

DEFAULT_ENUMERATION_CAP = 10**6
DEFAULT_DP_STATE_CAP = 10**7


@dataclass(frozen=True)
class Guards:
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    dp_state_cap: int = DEFAULT_DP_STATE_CAP


def current_guards() -> Guards:
    """Guards in effect, honoring the environment override."""
    raw = os.environ.get(ENV_OVERRIDE)
    if not raw:
        return Guards()
    enum_cap = DEFAULT_ENUMERATION_CAP
    dp_cap = DEFAULT_DP_STATE_CAP
    raw = raw.strip()
    if raw.isdigit():
        enum_cap = dp_cap = int(raw)
    else:
        for part in raw.split(","):
            key, _, val = part.partition("=")
            key = key.strip().lower()
            if key in ("enum", "enumeration") and val.strip().isdigit():
                enum_cap = int(val)
            elif key in ("dp", "dp_states") and val.strip().isdigit():
                dp_cap = int(val)
    return Guards(enumeration_cap=enum_cap, dp_state_cap=dp_cap)
