"""Enumeration guards.

Every exhaustive search consults :func:`guard` for its default size limit.
Setting ``CLAIMSTABLE_MAX_N`` in the environment replaces all of them with
a single value.
"""
from __future__ import annotations

import os
import warnings

from .errors import SizeGuardError

DEFAULT_GUARDS = {
    "blocking": 22,
    "partitions": 12,
    "cycles": 9,
    "alignment": 12,
    "top_coalition": 12,
    "preference_order": 20,
    "sp_scan": 10,
    "explicit_table": 16,
}

ENV_VAR = "CLAIMSTABLE_MAX_N"


def guard(kind: str) -> int:
    override = os.environ.get(ENV_VAR)
    if override:
        return int(override)
    return DEFAULT_GUARDS[kind]


def check_size(n: int, kind: str, max_n: int | None = None) -> None:
    limit = guard(kind) if max_n is None else max_n
    if max_n is not None and max_n > DEFAULT_GUARDS[kind]:
        warnings.warn(
            f"{kind} guard raised to n <= {max_n} (default {DEFAULT_GUARDS[kind]}); "
            "the search is exponential in n",
            stacklevel=3,
        )
    if n > limit:
        raise SizeGuardError(f"{kind} search refused for n={n} (guard n <= {limit})")
