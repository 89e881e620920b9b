"""Country-stratified splitting of a dataset into two halves."""
from __future__ import annotations

import math
import random
from collections import defaultdict
from typing import Sequence

from .model import DatasetSplit

UNKNOWN_STRATUM = "unknown"


def stratified_split(items: Sequence, ratio: float, seed: int) -> DatasetSplit:
    """Split items (anything with ``id`` and ``country`` attributes) so
    each country stratum is represented proportionally in both halves.

    Within each stratum the items are seeded-shuffled and the first
    ceil(ratio * n) go to half_a; at ratio 0.5 the halves of every
    stratum differ by at most one item.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")

    strata: dict[str, list[str]] = defaultdict(list)
    for item in items:
        country = getattr(item, "country", None) or UNKNOWN_STRATUM
        strata[country].append(item.id)

    a_ids: set[str] = set()
    for country in sorted(strata):
        ids = list(strata[country])
        random.Random(f"{seed}|{country}").shuffle(ids)
        take = math.ceil(ratio * len(ids))
        a_ids.update(ids[:take])

    half_a = tuple(item.id for item in items if item.id in a_ids)
    half_b = tuple(item.id for item in items if item.id not in a_ids)
    return DatasetSplit(half_a=half_a, half_b=half_b, stratum_key="country", seed=seed)
