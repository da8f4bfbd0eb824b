"""Spread small and exceptional parts of a block over the retained parts."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Hashable, List, Optional, Sequence

from ..core import ParameterError


@dataclass
class Redistribution:
    parts: Dict[Hashable, List]
    moved: Dict[Hashable, int]
    small_mass: int
    retained_mass: int

    def within_growth_bound(self, label) -> bool:
        """Growth ``<= 2 * small / retained * own`` (atom counts)."""
        own = len(self.parts[label]) - self.moved.get(label, 0)
        return self.moved.get(label, 0) * self.retained_mass <= 2 * self.small_mass * own


def redistribute_exceptional(parts: Dict[Hashable, Sequence], threshold: int,
                             exceptional: Optional[Hashable] = None) -> Redistribution:
    """Move the atoms of every part smaller than ``threshold`` (and of ``exceptional``)
    into the remaining parts, proportionally to their sizes.

    Shares use largest-remainder rounding; ties go to the earlier label.
    Atoms are dealt in sorted order, so the result is deterministic.
    """
    labels = list(parts)
    small = [l for l in labels if l == exceptional or len(parts[l]) < threshold]
    targets = [l for l in labels if l not in small]
    pool = sorted(a for l in small for a in parts[l])
    if not pool:
        return Redistribution({l: list(parts[l]) for l in labels}, {}, 0,
                              sum(len(parts[l]) for l in labels))
    if not targets:
        raise ParameterError("every part is below the threshold; nothing to absorb the mass")
    retained = sum(len(parts[l]) for l in targets)
    if retained == 0:
        raise ParameterError("target parts must have positive mass")
    s = len(pool)
    exact = {l: Fraction(s * len(parts[l]), retained) for l in targets}
    share = {l: int(exact[l]) for l in targets}
    left = s - sum(share.values())
    order = sorted(targets, key=lambda l: (-(exact[l] - share[l]), targets.index(l)))
    for l in order[:left]:
        share[l] += 1
    out = {l: list(parts[l]) for l in targets}
    pos = 0
    for l in targets:
        out[l].extend(pool[pos:pos + share[l]])
        pos += share[l]
    return Redistribution(out, share, s, retained)
