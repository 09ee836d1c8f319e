"""Canonical encoding and enumeration of coordinate subsets.

A subset ``A`` of ``{1, ..., d}`` is encoded as an integer bit mask with bit
``i - 1`` set iff ``i`` is in ``A``; the empty set is mask ``0``.  All
orderings in the library are graded-lexicographic: ascending cardinality,
ties broken by ascending mask value.  The point of this convention is that
truncating to cardinality ``<= c`` is a prefix of the full order, and that
low-order effects are preferred whenever a deterministic subset selection
is required.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionTooLarge

MAX_MASK_DIMENSION = 30
DEFAULT_MAX_EXACT_D = 14
EXACT_D_ENV_VAR = "MBHD_MAX_EXACT_D"


def max_exact_dimension() -> int:
    """Largest dimension allowed for full power-set enumeration."""
    raw = os.environ.get(EXACT_D_ENV_VAR)
    if raw is None:
        return DEFAULT_MAX_EXACT_D
    return int(raw)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_to_indices(mask: int) -> tuple[int, ...]:
    """1-based sorted coordinate indices of a mask."""
    return tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


def indices_to_mask(indices) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << (i - 1)
    return mask


def subset_label(mask: int) -> str:
    """Render a mask as a sorted index list, e.g. ``[1,3]``; empty set is ``[]``."""
    return "[" + ",".join(str(i) for i in mask_to_indices(mask)) + "]"


@dataclass(frozen=True)
class SubsetOrder:
    """Graded-lexicographic sequence of subset masks for dimension ``d``.

    ``cap`` is the optional cardinality bound; ``None`` means the full
    power set.  Position 0 is always the empty set.
    """

    d: int
    cap: int | None
    masks: tuple[int, ...] = field(repr=False)

    def __len__(self) -> int:
        return len(self.masks)

    def __iter__(self):
        return iter(self.masks)

    def index_of(self, mask: int) -> int:
        return self._position[mask]

    def __contains__(self, mask: int) -> bool:
        return mask in self._position

    @property
    def _position(self) -> dict[int, int]:
        pos = self.__dict__.get("_position_cache")
        if pos is None:
            pos = {m: i for i, m in enumerate(self.masks)}
            self.__dict__["_position_cache"] = pos
        return pos

    def labels(self) -> list[str]:
        return [subset_label(m) for m in self.masks]


def truncated_size(d: int, cap: int) -> int:
    """Number of subsets of cardinality <= cap, i.e. 1 + d + C(d,2) + ..."""
    return sum(math.comb(d, k) for k in range(cap + 1))


def enumerate_subsets(d: int, cap: int | None = None) -> SubsetOrder:
    """All subsets of {1,...,d} in graded-lex order, optionally capped.

    Raises DimensionTooLarge for an uncapped enumeration beyond the
    exact-mode limit (default 14, override with the MBHD_MAX_EXACT_D
    environment variable).
    """
    if not 1 <= d <= MAX_MASK_DIMENSION:
        raise ValueError(f"dimension must be in [1, {MAX_MASK_DIMENSION}], got {d}")
    if cap is not None and not 0 <= cap <= d:
        raise ValueError(f"cardinality cap must be in [0, {d}], got {cap}")
    if cap is None and d > max_exact_dimension():
        raise DimensionTooLarge(
            f"full enumeration of 2^{d} subsets exceeds the exact-mode limit "
            f"{max_exact_dimension()}; pass a cardinality cap or raise "
            f"{EXACT_D_ENV_VAR}"
        )
    top = d if cap is None else cap
    masks: list[int] = []
    for k in range(top + 1):
        masks.extend(sorted(m for m in _masks_of_cardinality(d, k)))
    return SubsetOrder(d=d, cap=cap, masks=tuple(masks))


def _masks_of_cardinality(d: int, k: int):
    if k == 0:
        yield 0
        return
    for combo in itertools.combinations(range(d), k):
        yield sum(1 << i for i in combo)


def parity_sign(x: np.ndarray, mask: int) -> int:
    """(-1) to the number of ones of ``x`` on the coordinates in ``mask``."""
    x = np.asarray(x)
    total = 0
    for i in range(mask.bit_length()):
        if mask >> i & 1:
            total += int(x[i])
    return -1 if total & 1 else 1


def parity_column(masks_of_configs: np.ndarray, subset_mask: int) -> np.ndarray:
    """Vector of parity signs over configuration masks (+-1, float)."""
    anded = np.bitwise_and(masks_of_configs, subset_mask)
    ones = np.bitwise_count(anded)
    return np.where(ones & 1, -1.0, 1.0)
