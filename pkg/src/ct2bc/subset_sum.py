"""Subset-sum commitment scheme.

Public instances are ordered size-m sets of positive integers below 2^m
(density ~ 1); a commitment is the sum of a secret nonzero selection of the
claimed instance's elements; the unveil reveals the selection bits.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterator, Sequence

from .bitpack import bits_to_int
from .errors import ParameterMismatchError
from .scheme_core import (Commitment, InstancePair, Opening, RejectReason,
                          SchemeId, SchemeParams, Verdict)


@dataclass(frozen=True)
class KnapsackInstance:
    """Ordered multiset of positive integers.

    Duplicates are allowed; random generation may repeat values.  Instances
    decoded from a joint toss stream have elements of at most m bits by
    construction; the oracles below accept any positive elements.
    """

    elements: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(int(e) for e in self.elements))
        if len(self.elements) < 1:
            raise ValueError("instance needs at least one element")
        if any(e < 1 for e in self.elements):
            raise ValueError("elements must be positive")

    @property
    def size(self) -> int:
        return len(self.elements)

    def max_bitlength(self) -> int:
        return max(e.bit_length() for e in self.elements)

    def density(self) -> float:
        return self.size / self.max_bitlength()


@dataclass(frozen=True)
class SelectionBits:
    """The secret selection; length and the nonzero rule are checked at
    verification time."""

    x: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(int(b) for b in self.x))
        if any(b not in (0, 1) for b in self.x):
            raise ValueError("selection entries must be bits")


@dataclass(frozen=True)
class SumPayload:
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("sum payload cannot be negative")


def decode_elements(m: int, bits: Sequence[int]) -> list[int]:
    """Element-major, MSB-first decode of m elements of m bits each.

    Zeros are returned as-is; the deriver replaces them from fresh joint
    tosses before an instance is built.
    """
    if len(bits) != m * m:
        raise ParameterMismatchError(f"need {m * m} bits for {m} elements, got {len(bits)}")
    return [bits_to_int(bits[i * m:(i + 1) * m]) for i in range(m)]


def selection_sum(c: KnapsackInstance, x: Sequence[int]) -> int:
    return sum(e for e, chosen in zip(c.elements, x) if chosen)


def ks_commit(params: SchemeParams, pair: InstancePair, a: int,
              rng: random.Random) -> tuple[Commitment, Opening]:
    """Commit by summing a uniformly random nonzero selection of the claimed
    instance's elements (all-zero selections are resampled)."""
    c = pair.instance(a)
    m = c.size
    while True:
        x = tuple(rng.getrandbits(1) for _ in range(m))
        if any(x):
            break
    return (Commitment(scheme=SchemeId.SUBSET_SUM, payload=SumPayload(selection_sum(c, x))),
            Opening(claimed_bit=a, witness=SelectionBits(x)))


def ks_verify(pair: InstancePair, payload: SumPayload, opening: Opening) -> Verdict:
    if not isinstance(opening.witness, SelectionBits):
        return Verdict.reject(RejectReason.SCHEME_MISMATCH)
    c = pair.instance(opening.claimed_bit)
    x = opening.witness.x
    if len(x) != c.size or not any(x):
        return Verdict.reject(RejectReason.WITNESS_MALFORMED)
    if selection_sum(c, x) != payload.value:
        return Verdict.reject(RejectReason.ASSOCIATION_FAILS)
    return Verdict.accept(opening.claimed_bit)


# --- brute-force representation oracles ------------------------------------


def _gray_subsets(elements: Sequence[int]) -> Iterator[tuple[int, int]]:
    """(mask, sum) over every nonzero subset, one element flip per step."""
    total = 0
    mask = 0
    for g in range(1, 1 << len(elements)):
        j = (g & -g).bit_length() - 1
        bit = 1 << j
        if mask & bit:
            mask ^= bit
            total -= elements[j]
        else:
            mask |= bit
            total += elements[j]
        yield mask, total


def _mask_to_bits(mask: int, m: int) -> tuple[int, ...]:
    return tuple((mask >> i) & 1 for i in range(m))


def _half_sums(elements: Sequence[int]) -> list[int]:
    """sums[mask] for every subset mask of the given elements (zero included)."""
    sums = [0] * (1 << len(elements))
    for mask in range(1, len(sums)):
        low = mask & -mask
        sums[mask] = sums[mask ^ low] + elements[low.bit_length() - 1]
    return sums


def ks_find_all_representations(d: int, c: KnapsackInstance,
                                method: str = "plain") -> frozenset[tuple[int, ...]]:
    """All nonzero selections of c's elements summing to d.

    Two independent implementations that must agree: "plain" walks every
    subset in Gray-code order, "mitm" meets in the middle over half-sum
    tables.
    """
    m = c.size
    if method == "plain":
        found = {_mask_to_bits(mask, m)
                 for mask, total in _gray_subsets(c.elements) if total == d}
        return frozenset(found)
    if method == "mitm":
        h = m // 2
        lo_sums = _half_sums(c.elements[:h])
        hi_sums = _half_sums(c.elements[h:])
        by_sum: dict[int, list[int]] = {}
        for hi_mask, s in enumerate(hi_sums):
            by_sum.setdefault(s, []).append(hi_mask)
        found = set()
        for lo_mask, s in enumerate(lo_sums):
            for hi_mask in by_sum.get(d - s, ()):
                combined = lo_mask | (hi_mask << h)
                if combined:
                    found.add(_mask_to_bits(combined, m))
        return frozenset(found)
    raise ValueError(f"unknown method {method!r}")


def has_representation(d: int, c: KnapsackInstance) -> bool:
    """Membership-only oracle, meet-in-the-middle with early exit."""
    m = c.size
    h = m // 2
    lo_sums = _half_sums(c.elements[:h])
    hi_set = set(_half_sums(c.elements[h:]))
    for lo_mask, s in enumerate(lo_sums):
        rem = d - s
        # rem == 0 is only achieved by the empty right half (elements are
        # positive), so it needs a nonzero left mask to avoid x = 0
        if rem in hi_set and (rem > 0 or lo_mask):
            return True
    return False


def achievable_sums(c: KnapsackInstance, method: str = "plain"):
    """Sorted array of every nonzero-selection sum of c.

    "plain" enumerates all 2^m subsets; "mitm" merges the two half-sum
    tables with an outer addition, which is what keeps m = 24 tractable.
    """
    import numpy as np

    m = c.size
    if method == "plain":
        sums = {total for _, total in _gray_subsets(c.elements)}
        return np.array(sorted(sums), dtype=np.int64)
    if method == "mitm":
        h = m // 2
        lo = np.array(_half_sums(c.elements[:h]), dtype=np.int64)
        hi = np.array(_half_sums(c.elements[h:]), dtype=np.int64)
        sums = np.unique(np.add.outer(lo, hi).ravel())
        return sums[sums > 0]
    raise ValueError(f"unknown method {method!r}")
