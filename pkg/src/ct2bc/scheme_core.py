"""Scheme-agnostic framework: security parameters, joint instance-pair
generation from a shared bit stream, and the generic commit/unveil/verify
contract both concrete schemes implement."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional, Sequence, Union

from .coin_toss import BitStream
from .errors import ParameterMismatchError, StreamExhaustedError

if TYPE_CHECKING:
    from .subgraph import GraphInstance, OrderedSubset, SubgraphPayload
    from .subset_sum import KnapsackInstance, SelectionBits, SumPayload

    Instance = Union[GraphInstance, KnapsackInstance]
    Payload = Union[SubgraphPayload, SumPayload]
    Witness = Union[OrderedSubset, SelectionBits]


class SchemeId(enum.Enum):
    SUBGRAPH = "subgraph"
    SUBSET_SUM = "subset-sum"


class RejectReason(enum.Enum):
    WITNESS_MALFORMED = "witness-malformed"
    ASSOCIATION_FAILS = "association-fails"
    SCHEME_MISMATCH = "scheme-mismatch"


@dataclass(frozen=True)
class SchemeParams:
    """Agreed grading of the public class (m) and the witness class (n)."""

    scheme: SchemeId
    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")
        if self.scheme is SchemeId.SUBGRAPH and not self.n < self.m:
            raise ValueError("subgraph scheme requires 1 <= n < m")
        if self.scheme is SchemeId.SUBSET_SUM and self.n != self.m:
            raise ValueError("subset-sum scheme fixes n = m")


def grading_bits(params: SchemeParams) -> int:
    """Bits identifying one member of the public class at grade m."""
    if params.scheme is SchemeId.SUBGRAPH:
        return params.m * (params.m - 1) // 2
    return params.m * params.m


def bits_required(params: SchemeParams) -> int:
    """Joint tosses needed to generate both public instances."""
    return 2 * grading_bits(params)


@dataclass(frozen=True)
class InstancePair:
    """The two jointly generated public instances, plus the exact stream
    segment both parties consumed to derive them.

    c0 comes from the first grading_bits(params) bits of the stream, c1 from
    the next; any regeneration draws (subset-sum zero-element rule) are
    appended after the base segment and accounted in regen_draws.
    """

    c0: "Instance"
    c1: "Instance"
    generation_transcript: BitStream
    base_bit_count: int
    regen_draws: int = 0

    def instance(self, bit: int) -> "Instance":
        if bit not in (0, 1):
            raise ValueError("bit must be 0 or 1")
        return self.c1 if bit else self.c0

    @property
    def bits_consumed(self) -> int:
        return len(self.generation_transcript)


@dataclass(frozen=True)
class Commitment:
    scheme: SchemeId
    payload: "Payload"


@dataclass(frozen=True)
class Opening:
    claimed_bit: int
    witness: "Witness"

    def __post_init__(self):
        if self.claimed_bit not in (0, 1):
            raise ValueError("claimed_bit must be 0 or 1")


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    bit: Optional[int] = None
    reason: Optional[RejectReason] = None

    @classmethod
    def accept(cls, bit: int) -> "Verdict":
        return cls(accepted=True, bit=bit)

    @classmethod
    def reject(cls, reason: RejectReason) -> "Verdict":
        return cls(accepted=False, reason=reason)


class InstanceDeriver:
    """Incremental decoder from joint toss bits to an InstancePair.

    Both parties run one of these against the same shared bits.  feed()
    accepts exactly the number of bits needed() reports; for subset-sum,
    elements that decode to zero request m fresh bits each until every
    element is positive.
    """

    # regeneration converges almost surely on honest randomness; the cap only
    # trips on degenerate joint bits (e.g. two parties echoing the same seed)
    MAX_REGEN_ROUNDS = 64

    def __init__(self, params: SchemeParams):
        self.params = params
        self._base = bits_required(params)
        self._bits: list[int] = []
        self._elements: Optional[list[list[int]]] = None
        self._zero_queue: list[tuple[int, int]] = []
        self._regen_draws = 0
        self._regen_rounds = 0
        self._done = False

    def needed(self) -> int:
        if self._done:
            return 0
        if len(self._bits) < self._base:
            return self._base - len(self._bits)
        return self.params.m * len(self._zero_queue)

    def feed(self, bits: Sequence[int]) -> None:
        expected = self.needed()
        if expected == 0:
            raise ParameterMismatchError("deriver is complete; no more bits expected")
        if len(bits) != expected:
            raise ParameterMismatchError(
                f"expected exactly {expected} bits, got {len(bits)}")
        self._bits.extend(bits)
        if self._elements is None and len(self._bits) == self._base:
            self._decode_base()
        elif self._zero_queue:
            self._apply_regeneration(bits)
        self._settle()

    def _decode_base(self) -> None:
        m = self.params.m
        half = self._base // 2
        if self.params.scheme is SchemeId.SUBGRAPH:
            self._done = True
        else:
            from .subset_sum import decode_elements

            self._elements = [
                decode_elements(m, self._bits[:half]),
                decode_elements(m, self._bits[half:self._base]),
            ]
            self._zero_queue = [
                (which, idx)
                for which in (0, 1)
                for idx, value in enumerate(self._elements[which])
                if value == 0
            ]

    def _apply_regeneration(self, bits: Sequence[int]) -> None:
        from .bitpack import bits_to_int

        self._regen_rounds += 1
        if self._regen_rounds > self.MAX_REGEN_ROUNDS:
            raise StreamExhaustedError(
                "element regeneration is not converging; joint randomness degenerate")
        m = self.params.m
        assert self._elements is not None
        still_zero: list[tuple[int, int]] = []
        for slot, (which, idx) in enumerate(self._zero_queue):
            value = bits_to_int(bits[slot * m:(slot + 1) * m])
            self._elements[which][idx] = value
            self._regen_draws += 1
            if value == 0:
                still_zero.append((which, idx))
        self._zero_queue = still_zero

    def _settle(self) -> None:
        if self._elements is not None and not self._zero_queue:
            self._done = True

    def result(self, source_engine: str) -> InstancePair:
        if self.needed():
            raise StreamExhaustedError(
                f"instance derivation still needs {self.needed()} bits")
        m = self.params.m
        half = self._base // 2
        if self.params.scheme is SchemeId.SUBGRAPH:
            from .subgraph import decode_graph

            c0, c1 = decode_graph(m, self._bits[:half]), decode_graph(m, self._bits[half:])
        else:
            from .subset_sum import KnapsackInstance

            assert self._elements is not None
            c0 = KnapsackInstance(tuple(self._elements[0]))
            c1 = KnapsackInstance(tuple(self._elements[1]))
        transcript = BitStream(
            bits=tuple(self._bits), source_engine=source_engine, toss_count=len(self._bits))
        return InstancePair(
            c0=c0, c1=c1, generation_transcript=transcript,
            base_bit_count=self._base, regen_draws=self._regen_draws)


def generate_instance_pair(
    params: SchemeParams,
    stream: BitStream,
    more_bits: Callable[[int], Sequence[int]] | None = None,
) -> InstancePair:
    """Decode the two public instances from a shared stream.

    The stream must hold exactly bits_required(params) bits.  When the
    subset-sum zero-element rule fires, `more_bits(count)` supplies the
    fresh joint tosses; without it a StreamExhaustedError is raised.
    """
    if len(stream) != bits_required(params):
        raise ParameterMismatchError(
            f"stream has {len(stream)} bits, scheme needs {bits_required(params)}")
    deriver = InstanceDeriver(params)
    deriver.feed(stream.bits)
    while deriver.needed():
        if more_bits is None:
            raise StreamExhaustedError(
                f"zero element regeneration needs {deriver.needed()} more bits")
        extra = tuple(more_bits(deriver.needed()))
        deriver.feed(extra)
    return deriver.result(stream.source_engine)


def commit_bit(params: SchemeParams, pair: InstancePair, bit: int,
               rng: random.Random) -> tuple[Commitment, Opening]:
    """Commit to `bit` against the jointly generated pair."""
    if params.scheme is SchemeId.SUBGRAPH:
        from .subgraph import sg_commit

        return sg_commit(params, pair, bit, rng)
    from .subset_sum import ks_commit

    return ks_commit(params, pair, bit, rng)


def verify_opening(params: SchemeParams, pair: InstancePair, com: Commitment,
                   opening: Opening) -> Verdict:
    """Check an unveil against the claimed instance only.

    The verdict never depends on the instance for the other bit value; the
    attack harness, not honest verification, is where the other instance
    gets inspected.
    """
    from .subgraph import SubgraphPayload, sg_verify
    from .subset_sum import SumPayload, ks_verify

    if com.scheme is not params.scheme:
        return Verdict.reject(RejectReason.SCHEME_MISMATCH)
    if params.scheme is SchemeId.SUBGRAPH:
        if not isinstance(com.payload, SubgraphPayload):
            return Verdict.reject(RejectReason.SCHEME_MISMATCH)
        if com.payload.vertex_count != params.n:
            return Verdict.reject(RejectReason.SCHEME_MISMATCH)
        return sg_verify(pair, com.payload, opening)
    if not isinstance(com.payload, SumPayload):
        return Verdict.reject(RejectReason.SCHEME_MISMATCH)
    if com.payload.value >= params.m << params.m:
        return Verdict.reject(RejectReason.SCHEME_MISMATCH)
    return ks_verify(pair, com.payload, opening)
