"""Tag-length-value wire codec for the two-party session.

Frame layout: 1-byte type tag, 4-byte big-endian body length, body bytes.
All integers are big-endian; all bitmaps are MSB-first and zero-padded to a
byte boundary; rationals are an s64 numerator followed by a u64 denominator.
Decoding is strict: unknown tags, length mismatches, trailing bytes,
nonzero padding bits, and non-minimal integer encodings all raise
FrameError, so encode/decode is a bijection on the valid message set.

Body schemas (tag: fields):
  0x01 PARAMS       scheme u8, m u16, n u16, engine_len u16, engine utf-8
  0x02 TOSS_A       count u32, send_time rational, send_position rational,
                    contribution bitmap
  0x03 TOSS_B       same schema as TOSS_A
  0x04 TOSS_COMMIT  count u32, sha-256 digest (32 bytes)
  0x05 TOSS_OPEN    count u32, contribution bitmap, salt (32 bytes)
  0x10 COMMITMENT   scheme u8, payload (graph: n u16 + edge bitmap;
                    sum: byte_len u16 + minimal big-endian magnitude)
  0x11 UNVEIL       claimed_bit u8, scheme u8, echo_len u32, echoed
                    commitment body, witness (ordered subset: count u16 +
                    u16 per index; selection: m u16 + bitmap)
  0x20 VERDICT      accepted u8, value u8 (bit when accepted, else reason)
  0x7F ABORT        reason u8
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .bitpack import pack_bits, unpack_bits
from .errors import AbortReason, FrameError
from .scheme_core import Commitment, Opening, RejectReason, SchemeId
from .subgraph import GraphInstance, OrderedSubset, SubgraphPayload
from .subset_sum import KnapsackInstance, SelectionBits, SumPayload

TAG_PARAMS = 0x01
TAG_TOSS_A = 0x02
TAG_TOSS_B = 0x03
TAG_TOSS_COMMIT = 0x04
TAG_TOSS_OPEN = 0x05
TAG_COMMITMENT = 0x10
TAG_UNVEIL = 0x11
TAG_VERDICT = 0x20
TAG_ABORT = 0x7F

MAX_BODY_BYTES = 1 << 20
DIGEST_BYTES = 32

_SCHEME_CODES = {SchemeId.SUBGRAPH: 0x01, SchemeId.SUBSET_SUM: 0x02}
_SCHEMES_BY_CODE = {v: k for k, v in _SCHEME_CODES.items()}

_ABORT_CODES = {
    AbortReason.LATE_ARRIVAL: 0x01,
    AbortReason.MALFORMED_MESSAGE: 0x02,
    AbortReason.COMMITMENT_OPEN_FAILURE: 0x03,
    AbortReason.COUNTERPARTY_SILENT: 0x04,
    AbortReason.OUT_OF_PHASE: 0x05,
    AbortReason.PARAMETER_MISMATCH: 0x06,
}
_ABORTS_BY_CODE = {v: k for k, v in _ABORT_CODES.items()}

_REJECT_CODES = {
    RejectReason.WITNESS_MALFORMED: 0x01,
    RejectReason.ASSOCIATION_FAILS: 0x02,
    RejectReason.SCHEME_MISMATCH: 0x03,
}
_REJECTS_BY_CODE = {v: k for k, v in _REJECT_CODES.items()}


@dataclass(frozen=True)
class ParamsMsg:
    scheme: SchemeId
    m: int
    n: int
    engine: str


@dataclass(frozen=True)
class TossShareMsg:
    """One party's batch of contribution bits with its asserted send event."""

    side: int  # 0 = committer share (TOSS_A), 1 = verifier share (TOSS_B)
    send_time: Fraction
    send_position: Fraction
    bits: tuple[int, ...]


@dataclass(frozen=True)
class TossCommitMsg:
    count: int
    digest: bytes


@dataclass(frozen=True)
class TossOpenMsg:
    bits: tuple[int, ...]
    salt: bytes


@dataclass(frozen=True)
class CommitmentMsg:
    commitment: Commitment


@dataclass(frozen=True)
class UnveilMsg:
    opening: Opening
    scheme: SchemeId
    echo: bytes  # byte-exact copy of the COMMITMENT body


@dataclass(frozen=True)
class VerdictMsg:
    accepted: bool
    value: int  # accepted bit, or a reject-reason code


@dataclass(frozen=True)
class AbortMsg:
    reason: AbortReason


WireMessage = Union[ParamsMsg, TossShareMsg, TossCommitMsg, TossOpenMsg,
                    CommitmentMsg, UnveilMsg, VerdictMsg, AbortMsg]


class _Reader:
    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self._pos + n > len(self._data):
            raise FrameError("body truncated")
        out = self._data[self._pos:self._pos + n]
        self._pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def rational(self) -> Fraction:
        num = struct.unpack(">q", self.take(8))[0]
        den = struct.unpack(">Q", self.take(8))[0]
        if den == 0:
            raise FrameError("rational with zero denominator")
        return Fraction(num, den)

    def bitmap(self, count: int) -> tuple[int, ...]:
        raw = self.take((count + 7) // 8)
        try:
            return unpack_bits(raw, count)
        except ValueError as exc:
            raise FrameError(str(exc)) from exc

    def done(self):
        if self._pos != len(self._data):
            raise FrameError("trailing bytes in body")


def _encode_rational(value: Fraction) -> bytes:
    value = Fraction(value)
    if not (-(1 << 63) <= value.numerator < 1 << 63) or value.denominator >= 1 << 64:
        raise ValueError("rational out of wire range")
    return struct.pack(">qQ", value.numerator, value.denominator)


# --- canonical sub-encodings (external interface) ---------------------------


def encode_graph_like(vertex_count: int, edges: frozenset[tuple[int, int]]) -> bytes:
    from .subgraph import pair_sequence

    pairs = pair_sequence(vertex_count)
    bits = [1 if p in edges else 0 for p in pairs]
    return struct.pack(">H", vertex_count) + pack_bits(bits)


def _decode_graph_like(r: _Reader) -> tuple[int, frozenset[tuple[int, int]]]:
    from .subgraph import pair_sequence

    m = r.u16()
    if m < 1:
        raise FrameError("graph with no vertices")
    pairs = pair_sequence(m)
    bits = r.bitmap(len(pairs))
    return m, frozenset(p for p, b in zip(pairs, bits) if b)


def encode_graph_instance(g: GraphInstance) -> bytes:
    return encode_graph_like(g.vertex_count, g.edges)


def decode_graph_instance(data: bytes) -> GraphInstance:
    r = _Reader(data)
    m, edges = _decode_graph_like(r)
    r.done()
    return GraphInstance(vertex_count=m, edges=edges)


def encode_knapsack_instance(c: KnapsackInstance) -> bytes:
    from .bitpack import int_to_bits

    m = c.size
    bits: list[int] = []
    for e in c.elements:
        bits.extend(int_to_bits(e, m))
    return struct.pack(">H", m) + pack_bits(bits)


def decode_knapsack_instance(data: bytes) -> KnapsackInstance:
    from .bitpack import bits_to_int

    r = _Reader(data)
    m = r.u16()
    if m < 1:
        raise FrameError("knapsack with no elements")
    bits = r.bitmap(m * m)
    r.done()
    try:
        return KnapsackInstance(
            tuple(bits_to_int(bits[i * m:(i + 1) * m]) for i in range(m)))
    except ValueError as exc:
        raise FrameError(str(exc)) from exc


def _encode_sum_value(value: int) -> bytes:
    magnitude = value.to_bytes((value.bit_length() + 7) // 8, "big") if value else b""
    return struct.pack(">H", len(magnitude)) + magnitude


def _decode_sum_value(r: _Reader) -> int:
    length = r.u16()
    raw = r.take(length)
    if raw and raw[0] == 0:
        raise FrameError("non-minimal integer encoding")
    return int.from_bytes(raw, "big")


def encode_commitment_body(commitment: Commitment) -> bytes:
    code = _SCHEME_CODES[commitment.scheme]
    if commitment.scheme is SchemeId.SUBGRAPH:
        payload = commitment.payload
        assert isinstance(payload, SubgraphPayload)
        return bytes([code]) + encode_graph_like(payload.vertex_count, payload.edges)
    payload = commitment.payload
    assert isinstance(payload, SumPayload)
    return bytes([code]) + _encode_sum_value(payload.value)


def _decode_commitment_body(r: _Reader) -> Commitment:
    scheme = _decode_scheme(r.u8())
    if scheme is SchemeId.SUBGRAPH:
        n, edges = _decode_graph_like(r)
        try:
            payload: SubgraphPayload | SumPayload = SubgraphPayload(
                vertex_count=n, edges=edges)
        except ValueError as exc:
            raise FrameError(str(exc)) from exc
    else:
        payload = SumPayload(_decode_sum_value(r))
    return Commitment(scheme=scheme, payload=payload)


def _decode_scheme(code: int) -> SchemeId:
    try:
        return _SCHEMES_BY_CODE[code]
    except KeyError:
        raise FrameError(f"unknown scheme code {code:#x}") from None


def _encode_witness(witness) -> bytes:
    if isinstance(witness, OrderedSubset):
        if any(i >= 1 << 16 for i in witness.indices):
            raise ValueError("vertex index out of wire range")
        return struct.pack(">H", len(witness.indices)) + b"".join(
            struct.pack(">H", i) for i in witness.indices)
    if isinstance(witness, SelectionBits):
        return struct.pack(">H", len(witness.x)) + pack_bits(witness.x)
    raise TypeError(f"unknown witness type {type(witness).__name__}")


def _decode_witness(r: _Reader, scheme: SchemeId):
    count = r.u16()
    if scheme is SchemeId.SUBGRAPH:
        indices = tuple(r.u16() for _ in range(count))
        if any(i < 1 for i in indices):
            raise FrameError("vertex indices start at 1")
        return OrderedSubset(indices)
    return SelectionBits(r.bitmap(count))


# --- frames ------------------------------------------------------------------


def encode_frame(msg: WireMessage) -> bytes:
    """Serialize one message as a complete tag-length-value frame."""
    if isinstance(msg, ParamsMsg):
        engine = msg.engine.encode("utf-8")
        if len(engine) > 0xFFFF:
            raise ValueError("engine spec too long")
        body = struct.pack(">BHHH", _SCHEME_CODES[msg.scheme], msg.m, msg.n,
                           len(engine)) + engine
        tag = TAG_PARAMS
    elif isinstance(msg, TossShareMsg):
        body = (struct.pack(">I", len(msg.bits))
                + _encode_rational(msg.send_time)
                + _encode_rational(msg.send_position)
                + pack_bits(msg.bits))
        tag = TAG_TOSS_A if msg.side == 0 else TAG_TOSS_B
    elif isinstance(msg, TossCommitMsg):
        if len(msg.digest) != DIGEST_BYTES:
            raise ValueError("digest must be 32 bytes")
        body = struct.pack(">I", msg.count) + msg.digest
        tag = TAG_TOSS_COMMIT
    elif isinstance(msg, TossOpenMsg):
        if len(msg.salt) != DIGEST_BYTES:
            raise ValueError("salt must be 32 bytes")
        body = struct.pack(">I", len(msg.bits)) + pack_bits(msg.bits) + msg.salt
        tag = TAG_TOSS_OPEN
    elif isinstance(msg, CommitmentMsg):
        body = encode_commitment_body(msg.commitment)
        tag = TAG_COMMITMENT
    elif isinstance(msg, UnveilMsg):
        body = (struct.pack(">BB", msg.opening.claimed_bit, _SCHEME_CODES[msg.scheme])
                + struct.pack(">I", len(msg.echo)) + msg.echo
                + _encode_witness(msg.opening.witness))
        tag = TAG_UNVEIL
    elif isinstance(msg, VerdictMsg):
        body = struct.pack(">BB", 1 if msg.accepted else 0, msg.value)
        tag = TAG_VERDICT
    elif isinstance(msg, AbortMsg):
        body = bytes([_ABORT_CODES[msg.reason]])
        tag = TAG_ABORT
    else:
        raise TypeError(f"cannot encode {type(msg).__name__}")
    if len(body) > MAX_BODY_BYTES:
        raise ValueError("frame body too large")
    return struct.pack(">BI", tag, len(body)) + body


def decode_frame(frame: bytes) -> WireMessage:
    """Parse one complete frame; raises FrameError on any malformation."""
    if len(frame) < 5:
        raise FrameError("frame shorter than its header")
    tag, length = struct.unpack(">BI", frame[:5])
    if length > MAX_BODY_BYTES:
        raise FrameError("declared body length exceeds the frame cap")
    if len(frame) != 5 + length:
        raise FrameError("frame length disagrees with its header")
    r = _Reader(frame[5:])
    msg = _decode_body(tag, r)
    r.done()
    return msg


def _decode_body(tag: int, r: _Reader) -> WireMessage:
    if tag == TAG_PARAMS:
        scheme = _decode_scheme(r.u8())
        m, n, engine_len = r.u16(), r.u16(), r.u16()
        try:
            engine = r.take(engine_len).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FrameError("engine spec is not utf-8") from exc
        return ParamsMsg(scheme=scheme, m=m, n=n, engine=engine)
    if tag in (TAG_TOSS_A, TAG_TOSS_B):
        count = r.u32()
        send_time = r.rational()
        send_position = r.rational()
        bits = r.bitmap(count)
        return TossShareMsg(side=0 if tag == TAG_TOSS_A else 1,
                            send_time=send_time, send_position=send_position,
                            bits=bits)
    if tag == TAG_TOSS_COMMIT:
        count = r.u32()
        return TossCommitMsg(count=count, digest=r.take(DIGEST_BYTES))
    if tag == TAG_TOSS_OPEN:
        count = r.u32()
        bits = r.bitmap(count)
        return TossOpenMsg(bits=bits, salt=r.take(DIGEST_BYTES))
    if tag == TAG_COMMITMENT:
        return CommitmentMsg(commitment=_decode_commitment_body(r))
    if tag == TAG_UNVEIL:
        claimed_bit = r.u8()
        if claimed_bit not in (0, 1):
            raise FrameError("claimed bit must be 0 or 1")
        scheme = _decode_scheme(r.u8())
        echo = r.take(r.u32())
        witness = _decode_witness(r, scheme)
        return UnveilMsg(opening=Opening(claimed_bit=claimed_bit, witness=witness),
                         scheme=scheme, echo=echo)
    if tag == TAG_VERDICT:
        accepted = r.u8()
        value = r.u8()
        if accepted not in (0, 1):
            raise FrameError("verdict accepted flag must be 0 or 1")
        if accepted and value not in (0, 1):
            raise FrameError("accepted verdict must carry a bit")
        if not accepted and value not in _REJECTS_BY_CODE:
            raise FrameError(f"unknown reject reason code {value:#x}")
        return VerdictMsg(accepted=bool(accepted), value=value)
    if tag == TAG_ABORT:
        code = r.u8()
        if code not in _ABORTS_BY_CODE:
            raise FrameError(f"unknown abort reason code {code:#x}")
        return AbortMsg(reason=_ABORTS_BY_CODE[code])
    raise FrameError(f"unknown frame tag {tag:#x}")


def reject_code(reason: RejectReason) -> int:
    return _REJECT_CODES[reason]


def reject_reason_from_code(code: int) -> RejectReason:
    return _REJECTS_BY_CODE[code]


def scheme_code(scheme: SchemeId) -> int:
    return _SCHEME_CODES[scheme]
