"""Two-party protocol state machine, transcripts, and session runners.

Phase order is fixed: INIT -> PARAMS_AGREED -> TOSSING -> INSTANCES_READY ->
COMMITTED -> UNVEILED -> ACCEPTED | REJECTED, with ABORTED reachable from
anywhere.  Any message outside its phase, any malformed frame, and any failed
crypto check aborts the session with an explicit ABORT frame.

The coin-toss phase is realized on the wire as batched rounds: with the
seeded and relativistic engines each round is one TOSS_A/TOSS_B exchange of
contribution bitmaps (shared bits are the XOR); with the hash-bootstrap
engine each round is TOSS_COMMIT / TOSS_B / TOSS_OPEN.  Extra rounds occur
only when the subset-sum zero-element rule requests fresh bits.

Transcript files start with magic "CT2BC\\0" and a version byte, then carry
the framed messages verbatim (each prefixed by direction and a logical
timestamp); see README for the exact layout.
"""

from __future__ import annotations

import enum
import hashlib
import os
import random
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .coin_toss import (SaltedHashCommitment, SpacetimeConfig, TossSecurityParams,
                        random_salt)
from .errors import AbortReason, FrameError, ProtocolError, StreamExhaustedError
from .scheme_core import (Commitment, InstanceDeriver, InstancePair, Opening,
                          SchemeId, SchemeParams, Verdict, commit_bit,
                          verify_opening)
from .subgraph import SubgraphPayload
from .subset_sum import SumPayload
from .wire import (AbortMsg, CommitmentMsg, ParamsMsg, TossCommitMsg, TossOpenMsg,
                   TossShareMsg, UnveilMsg, VerdictMsg, WireMessage,
                   decode_frame, encode_commitment_body, encode_frame,
                   reject_reason_from_code)

TEST_SEED_ENV = "CT2BC_TEST_SEED"

TRANSCRIPT_MAGIC = b"CT2BC\x00"
TRANSCRIPT_VERSION = 1


class Role(enum.Enum):
    COMMITTER_A = "a"
    VERIFIER_B = "b"


class Phase(enum.Enum):
    INIT = 0
    PARAMS_AGREED = 1
    TOSSING = 2
    INSTANCES_READY = 3
    COMMITTED = 4
    UNVEILED = 5
    ACCEPTED = 6
    REJECTED = 7
    ABORTED = 8


TERMINAL_PHASES = frozenset({Phase.ACCEPTED, Phase.REJECTED, Phase.ABORTED})

ENGINE_KINDS = ("seeded", "relativistic-sim", "hash-bootstrap")


def parse_engine_spec(spec: str) -> tuple[str, Optional[int]]:
    """Split an engine selection string into (kind, seed)."""
    if spec in ("relativistic-sim", "hash-bootstrap"):
        return spec, None
    if spec.startswith("seeded:"):
        try:
            seed = int(spec.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad seed in engine spec {spec!r}") from None
        if not 0 <= seed < 1 << 64:
            raise ValueError("seed must fit in 64 bits")
        return "seeded", seed
    raise ValueError(f"unknown toss engine {spec!r}")


def derive_seed(base: int, label: str) -> int:
    """Stable, platform-independent sub-seed derivation."""
    digest = hashlib.sha256(
        b"ct2bc/derive/v1" + base.to_bytes(8, "big") + label.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class SimChannelClock:
    """Receiver-side arrival stamping for the simulated relativistic channel.

    The honest channel delivers at light speed; tests inject extra delay to
    trip the lightcone rule.
    """

    def __init__(self, extra_delay=0):
        self.extra_delay = Fraction(extra_delay)

    def arrival_time(self, send_time: Fraction, from_pos: Fraction,
                     to_pos: Fraction) -> Fraction:
        return send_time + abs(to_pos - from_pos) + self.extra_delay


@dataclass
class SessionConfig:
    role: Role
    params: SchemeParams
    engine_spec: str
    toss_params: TossSecurityParams = field(default_factory=TossSecurityParams)
    bit: Optional[int] = None
    seed: Optional[int] = None
    spacetime: SpacetimeConfig = field(default_factory=SpacetimeConfig)
    clock: SimChannelClock = field(default_factory=SimChannelClock)

    def __post_init__(self):
        parse_engine_spec(self.engine_spec)  # validate early
        if self.bit is not None and self.bit not in (0, 1):
            raise ValueError("bit must be 0 or 1")


@dataclass(frozen=True)
class TranscriptEntry:
    direction: int  # 0 = sent, 1 = received
    message: WireMessage
    logical_timestamp: int


@dataclass(frozen=True)
class Transcript:
    role: Role
    params: SchemeParams
    engine: str
    seed: Optional[int]
    final_phase: Phase
    entries: tuple[TranscriptEntry, ...]


@dataclass
class SessionResult:
    phase: Phase
    verdict: Optional[Verdict]
    abort_reason: Optional[AbortReason]
    transcript: Transcript
    pair: Optional[InstancePair] = None
    commitment: Optional[Commitment] = None
    opening: Optional[Opening] = None


def _resolve_base_seed(config: SessionConfig) -> tuple[Optional[int], bool]:
    """(base seed, test_mode).  Engine seeds and explicit config seeds are
    test mode; CT2BC_TEST_SEED covers the nondeterministic engines."""
    _, engine_seed = parse_engine_spec(config.engine_spec)
    if engine_seed is not None:
        return engine_seed, True
    if config.seed is not None:
        return derive_seed(config.seed, f"role:{config.role.value}"), True
    env = os.environ.get(TEST_SEED_ENV)
    if env is not None:
        return derive_seed(int(env), f"role:{config.role.value}"), True
    return None, False


class Session:
    """One party's side of a commit/unveil exchange.

    Feed incoming messages through advance() (or advance_bytes() at the
    frame level); collect the returned outgoing messages and deliver them in
    order.  The session records every message it sends or receives in its
    transcript.
    """

    def __init__(self, config: SessionConfig):
        self.config = config
        self.role = config.role
        self.params = config.params
        self.phase = Phase.INIT
        self.engine_kind, _ = parse_engine_spec(config.engine_spec)

        base, self.test_mode = _resolve_base_seed(config)
        if base is None:
            sysrng = random.SystemRandom()
            base = sysrng.getrandbits(64)
        self._base_seed = base
        self._rng_toss = random.Random(derive_seed(base, "toss"))
        self._rng_commit = random.Random(derive_seed(base, "commit"))
        self._rng_salt = random.Random(derive_seed(base, "salt"))

        self._bit = config.bit
        if self.role is Role.COMMITTER_A and self._bit is None:
            self._bit = self._rng_commit.getrandbits(1)

        self._deriver = InstanceDeriver(config.params)
        self._hash_commit = SaltedHashCommitment()
        self._entries: list[TranscriptEntry] = []
        self._ts = 0
        self._round = 0
        self._await_count: Optional[int] = None
        self._my_round_bits: Optional[tuple[int, ...]] = None
        self._round_salt: Optional[bytes] = None
        self._peer_digest: Optional[bytes] = None
        self._peer_digest_count: Optional[int] = None
        self._peer_share_bits: Optional[tuple[int, ...]] = None

        self.pair: Optional[InstancePair] = None
        self.commitment: Optional[Commitment] = None
        self.opening: Optional[Opening] = None
        self.verdict: Optional[Verdict] = None
        self.abort_reason: Optional[AbortReason] = None

    # -- bookkeeping --------------------------------------------------------

    @property
    def terminal(self) -> bool:
        return self.phase in TERMINAL_PHASES

    def _record(self, direction: int, msg: WireMessage) -> None:
        self._entries.append(TranscriptEntry(direction, msg, self._ts))
        self._ts += 1

    def _emit(self, msgs: list[WireMessage]) -> list[WireMessage]:
        for msg in msgs:
            self._record(0, msg)
        return msgs

    def _abort(self, reason: AbortReason) -> list[WireMessage]:
        self.phase = Phase.ABORTED
        self.abort_reason = reason
        return self._emit([AbortMsg(reason=reason)])

    def channel_closed(self) -> None:
        if not self.terminal:
            self.phase = Phase.ABORTED
            self.abort_reason = AbortReason.COUNTERPARTY_SILENT

    # -- driving ------------------------------------------------------------

    def start(self) -> list[WireMessage]:
        """The committer opens with its parameter proposal."""
        if self.role is Role.COMMITTER_A and self.phase is Phase.INIT:
            return self._emit([self._params_msg()])
        return []

    def advance(self, incoming: WireMessage) -> list[WireMessage]:
        if self.terminal:
            return []
        self._record(1, incoming)
        if isinstance(incoming, AbortMsg):
            self.phase = Phase.ABORTED
            self.abort_reason = incoming.reason
            return []
        try:
            if self.role is Role.COMMITTER_A:
                return self._advance_committer(incoming)
            return self._advance_verifier(incoming)
        except StreamExhaustedError:
            return self._abort(AbortReason.PARAMETER_MISMATCH)
        except ProtocolError:
            return self._abort(AbortReason.MALFORMED_MESSAGE)

    def advance_bytes(self, raw: bytes) -> list[bytes]:
        try:
            msg = decode_frame(raw)
        except FrameError:
            return self.abort_malformed()
        return [encode_frame(m) for m in self.advance(msg)]

    def abort_malformed(self) -> list[bytes]:
        """Abort because the incoming byte stream could not be framed."""
        if self.terminal:
            return []
        return [encode_frame(m) for m in self._abort(AbortReason.MALFORMED_MESSAGE)]

    # -- committer ----------------------------------------------------------

    def _advance_committer(self, msg: WireMessage) -> list[WireMessage]:
        if self.phase is Phase.INIT and isinstance(msg, ParamsMsg):
            if msg != self._params_msg():
                return self._abort(AbortReason.PARAMETER_MISMATCH)
            self.phase = Phase.TOSSING
            return self._emit(self._open_toss_round())
        if self.phase is Phase.TOSSING and isinstance(msg, TossShareMsg) and msg.side == 1:
            return self._committer_on_peer_share(msg)
        if self.phase is Phase.UNVEILED and isinstance(msg, VerdictMsg):
            if msg.accepted:
                self.verdict = Verdict.accept(msg.value)
                self.phase = Phase.ACCEPTED
            else:
                self.verdict = Verdict.reject(reject_reason_from_code(msg.value))
                self.phase = Phase.REJECTED
            return []
        return self._abort(AbortReason.OUT_OF_PHASE)

    def _committer_on_peer_share(self, msg: TossShareMsg) -> list[WireMessage]:
        assert self._my_round_bits is not None and self._await_count is not None
        if len(msg.bits) != self._await_count:
            return self._abort(AbortReason.PARAMETER_MISMATCH)
        timing = self._check_share_timing(msg)
        if timing is not None:
            return self._abort(timing)
        out: list[WireMessage] = []
        if self.engine_kind == "hash-bootstrap":
            assert self._round_salt is not None
            out.append(TossOpenMsg(bits=self._my_round_bits, salt=self._round_salt))
        shared = tuple(a ^ b for a, b in zip(self._my_round_bits, msg.bits))
        self._deriver.feed(shared)
        self._round += 1
        if self._deriver.needed():
            out.extend(self._open_toss_round())
        else:
            out.extend(self._commit_and_unveil())
        return self._emit(out)

    def _open_toss_round(self) -> list[WireMessage]:
        count = self._deriver.needed()
        self._await_count = count
        bits = tuple(self._rng_toss.getrandbits(1) for _ in range(count))
        self._my_round_bits = bits
        if self.engine_kind == "hash-bootstrap":
            self._round_salt = random_salt(self._rng_salt)
            digest = self._hash_commit.commit_batch(bits, self._round_salt)
            return [TossCommitMsg(count=count, digest=digest)]
        send_time, send_pos = self._my_send_event()
        return [TossShareMsg(side=0, send_time=send_time, send_position=send_pos,
                             bits=bits)]

    def _commit_and_unveil(self) -> list[WireMessage]:
        self.phase = Phase.INSTANCES_READY
        self.pair = self._deriver.result(self.config.engine_spec)
        assert self._bit is not None
        self.commitment, self.opening = commit_bit(
            self.params, self.pair, self._bit, self._rng_commit)
        self.phase = Phase.COMMITTED
        echo = encode_commitment_body(self.commitment)
        self.phase = Phase.UNVEILED
        return [CommitmentMsg(commitment=self.commitment),
                UnveilMsg(opening=self.opening, scheme=self.params.scheme, echo=echo)]

    # -- verifier -----------------------------------------------------------

    def _advance_verifier(self, msg: WireMessage) -> list[WireMessage]:
        if self.phase is Phase.INIT and isinstance(msg, ParamsMsg):
            if msg != self._params_msg():
                return self._abort(AbortReason.PARAMETER_MISMATCH)
            self.phase = Phase.PARAMS_AGREED
            return self._emit([self._params_msg()])
        if (self.phase in (Phase.PARAMS_AGREED, Phase.TOSSING)
                and isinstance(msg, TossShareMsg) and msg.side == 0
                and self.engine_kind != "hash-bootstrap"):
            return self._verifier_on_plain_share(msg)
        if (self.phase in (Phase.PARAMS_AGREED, Phase.TOSSING)
                and isinstance(msg, TossCommitMsg)
                and self.engine_kind == "hash-bootstrap"):
            return self._verifier_on_toss_commit(msg)
        if (self.phase is Phase.TOSSING and isinstance(msg, TossOpenMsg)
                and self.engine_kind == "hash-bootstrap"):
            return self._verifier_on_toss_open(msg)
        if self.phase is Phase.INSTANCES_READY and isinstance(msg, CommitmentMsg):
            return self._verifier_on_commitment(msg)
        if self.phase is Phase.COMMITTED and isinstance(msg, UnveilMsg):
            return self._verifier_on_unveil(msg)
        return self._abort(AbortReason.OUT_OF_PHASE)

    def _verifier_on_plain_share(self, msg: TossShareMsg) -> list[WireMessage]:
        if len(msg.bits) != self._deriver.needed():
            return self._abort(AbortReason.PARAMETER_MISMATCH)
        timing = self._check_share_timing(msg)
        if timing is not None:
            return self._abort(timing)
        self.phase = Phase.TOSSING
        mine = tuple(self._rng_toss.getrandbits(1) for _ in range(len(msg.bits)))
        send_time, send_pos = self._my_send_event()
        reply = TossShareMsg(side=1, send_time=send_time, send_position=send_pos,
                             bits=mine)
        shared = tuple(a ^ b for a, b in zip(msg.bits, mine))
        self._deriver.feed(shared)
        self._round += 1
        self._maybe_instances_ready()
        return self._emit([reply])

    def _verifier_on_toss_commit(self, msg: TossCommitMsg) -> list[WireMessage]:
        if msg.count != self._deriver.needed():
            return self._abort(AbortReason.PARAMETER_MISMATCH)
        self.phase = Phase.TOSSING
        self._peer_digest = msg.digest
        self._peer_digest_count = msg.count
        mine = tuple(self._rng_toss.getrandbits(1) for _ in range(msg.count))
        self._my_round_bits = mine
        send_time, send_pos = self._my_send_event()
        return self._emit([TossShareMsg(side=1, send_time=send_time,
                                        send_position=send_pos, bits=mine)])

    def _verifier_on_toss_open(self, msg: TossOpenMsg) -> list[WireMessage]:
        if self._peer_digest is None or self._my_round_bits is None:
            return self._abort(AbortReason.OUT_OF_PHASE)
        if len(msg.bits) != self._peer_digest_count:
            return self._abort(AbortReason.PARAMETER_MISMATCH)
        if not self._hash_commit.check_batch(self._peer_digest, msg.bits, msg.salt):
            return self._abort(AbortReason.COMMITMENT_OPEN_FAILURE)
        shared = tuple(a ^ b for a, b in zip(msg.bits, self._my_round_bits))
        self._peer_digest = None
        self._peer_digest_count = None
        self._my_round_bits = None
        self._deriver.feed(shared)
        self._round += 1
        self._maybe_instances_ready()
        return []

    def _maybe_instances_ready(self) -> None:
        if not self._deriver.needed():
            self.pair = self._deriver.result(self.config.engine_spec)
            self.phase = Phase.INSTANCES_READY

    def _verifier_on_commitment(self, msg: CommitmentMsg) -> list[WireMessage]:
        com = msg.commitment
        if com.scheme is not self.params.scheme:
            return self._abort(AbortReason.MALFORMED_MESSAGE)
        if isinstance(com.payload, SubgraphPayload):
            if com.payload.vertex_count != self.params.n:
                return self._abort(AbortReason.MALFORMED_MESSAGE)
        elif isinstance(com.payload, SumPayload):
            if com.payload.value >= self.params.m << self.params.m:
                return self._abort(AbortReason.MALFORMED_MESSAGE)
        self.commitment = com
        self.phase = Phase.COMMITTED
        return []

    def _verifier_on_unveil(self, msg: UnveilMsg) -> list[WireMessage]:
        assert self.commitment is not None and self.pair is not None
        if msg.scheme is not self.params.scheme:
            return self._abort(AbortReason.MALFORMED_MESSAGE)
        if msg.echo != encode_commitment_body(self.commitment):
            return self._abort(AbortReason.MALFORMED_MESSAGE)
        self.opening = msg.opening
        self.phase = Phase.UNVEILED
        self.verdict = verify_opening(self.params, self.pair, self.commitment,
                                      msg.opening)
        if self.verdict.accepted:
            assert self.verdict.bit is not None
            reply = VerdictMsg(accepted=True, value=self.verdict.bit)
            self.phase = Phase.ACCEPTED
        else:
            from .wire import reject_code

            assert self.verdict.reason is not None
            reply = VerdictMsg(accepted=False, value=reject_code(self.verdict.reason))
            self.phase = Phase.REJECTED
        return self._emit([reply])

    # -- shared helpers -----------------------------------------------------

    def _params_msg(self) -> ParamsMsg:
        return ParamsMsg(scheme=self.params.scheme, m=self.params.m,
                         n=self.params.n, engine=self.engine_kind)

    def _round_time(self, round_index: int) -> Fraction:
        cfg = self.config.spacetime
        period = cfg.separation + 4 * cfg.site_radius_delta
        return cfg.agreed_time_t + round_index * period

    def _my_send_event(self) -> tuple[Fraction, Fraction]:
        if self.engine_kind != "relativistic-sim":
            return Fraction(0), Fraction(0)
        a1, _, b2, _ = self.config.spacetime.site_positions()
        pos = a1 if self.role is Role.COMMITTER_A else b2
        return self._round_time(self._round), pos

    def _check_share_timing(self, msg: TossShareMsg) -> Optional[AbortReason]:
        """Lightcone validation of the counterparty's batch, using the local
        simulation clock for the arrival stamp.  Non-relativistic engines
        carry zeroed timing fields and skip this."""
        if self.engine_kind != "relativistic-sim":
            return None
        cfg = self.config.spacetime
        a1, b1, b2, a2 = cfg.site_positions()
        if self.role is Role.VERIFIER_B:
            peer_point, my_site = cfg.point_p1, b1
        else:
            peer_point, my_site = cfg.point_p2, a2
        if abs(msg.send_position - peer_point) > cfg.site_radius_delta:
            return AbortReason.MALFORMED_MESSAGE
        expected = self._round_time(self._round)
        if msg.send_time != expected:
            return AbortReason.LATE_ARRIVAL
        arrival = self.config.clock.arrival_time(msg.send_time, msg.send_position,
                                                 my_site)
        if arrival > expected + 2 * cfg.site_radius_delta:
            return AbortReason.LATE_ARRIVAL
        return None

    def result(self) -> SessionResult:
        return SessionResult(
            phase=self.phase,
            verdict=self.verdict,
            abort_reason=self.abort_reason,
            transcript=Transcript(
                role=self.role,
                params=self.params,
                engine=self.config.engine_spec,
                seed=self._base_seed if self.test_mode else None,
                final_phase=self.phase,
                entries=tuple(self._entries),
            ),
            pair=self.pair,
            commitment=self.commitment,
            opening=self.opening,
        )


# --- in-process runner -------------------------------------------------------


def run_local_pair(config_a: SessionConfig, config_b: SessionConfig
                   ) -> tuple[SessionResult, SessionResult]:
    """Drive both sides in-process, preserving per-direction message order."""
    from collections import deque

    sa, sb = Session(config_a), Session(config_b)
    to_b = deque(sa.start())
    to_a = deque(sb.start())
    while True:
        progressed = False
        if to_b:
            msg = to_b.popleft()
            if not sb.terminal:
                to_a.extend(sb.advance(msg))
            progressed = True
        if to_a:
            msg = to_a.popleft()
            if not sa.terminal:
                to_b.extend(sa.advance(msg))
            progressed = True
        if not progressed:
            break
    # a dead counterparty with no ABORT frame looks like silence
    for s in (sa, sb):
        if not s.terminal:
            s.channel_closed()
    return sa.result(), sb.result()


# --- byte channels and the blocking runner -----------------------------------


class SocketChannel:
    """Reliable ordered byte channel over a connected socket."""

    def __init__(self, sock, timeout: float = 10.0):
        self._sock = sock
        sock.settimeout(timeout)

    def send_bytes(self, data: bytes) -> None:
        self._sock.sendall(data)

    def recv_exact(self, n: int) -> Optional[bytes]:
        chunks = []
        remaining = n
        while remaining:
            try:
                chunk = self._sock.recv(remaining)
            except (TimeoutError, OSError):
                return None
            if not chunk:
                return None
            chunks.append(chunk)
            remaining -= len(chunk)
        return b"".join(chunks)

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


class PipeChannel:
    """Byte channel over a (read, write) pair of binary file objects."""

    def __init__(self, reader, writer, owns_files: bool = True):
        self._reader = reader
        self._writer = writer
        self._owns_files = owns_files

    def send_bytes(self, data: bytes) -> None:
        self._writer.write(data)
        self._writer.flush()

    def recv_exact(self, n: int) -> Optional[bytes]:
        try:
            data = self._reader.read(n)
        except (OSError, ValueError):
            return None
        if data is None or len(data) != n:
            return None
        return data

    def close(self) -> None:
        if not self._owns_files:
            return
        for f in (self._reader, self._writer):
            try:
                f.close()
            except OSError:
                pass


def recv_frame(channel) -> Optional[bytes]:
    """Read one complete frame; None on closed/silent channel."""
    header = channel.recv_exact(5)
    if header is None:
        return None
    _, length = struct.unpack(">BI", header)
    from .wire import MAX_BODY_BYTES

    if length > MAX_BODY_BYTES:
        raise FrameError("incoming frame exceeds the body cap")
    if length == 0:
        return header
    body = channel.recv_exact(length)
    if body is None:
        return None
    return header + body


def run_session(config: SessionConfig, channel) -> SessionResult:
    """Run one side to termination over a byte channel."""
    session = Session(config)
    try:
        for msg in session.start():
            channel.send_bytes(encode_frame(msg))
        while not session.terminal:
            try:
                raw = recv_frame(channel)
            except FrameError:
                for out in session.abort_malformed():
                    channel.send_bytes(out)
                break
            if raw is None:
                session.channel_closed()
                break
            for out in session.advance_bytes(raw):
                channel.send_bytes(out)
    except (BrokenPipeError, ConnectionError, OSError):
        session.channel_closed()
    return session.result()


# --- transcript serialization and replay --------------------------------------

_SCHEME_BY_CODE = {0x01: SchemeId.SUBGRAPH, 0x02: SchemeId.SUBSET_SUM}
_CODE_BY_SCHEME = {v: k for k, v in _SCHEME_BY_CODE.items()}
_ROLE_CODES = {Role.COMMITTER_A: 0, Role.VERIFIER_B: 1}
_ROLES_BY_CODE = {v: k for k, v in _ROLE_CODES.items()}


def serialize_transcript(t: Transcript) -> bytes:
    engine = t.engine.encode("utf-8")
    out = bytearray()
    out += TRANSCRIPT_MAGIC
    out.append(TRANSCRIPT_VERSION)
    out.append(_ROLE_CODES[t.role])
    out.append(_CODE_BY_SCHEME[t.params.scheme])
    out += struct.pack(">HH", t.params.m, t.params.n)
    out += struct.pack(">H", len(engine)) + engine
    out.append(t.final_phase.value)
    if t.seed is not None:
        out.append(1)
        out += struct.pack(">Q", t.seed)
    else:
        out.append(0)
    out += struct.pack(">I", len(t.entries))
    for entry in t.entries:
        frame = encode_frame(entry.message)
        out.append(entry.direction)
        out += struct.pack(">Q", entry.logical_timestamp)
        out += struct.pack(">I", len(frame)) + frame
    return bytes(out)


def parse_transcript(data: bytes) -> Transcript:
    r_pos = [0]

    def take(n: int) -> bytes:
        if r_pos[0] + n > len(data):
            raise FrameError("transcript truncated")
        out = data[r_pos[0]:r_pos[0] + n]
        r_pos[0] += n
        return out

    if take(len(TRANSCRIPT_MAGIC)) != TRANSCRIPT_MAGIC:
        raise FrameError("bad transcript magic")
    if take(1)[0] != TRANSCRIPT_VERSION:
        raise FrameError("unsupported transcript version")
    try:
        role = _ROLES_BY_CODE[take(1)[0]]
        scheme = _SCHEME_BY_CODE[take(1)[0]]
        m, n = struct.unpack(">HH", take(4))
        engine_len = struct.unpack(">H", take(2))[0]
        engine = take(engine_len).decode("utf-8")
        final_phase = Phase(take(1)[0])
    except (KeyError, ValueError, UnicodeDecodeError) as exc:
        raise FrameError(f"bad transcript header: {exc}") from exc
    seed = struct.unpack(">Q", take(8))[0] if take(1)[0] else None
    count = struct.unpack(">I", take(4))[0]
    entries = []
    for _ in range(count):
        direction = take(1)[0]
        ts = struct.unpack(">Q", take(8))[0]
        frame_len = struct.unpack(">I", take(4))[0]
        msg = decode_frame(take(frame_len))
        entries.append(TranscriptEntry(direction, msg, ts))
    if r_pos[0] != len(data):
        raise FrameError("trailing bytes after transcript")
    return Transcript(role=role, params=SchemeParams(scheme=scheme, m=m, n=n),
                      engine=engine, seed=seed, final_phase=final_phase,
                      entries=tuple(entries))


@dataclass(frozen=True)
class ReplayOutcome:
    final_phase: Phase
    verdict: Optional[Verdict]


def replay_transcript(t: Transcript) -> ReplayOutcome:
    """Re-derive the session outcome from the recorded messages alone.

    The monitor replays structure, digest checks, instance derivation, and
    the final verification; it cannot re-measure relativistic arrival times
    (those are receiver-local), so timing aborts are replayed through their
    recorded ABORT frames.
    """
    try:
        return _replay_entries(t)
    except ProtocolError:
        return ReplayOutcome(Phase.ABORTED, None)


def _replay_entries(t: Transcript) -> ReplayOutcome:
    params = t.params
    engine_kind, _ = parse_engine_spec(t.engine)
    deriver = InstanceDeriver(params)
    hash_commit = SaltedHashCommitment()
    phase = Phase.INIT
    pair: Optional[InstancePair] = None
    commitment: Optional[Commitment] = None
    verdict: Optional[Verdict] = None
    staged_share: Optional[tuple[int, ...]] = None
    staged_digest: Optional[bytes] = None
    params_seen = 0

    def fail() -> ReplayOutcome:
        return ReplayOutcome(Phase.ABORTED, None)

    for entry in t.entries:
        msg = entry.message
        if isinstance(msg, AbortMsg):
            return ReplayOutcome(Phase.ABORTED, None)
        if isinstance(msg, ParamsMsg):
            if msg.scheme is not params.scheme or (msg.m, msg.n) != (params.m, params.n):
                return fail()
            params_seen += 1
            if params_seen == 2:
                phase = Phase.TOSSING
            continue
        if isinstance(msg, TossShareMsg):
            if msg.side == 0:
                staged_share = msg.bits
            elif engine_kind == "hash-bootstrap":
                staged_share = msg.bits  # B's bits; XOR happens at TOSS_OPEN
            else:
                if staged_share is None or len(staged_share) != len(msg.bits):
                    return fail()
                deriver.feed(tuple(a ^ b for a, b in zip(staged_share, msg.bits)))
                staged_share = None
            continue
        if isinstance(msg, TossCommitMsg):
            staged_digest = msg.digest
            continue
        if isinstance(msg, TossOpenMsg):
            if staged_digest is None or staged_share is None:
                return fail()
            if not hash_commit.check_batch(staged_digest, msg.bits, msg.salt):
                return fail()
            deriver.feed(tuple(a ^ b for a, b in zip(msg.bits, staged_share)))
            staged_digest = None
            staged_share = None
            continue
        if isinstance(msg, CommitmentMsg):
            if deriver.needed():
                return fail()
            pair = deriver.result(t.engine)
            commitment = msg.commitment
            phase = Phase.COMMITTED
            continue
        if isinstance(msg, UnveilMsg):
            if commitment is None or pair is None:
                return fail()
            if msg.echo != encode_commitment_body(commitment):
                return fail()
            verdict = verify_opening(params, pair, commitment, msg.opening)
            phase = Phase.UNVEILED
            continue
        if isinstance(msg, VerdictMsg):
            phase = Phase.ACCEPTED if msg.accepted else Phase.REJECTED
            continue
    if phase not in TERMINAL_PHASES:
        return ReplayOutcome(Phase.ABORTED, verdict)
    return ReplayOutcome(phase, verdict)
