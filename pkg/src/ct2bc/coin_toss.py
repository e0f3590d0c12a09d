"""Joint coin tossing in three interchangeable engines.

Engines produce `TossOutcome`s one at a time; `toss_stream` turns an engine
into an n-bit `BitStream` under an abort policy.  The simulated-relativistic
engine models two sites per party on a 1-D line with signal speed 1 and
enforces the lightcone acceptance rule; the hash-bootstrap engine builds each
toss from a salted-digest commitment round trip; the seeded engine is the
deterministic test mode.
"""

from __future__ import annotations

import enum
import hashlib
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .bitpack import pack_bits
from .errors import AbortReason, TossAbortError

Rational = Fraction | int

# bits a strategy has received from the counterparty in prior completed tosses;
# by construction a strategy never sees the honest party's unsent bit
BitStrategy = Callable[[tuple[int, ...]], int]


class AbortPolicy(enum.Enum):
    FAILS_SESSION = "abort-fails-session"
    RETRY = "abort-retry-with-count-limit"


@dataclass(frozen=True)
class TossSecurityParams:
    """Bias bound and abort handling for a run of coin tosses."""

    epsilon_target: float = 0.01
    abort_policy: AbortPolicy = AbortPolicy.FAILS_SESSION
    retry_limit: int = 0

    def __post_init__(self):
        if not 0 < self.epsilon_target < 0.5:
            raise ValueError("epsilon_target must lie in (0, 0.5)")
        if self.retry_limit < 0:
            raise ValueError("retry_limit must be nonnegative")


@dataclass(frozen=True)
class SpacetimeConfig:
    """1-D geometry for the simulated-relativistic toss (signal speed = 1).

    Two agreed points separated by much more than the site radius delta;
    each party controls one site near each point.  Timestamps and
    coordinates are exact rationals so the t + 2*delta acceptance boundary
    is bit-exact.
    """

    point_p1: Rational = 0
    point_p2: Rational = 100
    site_radius_delta: Rational = 1
    agreed_time_t: Rational = 0

    def __post_init__(self):
        object.__setattr__(self, "point_p1", Fraction(self.point_p1))
        object.__setattr__(self, "point_p2", Fraction(self.point_p2))
        object.__setattr__(self, "site_radius_delta", Fraction(self.site_radius_delta))
        object.__setattr__(self, "agreed_time_t", Fraction(self.agreed_time_t))
        if self.site_radius_delta <= 0:
            raise ValueError("site_radius_delta must be positive")
        if self.separation <= 0:
            raise ValueError("agreed points must be distinct")
        if self.separation < 10 * self.site_radius_delta:
            raise ValueError("separation must be at least 10x the site radius")

    @property
    def separation(self) -> Fraction:
        return abs(self.point_p2 - self.point_p1)

    def site_positions(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        """(a1, b1, b2, a2): sending/receiving sites near each agreed point."""
        d = self.site_radius_delta
        return (self.point_p1, self.point_p1 + d, self.point_p2, self.point_p2 + d)


@dataclass(frozen=True)
class TossEvent:
    """One party's signal: a bit sent from one site and received at another."""

    sender_bit: int
    send_time: Fraction
    send_position: Fraction
    receive_time: Fraction
    receive_position: Fraction

    def is_causal(self) -> bool:
        return self.receive_time >= self.send_time + abs(
            self.receive_position - self.send_position
        )


@dataclass(frozen=True)
class TossOutcome:
    bit: int = 0
    valid: bool = False
    abort_reason: Optional[AbortReason] = None

    def __post_init__(self):
        if self.valid and self.abort_reason is not None:
            raise ValueError("valid outcome cannot carry an abort reason")


@dataclass(frozen=True)
class BitStream:
    """Ordered result of toss_count valid joint tosses."""

    bits: tuple[int, ...]
    source_engine: str
    toss_count: int

    def __post_init__(self):
        if len(self.bits) != self.toss_count:
            raise ValueError("toss_count disagrees with the number of bits")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("stream bits must be 0 or 1")

    def __len__(self) -> int:
        return self.toss_count


def xor_combine(a: int, b: int) -> int:
    """The joint outcome of one toss: XOR of the two contributed bits."""
    if a not in (0, 1) or b not in (0, 1):
        raise ValueError("inputs must be single bits")
    return a ^ b


def _event_ok(cfg: SpacetimeConfig, event: TossEvent, near_point: Fraction) -> bool:
    """Structural checks: causality plus the sender staying within delta of
    its agreed point."""
    if event.sender_bit not in (0, 1):
        return False
    if not event.is_causal():
        return False
    return abs(event.send_position - near_point) <= cfg.site_radius_delta


def arrival_in_window(cfg: SpacetimeConfig, send_time: Fraction, receive_time: Fraction,
                      agreed_time: Fraction | None = None) -> bool:
    """Lightcone acceptance rule: sent exactly at the agreed time and received
    by agreed_time + 2*delta (boundary inclusive)."""
    t = cfg.agreed_time_t if agreed_time is None else agreed_time
    if send_time != t:
        return False
    return receive_time <= t + 2 * cfg.site_radius_delta


def validate_relativistic_toss(cfg: SpacetimeConfig, event_a: TossEvent,
                               event_b: TossEvent) -> TossOutcome:
    """Judge one simultaneous bit exchange.

    event_a is A's signal near the first agreed point, event_b is B's signal
    near the second.  Malformed events (acausal, or sent from outside the
    site radius) abort with malformed-message; timing violations abort with
    late-arrival; otherwise the outcome bit is the XOR of the sender bits.
    """
    if not _event_ok(cfg, event_a, cfg.point_p1) or not _event_ok(cfg, event_b, cfg.point_p2):
        return TossOutcome(abort_reason=AbortReason.MALFORMED_MESSAGE)
    for event in (event_a, event_b):
        if not arrival_in_window(cfg, event.send_time, event.receive_time):
            return TossOutcome(abort_reason=AbortReason.LATE_ARRIVAL)
    return TossOutcome(bit=xor_combine(event_a.sender_bit, event_b.sender_bit), valid=True)


# --- temporarily-secure commitment used to bootstrap a toss ---------------

SALT_BYTES = 32
_BIT_COMMIT_TAG = b"ct2bc/bit-commit/v1"
_BATCH_COMMIT_TAG = b"ct2bc/batch-commit/v1"


class SaltedHashCommitment:
    """Salted SHA-256 digest commitment over one bit or a bit vector."""

    def commit(self, bit: int, salt: bytes) -> bytes:
        self._check_salt(salt)
        if bit not in (0, 1):
            raise ValueError("can only commit a single bit")
        return hashlib.sha256(_BIT_COMMIT_TAG + bytes([bit]) + salt).digest()

    def check(self, digest: bytes, bit: int, salt: bytes) -> bool:
        if bit not in (0, 1) or len(salt) != SALT_BYTES:
            return False
        return self.commit(bit, salt) == digest

    def commit_batch(self, bits: Sequence[int], salt: bytes) -> bytes:
        self._check_salt(salt)
        body = len(bits).to_bytes(4, "big") + pack_bits(bits) + salt
        return hashlib.sha256(_BATCH_COMMIT_TAG + body).digest()

    def check_batch(self, digest: bytes, bits: Sequence[int], salt: bytes) -> bool:
        if len(salt) != SALT_BYTES or any(b not in (0, 1) for b in bits):
            return False
        return self.commit_batch(bits, salt) == digest

    @staticmethod
    def _check_salt(salt: bytes):
        if len(salt) != SALT_BYTES:
            raise ValueError(f"salt must be {SALT_BYTES} bytes")


def random_salt(rng: random.Random) -> bytes:
    return rng.getrandbits(8 * SALT_BYTES).to_bytes(SALT_BYTES, "big")


def bootstrapped_toss(commitment: SaltedHashCommitment, rng_a: random.Random,
                      rng_b: random.Random, *,
                      open_tamper: Callable[[int, bytes], tuple[int, bytes]] | None = None,
                      responder_silent: bool = False,
                      responder_bit: Callable[[], int] | None = None) -> TossOutcome:
    """Three-message toss: A commits a, B returns b, A unveils a.

    The keyword hooks model dishonest behaviour: `open_tamper` rewrites A's
    opening (digest recomputation then fails), `responder_silent` drops B's
    message entirely.
    """
    a = rng_a.getrandbits(1)
    salt = random_salt(rng_a)
    digest = commitment.commit(a, salt)

    if responder_silent:
        return TossOutcome(abort_reason=AbortReason.COUNTERPARTY_SILENT)
    b = responder_bit() if responder_bit is not None else rng_b.getrandbits(1)
    if b not in (0, 1):
        return TossOutcome(abort_reason=AbortReason.MALFORMED_MESSAGE)

    opened_bit, opened_salt = (a, salt) if open_tamper is None else open_tamper(a, salt)
    if not commitment.check(digest, opened_bit, opened_salt):
        return TossOutcome(abort_reason=AbortReason.COMMITMENT_OPEN_FAILURE)
    return TossOutcome(bit=xor_combine(opened_bit, b), valid=True)


# --- engines ---------------------------------------------------------------


def honest_strategy(rng: random.Random) -> BitStrategy:
    return lambda history: rng.getrandbits(1)


def fixed_bit_strategy(bit: int) -> BitStrategy:
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    return lambda history: bit


class SeededEngine:
    """Deterministic joint tosses from a shared seed (test mode)."""

    def __init__(self, seed: int):
        self.seed = seed
        self.engine_id = f"seeded:{seed}"
        self._rng = random.Random(seed)

    def toss(self) -> TossOutcome:
        return TossOutcome(bit=self._rng.getrandbits(1), valid=True)


@dataclass
class RelativisticSimEngine:
    """Simulated simultaneous exchange between two spacelike-separated pairs
    of sites.

    Strategies pick each party's bit from the history of counterparty bits
    received so far; `transit_slack_*` delays arrivals beyond light speed and
    `send_lag_*` shifts the send instant off the agreed time, both of which
    trip the validity rule.
    """

    config: SpacetimeConfig = field(default_factory=SpacetimeConfig)
    strategy_a: BitStrategy | None = None
    strategy_b: BitStrategy | None = None
    transit_slack_a: Rational = 0
    transit_slack_b: Rational = 0
    send_lag_a: Rational = 0
    send_lag_b: Rational = 0
    engine_id: str = "relativistic-sim"

    def __post_init__(self):
        if self.strategy_a is None:
            self.strategy_a = honest_strategy(random.SystemRandom())
        if self.strategy_b is None:
            self.strategy_b = honest_strategy(random.SystemRandom())
        self._seen_by_a: list[int] = []
        self._seen_by_b: list[int] = []

    def toss(self) -> TossOutcome:
        cfg = self.config
        a1, b1, b2, a2 = cfg.site_positions()
        a_bit = self.strategy_a(tuple(self._seen_by_a))
        b_bit = self.strategy_b(tuple(self._seen_by_b))
        t = cfg.agreed_time_t
        send_a = t + Fraction(self.send_lag_a)
        send_b = t + Fraction(self.send_lag_b)
        event_a = TossEvent(
            sender_bit=a_bit,
            send_time=send_a,
            send_position=a1,
            receive_time=send_a + abs(b1 - a1) + Fraction(self.transit_slack_a),
            receive_position=b1,
        )
        event_b = TossEvent(
            sender_bit=b_bit,
            send_time=send_b,
            send_position=b2,
            receive_time=send_b + abs(a2 - b2) + Fraction(self.transit_slack_b),
            receive_position=a2,
        )
        outcome = validate_relativistic_toss(cfg, event_a, event_b)
        if outcome.valid:
            self._seen_by_a.append(b_bit)
            self._seen_by_b.append(a_bit)
        return outcome


@dataclass
class HashBootstrapEngine:
    """Per-toss commitment-bootstrapped exchange."""

    rng_a: random.Random
    rng_b: random.Random
    strategy_a: BitStrategy | None = None
    strategy_b: BitStrategy | None = None
    open_tamper: Callable[[int, bytes], tuple[int, bytes]] | None = None
    responder_silent: bool = False
    engine_id: str = "hash-bootstrap"

    def __post_init__(self):
        self._commitment = SaltedHashCommitment()
        self._seen_by_a: list[int] = []
        self._seen_by_b: list[int] = []

    def toss(self) -> TossOutcome:
        strat_a = self.strategy_a or honest_strategy(self.rng_a)
        strat_b = self.strategy_b or honest_strategy(self.rng_b)
        a = strat_a(tuple(self._seen_by_a))
        salt = random_salt(self.rng_a)
        digest = self._commitment.commit(a, salt)
        if self.responder_silent:
            return TossOutcome(abort_reason=AbortReason.COUNTERPARTY_SILENT)
        b = strat_b(tuple(self._seen_by_b))
        opened_bit, opened_salt = (a, salt) if self.open_tamper is None else self.open_tamper(a, salt)
        if not self._commitment.check(digest, opened_bit, opened_salt):
            return TossOutcome(abort_reason=AbortReason.COMMITMENT_OPEN_FAILURE)
        self._seen_by_a.append(b)
        self._seen_by_b.append(a)
        return TossOutcome(bit=xor_combine(opened_bit, b), valid=True)


def toss_stream(engine, n: int, params: TossSecurityParams | None = None) -> BitStream:
    """Collect exactly n valid toss bits from an engine.

    Under FAILS_SESSION the first aborted toss raises TossAbortError; under
    RETRY each aborted toss is retried up to params.retry_limit times before
    the error is raised.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    params = params or TossSecurityParams()
    bits: list[int] = []
    for index in range(n):
        outcome = engine.toss()
        if not outcome.valid and params.abort_policy is AbortPolicy.RETRY:
            for _ in range(params.retry_limit):
                outcome = engine.toss()
                if outcome.valid:
                    break
        if not outcome.valid:
            reason = outcome.abort_reason or AbortReason.MALFORMED_MESSAGE
            raise TossAbortError(reason, index)
        bits.append(outcome.bit)
    return BitStream(bits=tuple(bits), source_engine=engine.engine_id, toss_count=n)
