"""Shared exception types and the abort-reason vocabulary."""

from __future__ import annotations

import enum


class ProtocolError(Exception):
    """Base class for all protocol-level failures."""


class ParameterMismatchError(ProtocolError):
    """Inputs disagree with the agreed security parameters."""


class StreamExhaustedError(ProtocolError):
    """Instance derivation needs more joint coin tosses than were supplied."""


class FrameError(ProtocolError):
    """A wire frame could not be decoded (bad tag, length, or body)."""


class ResourceGuardError(ProtocolError):
    """Requested parameters exceed the brute-force oracle caps."""


class ProtocolViolationError(ProtocolError):
    """A message is impossible under honest execution (e.g. a commitment
    payload associated with neither instance)."""


class TossAbortError(ProtocolError):
    """A coin-toss stream could not deliver a valid bit."""

    def __init__(self, reason: "AbortReason", toss_index: int):
        super().__init__(f"toss {toss_index} aborted: {reason.value}")
        self.reason = reason
        self.toss_index = toss_index


class AbortReason(enum.Enum):
    """Why a toss or a whole session was aborted."""

    LATE_ARRIVAL = "late-arrival"
    MALFORMED_MESSAGE = "malformed-message"
    COMMITMENT_OPEN_FAILURE = "commitment-open-failure"
    COUNTERPARTY_SILENT = "counterparty-silent"
    OUT_OF_PHASE = "out-of-phase"
    PARAMETER_MISMATCH = "parameter-mismatch"
