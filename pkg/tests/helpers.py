"""Shared test utilities: scripted rngs, message generators, session drivers."""

from __future__ import annotations

import random
from fractions import Fraction

from ct2bc.errors import AbortReason
from ct2bc.scheme_core import Commitment, Opening, SchemeId, SchemeParams
from ct2bc.session import Role, Session, SessionConfig
from ct2bc.subgraph import OrderedSubset, SubgraphPayload
from ct2bc.subset_sum import SelectionBits, SumPayload
from ct2bc.wire import (AbortMsg, CommitmentMsg, ParamsMsg, TossCommitMsg,
                        TossOpenMsg, TossShareMsg, UnveilMsg, VerdictMsg)


class ScriptedRng:
    """random.Random stand-in whose 1-bit draws come from a fixed script."""

    def __init__(self, bits, fallback_seed=0):
        self._bits = list(bits)
        self._fallback = random.Random(fallback_seed)

    def getrandbits(self, k):
        if k == 1 and self._bits:
            return self._bits.pop(0)
        return self._fallback.getrandbits(k)


def random_graph_payload(rng: random.Random, n: int) -> SubgraphPayload:
    edges = frozenset((i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)
                      if rng.random() < 0.5)
    return SubgraphPayload(vertex_count=n, edges=edges)


def random_message(rng: random.Random):
    """One structurally valid wire message of a random type."""
    kind = rng.randrange(9)
    if kind == 0:
        return ParamsMsg(scheme=rng.choice(list(SchemeId)), m=rng.randrange(1, 64),
                         n=rng.randrange(1, 64),
                         engine=rng.choice(["seeded", "relativistic-sim",
                                            "hash-bootstrap"]))
    if kind == 1 or kind == 2:
        bits = tuple(rng.getrandbits(1) for _ in range(rng.randrange(0, 80)))
        return TossShareMsg(
            side=kind - 1,
            send_time=Fraction(rng.randrange(-1000, 1000), rng.randrange(1, 50)),
            send_position=Fraction(rng.randrange(-1000, 1000), rng.randrange(1, 50)),
            bits=bits)
    if kind == 3:
        return TossCommitMsg(count=rng.randrange(0, 3000),
                             digest=rng.getrandbits(256).to_bytes(32, "big"))
    if kind == 4:
        bits = tuple(rng.getrandbits(1) for _ in range(rng.randrange(0, 80)))
        return TossOpenMsg(bits=bits, salt=rng.getrandbits(256).to_bytes(32, "big"))
    if kind == 5:
        if rng.getrandbits(1):
            payload = random_graph_payload(rng, rng.randrange(1, 8))
            return CommitmentMsg(Commitment(scheme=SchemeId.SUBGRAPH, payload=payload))
        return CommitmentMsg(Commitment(scheme=SchemeId.SUBSET_SUM,
                                        payload=SumPayload(rng.randrange(0, 1 << 40))))
    if kind == 6:
        if rng.getrandbits(1):
            scheme = SchemeId.SUBGRAPH
            witness = OrderedSubset(tuple(rng.randrange(1, 64)
                                          for _ in range(rng.randrange(1, 8))))
        else:
            scheme = SchemeId.SUBSET_SUM
            witness = SelectionBits(tuple(rng.getrandbits(1)
                                          for _ in range(rng.randrange(1, 32))))
        echo = rng.getrandbits(8 * rng.randrange(0, 40)).to_bytes(
            rng.randrange(0, 40), "big") if rng.getrandbits(1) else b""
        return UnveilMsg(opening=Opening(claimed_bit=rng.getrandbits(1),
                                         witness=witness),
                         scheme=scheme, echo=echo)
    if kind == 7:
        if rng.getrandbits(1):
            return VerdictMsg(accepted=True, value=rng.getrandbits(1))
        return VerdictMsg(accepted=False, value=rng.randrange(1, 4))
    return AbortMsg(reason=rng.choice(list(AbortReason)))


def session_pair_configs(scheme: SchemeId, m: int, n: int, seed_a: int, seed_b: int,
                         bit=None, engine: str = "seeded") -> tuple[SessionConfig, SessionConfig]:
    params = SchemeParams(scheme=scheme, m=m, n=n)
    if engine == "seeded":
        spec_a, spec_b = f"seeded:{seed_a}", f"seeded:{seed_b}"
        seed_kw_a = seed_kw_b = None
    else:
        spec_a = spec_b = engine
        seed_kw_a, seed_kw_b = seed_a, seed_b
    return (
        SessionConfig(role=Role.COMMITTER_A, params=params, engine_spec=spec_a,
                      bit=bit, seed=seed_kw_a),
        SessionConfig(role=Role.VERIFIER_B, params=params, engine_spec=spec_b,
                      seed=seed_kw_b),
    )


def pump_with_interceptor(sa: Session, sb: Session, intercept=None, max_steps=10000):
    """Like run_local_pair but every delivered message can be rewritten.

    intercept(sender_role, msg) -> replacement message (or the original).
    """
    from collections import deque

    def filt(role, msg):
        return intercept(role, msg) if intercept else msg

    to_b = deque(filt(Role.COMMITTER_A, m) for m in sa.start())
    to_a = deque()
    for _ in range(max_steps):
        progressed = False
        if to_b:
            msg = to_b.popleft()
            if not sb.terminal:
                to_a.extend(filt(Role.VERIFIER_B, m) for m in sb.advance(msg))
            progressed = True
        if to_a:
            msg = to_a.popleft()
            if not sa.terminal:
                to_b.extend(filt(Role.COMMITTER_A, m) for m in sa.advance(msg))
            progressed = True
        if not progressed:
            break
    for s in (sa, sb):
        if not s.terminal:
            s.channel_closed()
    return sa.result(), sb.result()
