"""Executable attacks with statistical estimation.

Two measured quantities per scheme, each backed by exhaustive brute-force
oracles at desk scale:

* binding: the fraction of jointly generated instance pairs for which a
  single commitment payload verifies against BOTH instances (equivocation).
  Since commit and unveil are single messages, the cheater's best strategy
  per pair is "use a common payload when one exists", so the estimated
  excess of P0 + P1 over 1 equals that fraction.  Reported as a best-found
  lower bound on cheating power.
* concealment: the advantage over 1/2 of a verifier who brute-forces which
  instance the payload is associated with, guessing the unique associated
  instance when forced and a fair coin when both fit.

All estimators are Monte Carlo over per-trial seeds derived by counter, so
parallel and sequential execution produce identical reports.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from typing import Optional

from .errors import ProtocolViolationError, ResourceGuardError
from .scheme_core import (Commitment, InstancePair, SchemeId, SchemeParams,
                          bits_required, commit_bit, generate_instance_pair)
from .coin_toss import BitStream
from .subgraph import (OrderedSubset, SubgraphPayload, induce_payload,
                       iter_ordered_subsets, sg_is_associated, _induces_exactly)
from .subset_sum import (KnapsackInstance, achievable_sums, has_representation,
                         ks_find_all_representations)

# brute-force caps; hard errors keep runtimes bounded
SUBGRAPH_MAX_M = 8
SUBSET_SUM_MAX_M_PLAIN = 20
SUBSET_SUM_MAX_M = 24

WILSON_Z_95 = 1.959963984540054

# parameter choices weak enough to warrant a machine-readable flag
WEAK_SUBGRAPH_N = 3
WEAK_MIN_M = 4


def wilson_interval(successes: int, trials: int,
                    z: float = WILSON_Z_95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (95% by default)."""
    if trials <= 0:
        return (0.0, 0.0)
    p = successes / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    spread = z * math.sqrt((p * (1 - p) + z * z / (4 * trials)) / trials) / denom
    return (max(0.0, center - spread), min(1.0, center + spread))


def check_resource_guard(params: SchemeParams) -> None:
    if params.scheme is SchemeId.SUBGRAPH and params.m > SUBGRAPH_MAX_M:
        raise ResourceGuardError(
            f"subgraph oracles are capped at m <= {SUBGRAPH_MAX_M} (got m={params.m})")
    if params.scheme is SchemeId.SUBSET_SUM and params.m > SUBSET_SUM_MAX_M:
        raise ResourceGuardError(
            f"subset-sum oracles are capped at m <= {SUBSET_SUM_MAX_M} (got m={params.m})")


def weak_params(params: SchemeParams) -> bool:
    if params.m < WEAK_MIN_M:
        return True
    return params.scheme is SchemeId.SUBGRAPH and params.n < WEAK_SUBGRAPH_N


# --- equivocation search -----------------------------------------------------


@dataclass(frozen=True)
class SubgraphEquivocation:
    payload: SubgraphPayload
    witness0: OrderedSubset
    witness1: OrderedSubset


def find_equivocation_subgraph(pair: InstancePair,
                               n: int) -> Optional[SubgraphEquivocation]:
    """Exhaustively search for one payload verifiable against both graphs.

    Every payload reachable for c0 is bucketed by its exact edge set, then
    c1's reachable payloads are probed against the buckets; the first hit in
    enumeration order is returned, so the result is deterministic.
    """
    c0, c1 = pair.c0, pair.c1
    buckets: dict[frozenset, tuple[int, ...]] = {}
    for indices in iter_ordered_subsets(c0.vertex_count, n):
        key = induce_payload(c0, indices).edges
        buckets.setdefault(key, indices)
    for indices in iter_ordered_subsets(c1.vertex_count, n):
        payload = induce_payload(c1, indices)
        hit = buckets.get(payload.edges)
        if hit is not None:
            return SubgraphEquivocation(payload=payload,
                                        witness0=OrderedSubset(hit),
                                        witness1=OrderedSubset(indices))
    return None


def subgraph_equivocation_exists_doubleloop(pair: InstancePair, n: int) -> bool:
    """Independent second enumerator: direct product scan of both ordered
    subset families with induced-payload equality."""
    c0, c1 = pair.c0, pair.c1
    for i0 in iter_ordered_subsets(c0.vertex_count, n):
        d = induce_payload(c0, i0)
        for i1 in iter_ordered_subsets(c1.vertex_count, n):
            if _induces_exactly(c1, i1, d):
                return True
    return False


@dataclass(frozen=True)
class SubsetSumEquivocation:
    d: int
    x0: tuple[int, ...]
    x1: tuple[int, ...]


def find_equivocation_subset_sum(pair: InstancePair,
                                 method: str = "auto") -> Optional[SubsetSumEquivocation]:
    """Smallest sum representable in both instances, with lexicographically
    smallest witnesses; None when the achievable sum sets are disjoint."""
    import numpy as np

    c0, c1 = pair.c0, pair.c1
    assert isinstance(c0, KnapsackInstance) and isinstance(c1, KnapsackInstance)
    if method == "auto":
        method = "plain" if c0.size <= 16 else "mitm"
    s0 = achievable_sums(c0, method)
    s1 = achievable_sums(c1, method)
    common = np.intersect1d(s0, s1, assume_unique=True)
    if common.size == 0:
        return None
    d = int(common[0])
    rep_method = "plain" if c0.size <= SUBSET_SUM_MAX_M_PLAIN else "mitm"
    x0 = min(ks_find_all_representations(d, c0, rep_method))
    x1 = min(ks_find_all_representations(d, c1, rep_method))
    return SubsetSumEquivocation(d=d, x0=x0, x1=x1)


# --- the verifier's guessing attack ------------------------------------------


@dataclass(frozen=True)
class GuessResult:
    guess: int
    confidence: str  # "forced" | "ambiguous"


def b_guess_bit(pair: InstancePair, commitment: Commitment,
                rng: random.Random) -> GuessResult:
    """Brute-force membership of the payload against both instances; forced
    when exactly one fits, a fair coin when both do."""
    if commitment.scheme is SchemeId.SUBGRAPH:
        payload = commitment.payload
        assert isinstance(payload, SubgraphPayload)
        in0 = sg_is_associated(payload, pair.c0) is not None
        in1 = sg_is_associated(payload, pair.c1) is not None
    else:
        value = commitment.payload.value
        in0 = has_representation(value, pair.c0)
        in1 = has_representation(value, pair.c1)
    if in0 and in1:
        return GuessResult(guess=rng.getrandbits(1), confidence="ambiguous")
    if in0 or in1:
        return GuessResult(guess=1 if in1 else 0, confidence="forced")
    raise ProtocolViolationError("payload is associated with neither instance")


# --- Monte Carlo estimators ---------------------------------------------------


@dataclass(frozen=True)
class BindingReport:
    params: SchemeParams
    trials: int
    seed: int
    equivocable_count: int
    equivocable_fraction: float
    interval_lo: float
    interval_hi: float
    estimated_epsilon: float
    mean_density: Optional[float]

    def to_json_dict(self) -> dict:
        return {
            "report": "binding",
            "scheme": self.params.scheme.value,
            "m": self.params.m,
            "n": self.params.n,
            "trials": self.trials,
            "seed": self.seed,
            "equivocable_fraction": self.equivocable_fraction,
            "interval_lo": self.interval_lo,
            "interval_hi": self.interval_hi,
            "estimated_epsilon": self.estimated_epsilon,
            "mean_density": self.mean_density,
            "weak_params": weak_params(self.params),
        }


@dataclass(frozen=True)
class ConcealmentReport:
    params: SchemeParams
    trials: int
    seed: int
    successes: int
    guess_advantage: float
    interval_lo: float
    interval_hi: float
    forced_fraction: float
    exact_advantage: float

    def to_json_dict(self) -> dict:
        return {
            "report": "concealment",
            "scheme": self.params.scheme.value,
            "m": self.params.m,
            "n": self.params.n,
            "trials": self.trials,
            "seed": self.seed,
            "guess_advantage": self.guess_advantage,
            "interval_lo": self.interval_lo,
            "interval_hi": self.interval_hi,
            "forced_fraction": self.forced_fraction,
            "exact_advantage": self.exact_advantage,
            "weak_params": weak_params(self.params),
        }


def derive_trial_seed(seed: int, index: int) -> int:
    digest = hashlib.sha256(
        b"ct2bc/trial/v1" + seed.to_bytes(8, "big") + index.to_bytes(8, "big")).digest()
    return int.from_bytes(digest[:8], "big")


def trial_pair(params: SchemeParams, trial_seed: int) -> InstancePair:
    """Fresh instance pair from a per-trial seeded joint stream."""
    rng = random.Random(trial_seed)
    count = bits_required(params)
    stream = BitStream(
        bits=tuple(rng.getrandbits(1) for _ in range(count)),
        source_engine=f"seeded:{trial_seed}", toss_count=count)
    return generate_instance_pair(
        params, stream, more_bits=lambda k: [rng.getrandbits(1) for _ in range(k)])


def _binding_trial(scheme_value: str, m: int, n: int, seed: int,
                   index: int) -> tuple[bool, Optional[float]]:
    params = SchemeParams(scheme=SchemeId(scheme_value), m=m, n=n)
    pair = trial_pair(params, derive_trial_seed(seed, index))
    if params.scheme is SchemeId.SUBGRAPH:
        found = find_equivocation_subgraph(pair, params.n) is not None
        return found, None
    found = find_equivocation_subset_sum(pair) is not None
    density = (pair.c0.density() + pair.c1.density()) / 2
    return found, density


def _concealment_trial(scheme_value: str, m: int, n: int, seed: int,
                       index: int) -> tuple[bool, bool]:
    from .session import derive_seed

    params = SchemeParams(scheme=SchemeId(scheme_value), m=m, n=n)
    trial_seed = derive_trial_seed(seed, index)
    pair = trial_pair(params, trial_seed)
    rng = random.Random(derive_seed(trial_seed, "adversary"))
    a = rng.getrandbits(1)
    commitment, _ = commit_bit(params, pair, a, rng)
    result = b_guess_bit(pair, commitment, rng)
    return result.guess == a, result.confidence == "forced"


def _run_trials(fn, args_list, parallel: bool):
    if not parallel:
        return [fn(*args) for args in args_list]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor() as pool:
        return list(pool.map(fn, *zip(*args_list), chunksize=max(1, len(args_list) // 32)))


def estimate_binding(params: SchemeParams, trials: int, seed: int,
                     parallel: bool = False) -> BindingReport:
    """Monte Carlo equivocation rate over fresh seeded instance pairs."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    check_resource_guard(params)
    args = [(params.scheme.value, params.m, params.n, seed, i) for i in range(trials)]
    outcomes = _run_trials(_binding_trial, args, parallel)
    count = sum(1 for found, _ in outcomes if found)
    densities = [d for _, d in outcomes if d is not None]
    lo, hi = wilson_interval(count, trials)
    fraction = count / trials
    return BindingReport(
        params=params, trials=trials, seed=seed,
        equivocable_count=count, equivocable_fraction=fraction,
        interval_lo=lo, interval_hi=hi,
        # best per-pair strategy scores P0+P1 = 1 + 1{equivocation exists}
        estimated_epsilon=max(0.0, fraction),
        mean_density=(sum(densities) / len(densities)) if densities else None)


def estimate_concealment(params: SchemeParams, trials: int, seed: int,
                         parallel: bool = False) -> ConcealmentReport:
    """Monte Carlo guess-success rate of the brute-force verifier."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    check_resource_guard(params)
    args = [(params.scheme.value, params.m, params.n, seed, i) for i in range(trials)]
    outcomes = _run_trials(_concealment_trial, args, parallel)
    successes = sum(1 for ok, _ in outcomes if ok)
    forced = sum(1 for _, f in outcomes if f)
    lo, hi = wilson_interval(successes, trials)
    return ConcealmentReport(
        params=params, trials=trials, seed=seed, successes=successes,
        guess_advantage=successes / trials - 0.5,
        interval_lo=lo - 0.5, interval_hi=hi - 0.5,
        forced_fraction=forced / trials,
        # forced trials always succeed, ambiguous ones are fair coins
        exact_advantage=forced / trials / 2)
