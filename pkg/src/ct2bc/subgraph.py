"""Induced-subgraph commitment scheme.

Public instances are graphs on m labeled vertices; a commitment is the
induced subgraph on a secret random ordered n-subset of the claimed
instance's vertices, relabeled to 1..n; the unveil reveals the subset.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import permutations
from typing import Iterator, Optional, Sequence

from .errors import ParameterMismatchError
from .scheme_core import (Commitment, InstancePair, Opening, RejectReason,
                          SchemeId, SchemeParams, Verdict)


def _validate_graph(vertex_count: int, edges: frozenset[tuple[int, int]]):
    if vertex_count < 1:
        raise ValueError("graphs need at least one vertex")
    for edge in edges:
        i, j = edge
        if not (1 <= i < j <= vertex_count):
            raise ValueError(f"edge {edge} is not an in-range pair with i < j")


@dataclass(frozen=True)
class GraphInstance:
    """Undirected graph on labeled vertices 1..vertex_count."""

    vertex_count: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        _validate_graph(self.vertex_count, self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges


@dataclass(frozen=True)
class SubgraphPayload:
    """Relabeled induced subgraph sent at commit time."""

    vertex_count: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        _validate_graph(self.vertex_count, self.edges)


@dataclass(frozen=True)
class OrderedSubset:
    """Ordered vertex selection; order is significant and secret until unveil.

    Distinctness and range are checked at verification, not construction, so
    malformed witnesses can travel the wire and be rejected properly.
    """

    indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if any(i < 1 for i in self.indices):
            raise ValueError("vertex indices start at 1")


def pair_sequence(m: int) -> list[tuple[int, int]]:
    """Lexicographic order of unordered vertex pairs, fixing the bit layout."""
    return [(i, j) for i in range(1, m + 1) for j in range(i + 1, m + 1)]


def decode_graph(m: int, bits: Sequence[int]) -> GraphInstance:
    pairs = pair_sequence(m)
    if len(bits) != len(pairs):
        raise ParameterMismatchError(
            f"graph on {m} vertices needs {len(pairs)} bits, got {len(bits)}")
    edges = frozenset(pair for pair, bit in zip(pairs, bits) if bit)
    return GraphInstance(vertex_count=m, edges=edges)


def uniform_int(rng: random.Random, upper: int) -> int:
    """Exactly uniform draw from [0, upper) by rejection sampling."""
    if upper < 1:
        raise ValueError("upper must be positive")
    if upper == 1:
        return 0
    nbits = (upper - 1).bit_length()
    while True:
        value = rng.getrandbits(nbits)
        if value < upper:
            return value


def sample_ordered_subset(rng: random.Random, m: int, n: int) -> tuple[int, ...]:
    """Uniform ordered n-subset of 1..m via a partial Fisher-Yates pass."""
    if not 1 <= n <= m:
        raise ValueError("need 1 <= n <= m")
    pool = list(range(1, m + 1))
    for j in range(n):
        k = j + uniform_int(rng, m - j)
        pool[j], pool[k] = pool[k], pool[j]
    return tuple(pool[:n])


def induce_payload(c: GraphInstance, indices: Sequence[int]) -> SubgraphPayload:
    """Induced subgraph on the ordered selection, relabeled so pick k -> k."""
    n = len(indices)
    edges = frozenset(
        (k, l)
        for k in range(1, n + 1)
        for l in range(k + 1, n + 1)
        if c.has_edge(indices[k - 1], indices[l - 1])
    )
    return SubgraphPayload(vertex_count=n, edges=edges)


def sg_commit(params: SchemeParams, pair: InstancePair, a: int,
              rng: random.Random) -> tuple[Commitment, Opening]:
    indices = sample_ordered_subset(rng, params.m, params.n)
    payload = induce_payload(pair.instance(a), indices)
    return (Commitment(scheme=SchemeId.SUBGRAPH, payload=payload),
            Opening(claimed_bit=a, witness=OrderedSubset(indices)))


def _witness_shape_ok(indices: tuple[int, ...], n: int, m: int) -> bool:
    return (len(indices) == n
            and len(set(indices)) == len(indices)
            and all(1 <= i <= m for i in indices))


def _induces_exactly(c: GraphInstance, indices: Sequence[int],
                     payload: SubgraphPayload) -> bool:
    n = len(indices)
    for k in range(1, n + 1):
        for l in range(k + 1, n + 1):
            if (((k, l) in payload.edges)
                    != c.has_edge(indices[k - 1], indices[l - 1])):
                return False
    return True


def sg_verify(pair: InstancePair, payload: SubgraphPayload,
              opening: Opening) -> Verdict:
    """Full induced-subgraph equality in both directions: the revealed
    selection must reproduce the payload edge for edge and non-edge for
    non-edge against the claimed instance."""
    if not isinstance(opening.witness, OrderedSubset):
        return Verdict.reject(RejectReason.SCHEME_MISMATCH)
    c = pair.instance(opening.claimed_bit)
    indices = opening.witness.indices
    if not _witness_shape_ok(indices, payload.vertex_count, c.vertex_count):
        return Verdict.reject(RejectReason.WITNESS_MALFORMED)
    if not _induces_exactly(c, indices, payload):
        return Verdict.reject(RejectReason.ASSOCIATION_FAILS)
    return Verdict.accept(opening.claimed_bit)


def iter_ordered_subsets(m: int, n: int) -> Iterator[tuple[int, ...]]:
    return permutations(range(1, m + 1), n)


def sg_is_associated(payload: SubgraphPayload,
                     c: GraphInstance) -> Optional[OrderedSubset]:
    """Brute-force membership oracle: the first ordered subset (in
    lexicographic enumeration order) inducing the payload exactly, or None.

    Exhaustive generate-and-test; intended for desk-scale instances
    (m <= 8 or so).
    """
    if payload.vertex_count > c.vertex_count:
        raise ParameterMismatchError("payload has more vertices than the instance")
    for indices in iter_ordered_subsets(c.vertex_count, payload.vertex_count):
        if _induces_exactly(c, indices, payload):
            return OrderedSubset(indices)
    return None


def sg_all_witnesses(payload: SubgraphPayload,
                     c: GraphInstance) -> list[tuple[int, ...]]:
    """Every ordered subset inducing the payload, by full enumeration."""
    if payload.vertex_count > c.vertex_count:
        raise ParameterMismatchError("payload has more vertices than the instance")
    return [tuple(indices)
            for indices in iter_ordered_subsets(c.vertex_count, payload.vertex_count)
            if _induces_exactly(c, indices, payload)]
