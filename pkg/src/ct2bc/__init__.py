"""ct2bc: bit commitment built from secure coin tossing.

Library layout:

* coin_toss    -- toss engines (simulated-relativistic, hash-bootstrap,
                  seeded), lightcone validation, multi-toss streams
* scheme_core  -- security parameters, joint instance generation, the
                  generic commit/unveil/verify contract
* subgraph     -- induced-subgraph commitment scheme with brute-force oracles
* subset_sum   -- subset-sum commitment scheme with plain and
                  meet-in-the-middle oracles
* session      -- two-party state machine, wire protocol, transcripts
* attacks      -- equivocation/guessing attacks and Monte Carlo estimators
* cli          -- the `ct2bc` command
"""

from .coin_toss import (AbortPolicy, BitStream, HashBootstrapEngine,
                        RelativisticSimEngine, SaltedHashCommitment, SeededEngine,
                        SpacetimeConfig, TossEvent, TossOutcome, TossSecurityParams,
                        bootstrapped_toss, toss_stream, validate_relativistic_toss,
                        xor_combine)
from .errors import (AbortReason, FrameError, ParameterMismatchError, ProtocolError,
                     ProtocolViolationError, ResourceGuardError, StreamExhaustedError,
                     TossAbortError)
from .scheme_core import (Commitment, InstanceDeriver, InstancePair, Opening,
                          RejectReason, SchemeId, SchemeParams, Verdict,
                          bits_required, commit_bit, generate_instance_pair,
                          grading_bits, verify_opening)
from .session import (Phase, Role, Session, SessionConfig, SessionResult, Transcript,
                      parse_engine_spec, parse_transcript, replay_transcript,
                      run_local_pair, run_session, serialize_transcript)
from .subgraph import (GraphInstance, OrderedSubset, SubgraphPayload, induce_payload,
                       sg_commit, sg_is_associated, sg_verify)
from .subset_sum import (KnapsackInstance, SelectionBits, SumPayload,
                         ks_commit, ks_find_all_representations, ks_verify)

__version__ = "0.1.0"
