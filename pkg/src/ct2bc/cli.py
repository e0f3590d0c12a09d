"""Command-line entry points: run a session (either role), generate instance
pairs, and run attack experiments.

Exit codes for `run`: 0 ACCEPTED, 2 REJECTED, 3 ABORTED, 1 usage/config
error.  `attack` and `instances` exit 0 on success, 1 on bad parameters or
resource-guard violations.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
from pathlib import Path

from .attacks import (check_resource_guard, estimate_binding, estimate_concealment,
                      weak_params)
from .errors import ProtocolError, ResourceGuardError
from .scheme_core import SchemeId, SchemeParams
from .session import (Phase, PipeChannel, Role, SessionConfig, SocketChannel,
                      parse_engine_spec, run_session, serialize_transcript)
from .subgraph import GraphInstance
from .subset_sum import KnapsackInstance
from .wire import encode_graph_instance, encode_knapsack_instance


class UsageError(Exception):
    pass


def _build_params(scheme: str, m: int, n: int | None) -> SchemeParams:
    scheme_id = SchemeId(scheme)
    if scheme_id is SchemeId.SUBSET_SUM:
        if n is None:
            n = m
        elif n != m:
            raise UsageError("subset-sum fixes n = m; drop --n or set it to m")
    elif n is None:
        raise UsageError("subgraph scheme requires --n")
    try:
        return SchemeParams(scheme=scheme_id, m=m, n=n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _warn_weak(params: SchemeParams) -> None:
    if params.m < 4:
        print(f"warning: m={params.m} is far below any plausible security margin",
              file=sys.stderr)
    if params.scheme is SchemeId.SUBGRAPH and params.n < 3:
        print(f"warning: n={params.n} gives the committer cheap equivocations",
              file=sys.stderr)


def _open_channel(args):
    if args.stdio:
        # stdout is the wire; the report goes to stderr in this mode
        return PipeChannel(sys.stdin.buffer, sys.stdout.buffer, owns_files=False)
    if args.listen:
        host, port = _split_hostport(args.listen)
        server = socket.create_server((host, port))
        try:
            server.settimeout(args.timeout)
            conn, _ = server.accept()
        finally:
            server.close()
        return SocketChannel(conn, timeout=args.timeout)
    host, port = _split_hostport(args.connect)
    last_error = None
    for _ in range(50):  # the peer may still be binding
        try:
            return SocketChannel(socket.create_connection((host, port), timeout=args.timeout),
                                 timeout=args.timeout)
        except OSError as exc:
            last_error = exc
            import time

            time.sleep(0.1)
    raise UsageError(f"could not connect to {args.connect}: {last_error}")


def _split_hostport(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise UsageError(f"bad address {value!r}, expected host:port")
    return host, int(port)


def cmd_run(args) -> int:
    params = _build_params(args.scheme, args.m, args.n)
    _warn_weak(params)
    kind, engine_seed = parse_engine_spec(args.toss)
    if args.seed is not None and kind != "seeded":
        raise UsageError("--seed is only valid with the seeded engine")
    transports = [bool(args.connect), bool(args.listen), args.stdio]
    if sum(transports) != 1:
        raise UsageError("specify exactly one of --connect, --listen, --stdio")

    engine_spec = args.toss
    if args.seed is not None and engine_seed is None:
        engine_spec = f"seeded:{args.seed}"
    config = SessionConfig(
        role=Role(args.role),
        params=params,
        engine_spec=engine_spec,
        bit=args.bit,
        seed=args.seed if engine_seed is None else None,
    )
    channel = _open_channel(args)
    try:
        result = run_session(config, channel)
    finally:
        channel.close()

    if args.transcript_out:
        Path(args.transcript_out).write_bytes(serialize_transcript(result.transcript))
    report = {
        "phase": result.phase.name,
        "role": args.role,
        "scheme": params.scheme.value,
        "m": params.m,
        "n": params.n,
        "engine": kind,
        "weak_params": weak_params(params),
        "verdict_bit": result.verdict.bit if result.verdict else None,
        "reject_reason": (result.verdict.reason.value
                          if result.verdict and result.verdict.reason else None),
        "abort_reason": result.abort_reason.value if result.abort_reason else None,
    }
    if args.report_out:
        Path(args.report_out).write_text(json.dumps(report) + "\n")
    print(json.dumps(report), file=sys.stderr if args.stdio else sys.stdout)
    if result.phase is Phase.ACCEPTED:
        return 0
    if result.phase is Phase.REJECTED:
        return 2
    return 3


def _parse_grid(spec: str) -> dict[str, list[int]]:
    """Grid spec: semicolon-separated assignments, values comma lists or
    lo..hi ranges, e.g. "m=4..8;n=2,3"."""
    grid: dict[str, list[int]] = {}
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise UsageError(f"bad grid component {part!r}")
        key, _, values = part.partition("=")
        key = key.strip()
        if key not in ("m", "n"):
            raise UsageError(f"grid variables are m and n, not {key!r}")
        out: list[int] = []
        for chunk in values.split(","):
            chunk = chunk.strip()
            if ".." in chunk:
                lo, _, hi = chunk.partition("..")
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(chunk))
        grid[key] = out
    if not grid:
        raise UsageError("empty grid spec")
    return grid


def _grid_cells(args) -> list[tuple[int, int | None]]:
    if not args.grid:
        return [(args.m, args.n)]
    grid = _parse_grid(args.grid)
    ms = grid.get("m", [args.m])
    ns = grid.get("n", [args.n])
    return [(m, n) for m in ms for n in ns]


def cmd_attack(args) -> int:
    estimator = estimate_binding if args.kind == "binding" else estimate_concealment
    records = []
    for m, n in _grid_cells(args):
        if m is None:
            raise UsageError("--m (or a grid over m) is required")
        params = _build_params(args.scheme, m, n)
        check_resource_guard(params)
        _warn_weak(params)
        report = estimator(params, trials=args.trials, seed=args.seed,
                           parallel=args.parallel)
        records.append(report.to_json_dict())

    lines = "".join(json.dumps(r) + "\n" for r in records)
    sys.stdout.write(lines)
    if args.report_out:
        Path(args.report_out).write_text(lines)
    if args.plot_out:
        from .plotting import render_attack_figures

        for path in render_attack_figures(records, args.plot_out):
            print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_instances(args) -> int:
    from .attacks import trial_pair

    params = _build_params(args.scheme, args.m, args.n)
    _warn_weak(params)
    pair = trial_pair(params, args.seed)
    record: dict = {
        "scheme": params.scheme.value,
        "m": params.m,
        "n": params.n,
        "seed": args.seed,
        "bits_consumed": pair.bits_consumed,
        "base_bit_count": pair.base_bit_count,
        "regen_draws": pair.regen_draws,
    }
    if params.scheme is SchemeId.SUBGRAPH:
        assert isinstance(pair.c0, GraphInstance)
        record["c0"] = {"edges": sorted(pair.c0.edges),
                        "encoding": encode_graph_instance(pair.c0).hex()}
        record["c1"] = {"edges": sorted(pair.c1.edges),
                        "encoding": encode_graph_instance(pair.c1).hex()}
    else:
        assert isinstance(pair.c0, KnapsackInstance)
        record["c0"] = {"elements": list(pair.c0.elements),
                        "encoding": encode_knapsack_instance(pair.c0).hex()}
        record["c1"] = {"elements": list(pair.c1.elements),
                        "encoding": encode_knapsack_instance(pair.c1).hex()}
    print(json.dumps(record))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ct2bc",
        description="Bit commitment from coin tossing: sessions, instances, attacks.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one side of a commitment session")
    run.add_argument("--role", choices=["a", "b"], required=True,
                     help="a = committer, b = verifier")
    run.add_argument("--scheme", choices=["subgraph", "subset-sum"], required=True)
    run.add_argument("--m", type=int, required=True)
    run.add_argument("--n", type=int, default=None)
    run.add_argument("--toss", default="relativistic-sim",
                     help="relativistic-sim | hash-bootstrap | seeded:<u64>")
    run.add_argument("--connect", default=None, metavar="HOST:PORT")
    run.add_argument("--listen", default=None, metavar="HOST:PORT")
    run.add_argument("--stdio", action="store_true",
                     help="frames on stdin/stdout (wire both directions externally)")
    run.add_argument("--bit", type=int, choices=[0, 1], default=None,
                     help="committer's bit (default: drawn from the session rng)")
    run.add_argument("--seed", type=int, default=None,
                     help="test-mode seed (seeded engine only)")
    run.add_argument("--timeout", type=float, default=10.0)
    run.add_argument("--transcript-out", default=None)
    run.add_argument("--report-out", default=None)
    run.set_defaults(func=cmd_run)

    attack = sub.add_parser("attack", help="run a binding/concealment experiment")
    attack.add_argument("kind", choices=["binding", "concealment"])
    attack.add_argument("--scheme", choices=["subgraph", "subset-sum"], required=True)
    attack.add_argument("--m", type=int, default=None)
    attack.add_argument("--n", type=int, default=None)
    attack.add_argument("--trials", type=int, required=True)
    attack.add_argument("--seed", type=int, required=True)
    attack.add_argument("--grid", default=None,
                        help='parameter grid, e.g. "m=4..8;n=2,3"')
    attack.add_argument("--parallel", action="store_true",
                        help="distribute trials over a process pool")
    attack.add_argument("--report-out", default=None, help="JSON-lines output path")
    attack.add_argument("--plot-out", default=None,
                        help="directory for PNG figures rendered from the report")
    attack.set_defaults(func=cmd_attack)

    instances = sub.add_parser("instances",
                               help="derive and print a seeded instance pair")
    instances.add_argument("--scheme", choices=["subgraph", "subset-sum"], required=True)
    instances.add_argument("--m", type=int, required=True)
    instances.add_argument("--n", type=int, default=None)
    instances.add_argument("--seed", type=int, required=True)
    instances.set_defaults(func=cmd_instances)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (UsageError, ResourceGuardError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ProtocolError as exc:
        print(f"protocol error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
