"""Command-line surface: run scenarios, inspect logs, serve the supervisor.

Exit codes: 0 success, 2 validation failure, 3 audit-chain failure.
"""

from __future__ import annotations

import argparse
import sys
import threading
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from .audit import read_log, verify_file, write_log
from .baselines import BaselineProfile, human_baseline, validate_budget
from .errors import InvalidBudget, InvalidScenario, QuotaExceeded, StoreFormatError
from .guard import seal as make_seal
from .memory import dump_store, restore_store
from .runner import fold_report, load_scenario, run_scenario
from .supervisor import SupervisorServer

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CHAIN = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mindcap", description="capability-governed agent sandbox"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario file")
    run_p.add_argument("--scenario", required=True, help="scenario config file")
    run_p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run_p.add_argument(
        "--wall-clock", action="store_true", help="sleep real time to match simulated time"
    )
    run_p.add_argument("--log", default=None, help="write the audit log to this file")
    run_p.add_argument(
        "--dump-store", default=None, help="write a long-term store snapshot after the run"
    )

    report_p = sub.add_parser("report", help="summarize a dumped audit log")
    report_p.add_argument("logfile")

    audit_p = sub.add_parser("audit", help="audit log operations")
    audit_sub = audit_p.add_subparsers(dest="audit_command", required=True)
    audit_verify = audit_sub.add_parser("verify", help="re-check a dumped log bit-exactly")
    audit_verify.add_argument("logfile")

    seal_p = sub.add_parser("seal", help="seal operations")
    seal_sub = seal_p.add_subparsers(dest="seal_command", required=True)
    seal_show = seal_sub.add_parser("show", help="print the seal digests for a scenario")
    seal_show.add_argument("--scenario", required=True)

    baseline_p = sub.add_parser("baseline", help="baseline profiles")
    baseline_sub = baseline_p.add_subparsers(dest="baseline_command", required=True)
    baseline_show = baseline_sub.add_parser("show", help="print a named budget profile")
    baseline_show.add_argument("profile")

    store_p = sub.add_parser("store", help="long-term store snapshots")
    store_sub = store_p.add_subparsers(dest="store_command", required=True)
    store_restore = store_sub.add_parser("restore", help="load and check a store snapshot")
    store_restore.add_argument("snapshot")
    store_restore.add_argument(
        "--capacity-bits", type=int, required=True, help="capacity for the restored store"
    )

    serve_p = sub.add_parser("serve", help="run a scenario behind the supervisor API")
    serve_p.add_argument("--scenario", required=True)
    serve_p.add_argument("--port", type=int, default=0)
    serve_p.add_argument("--supervisor-token", required=True)
    serve_p.add_argument("--seed", type=int, default=None)
    serve_p.add_argument(
        "--pace", type=float, default=0.0, help="real seconds to sleep per agent step"
    )
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    report = run_scenario(scenario, wall_clock=args.wall_clock)
    for episode in report.episodes:
        print(f"{episode.task_id}: reward={episode.reward} steps={episode.steps}")
    print(
        f"totals: ops={report.total_ops} bytes_read={report.total_bytes_read} "
        f"bytes_written={report.total_bytes_written} "
        f"latency_ms={report.total_latency_ms:.1f}"
    )
    for name, detail in report.flags:
        print(f"flag: {name} {detail}")
    print(f"head_hash: {report.head_hash}")
    print(f"records: {report.chain_length}")
    if args.log:
        write_log(report.trail.records(), args.log)
        print(f"log written: {args.log}")
    if args.dump_store:
        Path(args.dump_store).write_bytes(dump_store(report.run.memory.store))
        print(f"store written: {args.dump_store}")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    ok, bad, _count = verify_file(args.logfile)
    if not ok:
        where = "unparseable" if bad is None else f"first_bad_seq={bad}"
        print(f"chain verification FAILED ({where})", file=sys.stderr)
        return EXIT_CHAIN
    summary = fold_report(read_log(args.logfile))
    for episode in summary["episodes"]:
        print(
            f"{episode['task_id']}: reward={episode['reward']} steps={episode['steps']} "
            f"ops={episode['ops']} bytes_read={episode['bytes_read']} "
            f"bytes_written={episode['bytes_written']} "
            f"latency_ms={episode['latency_ms']:.1f}"
        )
    print(
        f"totals: ops={summary['total_ops']} bytes_read={summary['total_bytes_read']} "
        f"bytes_written={summary['total_bytes_written']} "
        f"latency_ms={summary['total_latency_ms']:.1f}"
    )
    for name, detail in summary["flags"]:
        print(f"flag: {name} {detail}")
    print(f"head_hash: {summary['head_hash']}")
    print(f"records: {summary['chain_length']}")
    return EXIT_OK


def _cmd_audit_verify(args: argparse.Namespace) -> int:
    ok, bad, count = verify_file(args.logfile)
    if ok:
        print(f"ok records={count}")
        return EXIT_OK
    where = "unparseable" if bad is None else f"first_bad_seq={bad}"
    print(f"FAILED {where}", file=sys.stderr)
    return EXIT_CHAIN


def _cmd_seal_show(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    budget = scenario.build_budget()
    sealed = make_seal(scenario.policy_bytes(), budget)
    print(f"policy_digest: {sealed.policy_digest.hex()}")
    print(f"budget_digest: {sealed.budget_digest.hex()}")
    return EXIT_OK


def _cmd_baseline_show(args: argparse.Namespace) -> int:
    try:
        profile = BaselineProfile.parse(args.profile)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_VALIDATION
    budget = human_baseline(profile)
    sys.stdout.write(budget.to_config_text())
    result = validate_budget(budget)
    print(f"valid: {'yes' if result.ok else 'no'}")
    for violation in result.violations:
        print(f"violation: {violation}")
    return EXIT_OK


def _cmd_store_restore(args: argparse.Namespace) -> int:
    data = Path(args.snapshot).read_bytes()
    store = restore_store(data, args.capacity_bits)
    print(f"ok chunks={len(store)} used_bits={store.used_bits}")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    server = SupervisorServer(
        scenario, token=args.supervisor_token, port=args.port, pace_s=args.pace
    )
    server.start()
    print(f"supervisor listening on http://127.0.0.1:{server.port}", flush=True)
    try:
        # Serve until interrupted; the run finishing keeps the API up for
        # post-mortem queries.
        threading.Event().wait()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "report":
            return _cmd_report(args)
        if args.command == "audit":
            return _cmd_audit_verify(args)
        if args.command == "seal":
            return _cmd_seal_show(args)
        if args.command == "baseline":
            return _cmd_baseline_show(args)
        if args.command == "store":
            return _cmd_store_restore(args)
        if args.command == "serve":
            return _cmd_serve(args)
    except (
        InvalidScenario,
        InvalidBudget,
        StoreFormatError,
        QuotaExceeded,
        FileNotFoundError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
