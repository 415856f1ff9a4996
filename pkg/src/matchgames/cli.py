"""Command-line front door.

Subcommands: solve, verify, gen, bench, appendix, replay.  Exit codes:
0 green / exact match, 1 verification red, 2 malformed input file,
3 contract violation.  Tables on stdout are tab-separated.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from fractions import Fraction

from . import engine, formats, generators, verify
from .core import ContractViolation, GAME_CLASSES, MatchingGame, TransferGame
from .formats import FormatError

EXIT_GREEN = 0
EXIT_RED = 1
EXIT_FORMAT = 2
EXIT_CONTRACT = 3


def _parse_eps(text: str, game_class: str):
    return Fraction(text) if game_class == "repeated" else float(Fraction(text))


def _write(path, text):
    if path == "-" or path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _report_doc(report: verify.StabilityReport) -> dict:
    return {
        "externally_stable": report.externally_stable,
        "external_eps": report.external_eps,
        "eps": report.eps,
        "blocking_pairs": [
            {"man": i, "woman": j, "payoffs": [float(a) for a in wit], "margin": m}
            for i, j, wit, m in report.blocking_pairs
        ],
        "irp_violations": [list(map(str, v)) for v in report.irp_violations],
        "internally_stable": report.internally_stable,
        "cne_residuals": {
            f"{i},{j}": [float(a), float(b)] for (i, j), (a, b) in sorted(report.cne_residuals.items())
        },
    }


def cmd_solve(args) -> int:
    g = formats.load_instance(args.instance)
    eps = _parse_eps(args.eps, g.game_class) if args.eps else None
    order = [int(x) for x in args.order.split(",")] if args.order else None
    pi, report, trace = engine.solve(g, order=order, eps=eps)
    out = {
        "profile": formats.profile_to_doc(g, pi),
        "report": _report_doc(report),
    }
    _write(args.out, formats.dumps(out))
    if args.trace:
        _write(args.trace, formats.dumps(formats.trace_to_doc(trace)))
    return EXIT_GREEN if report.green else EXIT_RED


def cmd_verify(args) -> int:
    g = formats.load_instance(args.instance)
    with open(args.profile) as fh:
        doc = formats._loads(fh.read())
    if "profile" in doc:
        doc = doc["profile"]
    pi = formats.profile_from_doc(doc, g)
    report = verify.full_report(g, pi)
    sys.stdout.write(formats.dumps(_report_doc(report)))
    return EXIT_GREEN if report.green else EXIT_RED


def cmd_gen(args) -> int:
    g = generators.generate(
        args.game_class, args.men, args.women, actions=args.actions,
        entry_range=args.entry_range, seed=args.seed,
    )
    doc = formats.instance_to_doc(g, seed=args.seed,
                                  generator_version=generators.GENERATOR_VERSION)
    _write(args.out, formats.dumps(doc))
    return EXIT_GREEN


def cmd_bench(args) -> int:
    eps_list = args.eps_list.split(",")
    print("class\teps\tseeds\ta1_mean\ta1_max\ta1_cap\ta1_ok\ta2_mean\ta2_max\ta2_cap\ta2_ok\tgreen")
    for eps_text in eps_list:
        a1, a2, caps1, caps2 = [], [], [], []
        ok1 = ok2 = True
        greens = 0
        for seed in range(args.seeds):
            g = generators.generate(args.game_class, args.men, args.women,
                                    actions=args.actions, seed=seed,
                                    epsilon=_parse_eps(eps_text, args.game_class))
            pi, report, trace = engine.solve(g)
            a1.append(trace.iterations)
            a2.append(max(trace.round_sweeps or [0]))
            caps1.append(trace.iteration_cap)
            caps2.append(trace.sweep_cap)
            ok1 &= trace.iterations <= trace.iteration_cap
            ok2 &= max(trace.round_sweeps or [0]) <= trace.sweep_cap
            greens += report.green
        print("\t".join(str(x) for x in [
            args.game_class, eps_text, args.seeds,
            round(statistics.mean(a1), 2), max(a1), max(caps1), ok1,
            round(statistics.mean(a2), 2), max(a2), max(caps2), ok2,
            f"{greens}/{args.seeds}",
        ]))
    return EXIT_GREEN


# ---------------------------------------------------------------------------
# built-in worked example: 3x3 transfer market
# ---------------------------------------------------------------------------

EXAMPLE_A = ((83, 85, 99), (74, 13, 15), (58, 49, 54))
EXAMPLE_B = ((69, 6, 28), (88, 2, 70), (72, 18, 9))


def example_market() -> MatchingGame:
    couples = {
        (i, j): TransferGame(EXAMPLE_A[i][j], EXAMPLE_B[i][j])
        for i in range(3) for j in range(3)
    }
    return MatchingGame(3, 3, "transfer", couples, (0, 0, 0), (0, 0, 0), 1.0)


# expected milestones of the worked example (robust quantities only)
EXAMPLE_EXPECTED = {
    "deferred_acceptance": {"mu": {0: 2, 1: 0, 2: 1},
                            "u": (99.0, 74.0, 49.0), "v": (88.0, 18.0, 28.0)},
    "order": [0, 2, 1],
    "auction": {
        "mu": {0: 2, 1: 0, 2: 1},
        "iterations": 5,
        "transfers_y": (24.0, 17.0, 27.0),
        "u": (126.0, 98.0, 66.0),
        "v": (64.0, 1.0, 1.0),
        "outside_u": (89.0, 83.0, 65.0),
        "proposals": {1: (0, 0, 151.0), 4: (0, 2, 126.0), 5: (2, 1, 66.0)},
        "settles": {2: (2, 0, 0.0, 46.0, 104.0, 26.0), 3: (1, 0, 0.0, 24.0, 98.0, 64.0)},
        "bid_incumbent": {2: 26.0, 3: 64.0},
    },
    "equilibrium": {"u": (99.0, 74.0, 49.0), "v": (88.0, 18.0, 28.0),
                    "transfers": (0.0, 0.0, 0.0)},
}


def run_example(printer=print) -> bool:
    """Run the built-in market through all three stages and diff milestones."""
    from . import transfers

    ok = True

    def check(label, got, want):
        nonlocal ok
        good = got == want
        ok &= good
        printer(f"{'ok ' if good else 'FAIL'} {label}: {got}" + ("" if good else f" != {want}"))

    g = example_market()
    inst = transfers.TransferInstance(EXAMPLE_A, EXAMPLE_B, (0, 0, 0), (0, 0, 0))
    mu, u, v = transfers.nash_stable_matching(inst)
    exp = EXAMPLE_EXPECTED["deferred_acceptance"]
    check("deferred acceptance matching", mu, exp["mu"])
    check("deferred acceptance payoffs", (u, v), (exp["u"], exp["v"]))

    pi1, t1 = engine.propose_dispose(g, order=EXAMPLE_EXPECTED["order"])
    exp = EXAMPLE_EXPECTED["auction"]
    check("auction matching", pi1.mu, exp["mu"])
    check("auction iterations", t1.iterations, exp["iterations"])
    check("auction men payoffs", tuple(pi1.u), exp["u"])
    check("auction women payoffs", tuple(pi1.v), exp["v"])
    yt = tuple(pi1.assignments[(i, j)].y for j, i in
               sorted((j, i) for i, j in pi1.matched_pairs()))
    check("auction women transfers", yt, exp["transfers_y"])
    oo = tuple(
        float(engine.outside_options(g, pi1, i, pi1.mu[i]).u_eps) for i in range(3)
    )
    check("outside options", oo, exp["outside_u"])
    for e in t1.events:
        if isinstance(e, engine.Propose) and e.accepted and e.iteration in exp["proposals"]:
            want = exp["proposals"][e.iteration]
            check(f"iteration {e.iteration} proposal", (e.man, e.woman, e.u), want)
        if isinstance(e, engine.Settle) and e.iteration in exp["settles"]:
            w = exp["settles"][e.iteration]
            got = (e.winner, e.woman, e.assignment.x, e.assignment.y, e.u, e.v)
            check(f"iteration {e.iteration} settle", got, w)
        if isinstance(e, engine.Compete) and e.iteration in exp["bid_incumbent"]:
            check(f"iteration {e.iteration} incumbent bid", e.bid_incumbent,
                  exp["bid_incumbent"][e.iteration])

    pi2, t2 = engine.stabilize(g, pi1)
    exp = EXAMPLE_EXPECTED["equilibrium"]
    check("equilibrium men payoffs", tuple(pi2.u), exp["u"])
    check("equilibrium women payoffs", tuple(pi2.v), exp["v"])
    yt2 = tuple(pi2.assignments[(i, j)].y + pi2.assignments[(i, j)].x
                for j, i in sorted((j, i) for i, j in pi2.matched_pairs()))
    check("equilibrium transfers", yt2, exp["transfers"])
    report = verify.full_report(g, pi2)
    check("final report green", report.green, True)
    return ok


def cmd_appendix(args) -> int:
    return EXIT_GREEN if run_example() else EXIT_RED


def cmd_replay(args) -> int:
    g = formats.load_instance(args.instance)
    with open(args.trace) as fh:
        doc = formats._loads(fh.read())
    pi = formats.replay_trace(doc, g)
    out = formats.dumps(formats.profile_to_doc(g, pi))
    if args.expect:
        with open(args.expect) as fh:
            want = formats._loads(fh.read())
        if "profile" in want:
            want = want["profile"]
        same = formats.dumps(want) == formats.dumps(formats.profile_to_doc(g, pi))
        print("replay-match" if same else "replay-mismatch")
        return EXIT_GREEN if same else EXIT_RED
    _write(args.out, out)
    return EXIT_GREEN


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="matchgames",
                                 description="epsilon-stable allocations for matching games")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance file")
    p.add_argument("instance")
    p.add_argument("--eps", default=None)
    p.add_argument("--order", default=None, help="comma-separated proposer order")
    p.add_argument("--out", default="-")
    p.add_argument("--trace", default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="verify a profile against an instance")
    p.add_argument("instance")
    p.add_argument("profile")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate a seeded instance")
    p.add_argument("--class", dest="game_class", choices=GAME_CLASSES, required=True)
    p.add_argument("--men", type=int, default=3)
    p.add_argument("--women", type=int, default=3)
    p.add_argument("--actions", type=int, default=3)
    p.add_argument("--entry-range", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="iteration statistics vs theoretical caps")
    p.add_argument("--class", dest="game_class", choices=GAME_CLASSES, required=True)
    p.add_argument("--eps-list", default="1,0.25")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--men", type=int, default=4)
    p.add_argument("--women", type=int, default=4)
    p.add_argument("--actions", type=int, default=3)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("appendix", help="run the built-in worked example")
    p.set_defaults(func=cmd_appendix)

    p = sub.add_parser("replay", help="re-derive the final profile from a trace")
    p.add_argument("instance")
    p.add_argument("trace")
    p.add_argument("--expect", default=None, help="profile document to compare against")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_replay)

    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except FormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FORMAT
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FORMAT
    except (ContractViolation, engine.EngineError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
