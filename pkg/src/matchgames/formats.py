"""Instance, profile and trace documents.

Everything is JSON with a format/version header and sorted keys, so
identical runs serialize byte-for-byte.  Repeated-class matrices, IRPs and
epsilon carry exact rationals encoded as "p/q" strings; floats there are
rejected at parse time.  Parse errors raise FormatError with a line/column
diagnostic where available.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Optional

from . import engine as _engine
from .core import (
    GAME_CLASSES,
    CompetitiveGame,
    MatchingGame,
    MatchingProfile,
    MixedAssignment,
    MixedStrategy,
    Punishment,
    RepeatedAssignment,
    RepeatedGame,
    RepeatedStrategy,
    TransferAssignment,
    TransferGame,
    ZeroSumGame,
    make_profile,
)

INSTANCE_FORMAT = "matchgames-instance"
PROFILE_FORMAT = "matchgames-profile"
TRACE_FORMAT = "matchgames-trace"
FORMAT_VERSION = 1


class FormatError(Exception):
    """Malformed document; carries a human-readable location when known."""


def _loads(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"line {e.lineno}, column {e.colno}: {e.msg}") from e


def _expect(doc, key, kind=None):
    if key not in doc:
        raise FormatError(f"missing field {key!r}")
    val = doc[key]
    if kind is not None and not isinstance(val, kind):
        raise FormatError(f"field {key!r} has wrong type {type(val).__name__}")
    return val


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


# ---------------------------------------------------------------------------
# rationals
# ---------------------------------------------------------------------------


def rat_str(x) -> str:
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def parse_rat(v, where: str) -> Fraction:
    if isinstance(v, bool) or isinstance(v, float):
        raise FormatError(f"{where}: floats are not allowed here, use \"p/q\"")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError) as e:
            raise FormatError(f"{where}: bad rational {v!r}") from e
    raise FormatError(f"{where}: bad rational {v!r}")


def _num(x):
    """JSON value for a payoff: exact rationals as strings, floats as-is."""
    if isinstance(x, Fraction):
        return rat_str(x)
    return float(x)


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------


def instance_to_doc(g: MatchingGame, seed: Optional[int] = None,
                    generator_version: Optional[int] = None) -> dict:
    rational = g.game_class == "repeated"

    def enc(x):
        return rat_str(x) if rational else float(x)

    couples = []
    for i in range(g.men):
        row = []
        for j in range(g.women):
            game = g.game(i, j)
            if isinstance(game, ZeroSumGame):
                row.append({"A": [[float(v) for v in r] for r in game.A]})
            elif isinstance(game, CompetitiveGame):
                row.append({
                    "A": [[float(v) for v in r] for r in game.A],
                    "B": [[float(v) for v in r] for r in game.B],
                })
            elif isinstance(game, RepeatedGame):
                row.append({
                    "A": [[rat_str(v) for v in r] for r in game.A],
                    "B": [[rat_str(v) for v in r] for r in game.B],
                })
            else:
                row.append({"a": float(game.a), "b": float(game.b)})
        couples.append(row)
    doc = {
        "format": INSTANCE_FORMAT,
        "version": FORMAT_VERSION,
        "class": g.game_class,
        "men": g.men,
        "women": g.women,
        "epsilon": enc(g.epsilon),
        "irp_men": [enc(x) for x in g.irp_men],
        "irp_women": [enc(x) for x in g.irp_women],
        "couples": couples,
    }
    if seed is not None:
        doc["seed"] = seed
        doc["generator_version"] = generator_version
    return doc


def instance_from_doc(doc: dict) -> MatchingGame:
    if _expect(doc, "format") != INSTANCE_FORMAT:
        raise FormatError("not an instance document")
    cls = _expect(doc, "class", str)
    if cls not in GAME_CLASSES:
        raise FormatError(f"unknown game class {cls!r}")
    men = _expect(doc, "men", int)
    women = _expect(doc, "women", int)
    rational = cls == "repeated"

    def num(v, where):
        if rational:
            return parse_rat(v, where)
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return float(v)
        raise FormatError(f"{where}: expected a number, got {v!r}")

    rows = _expect(doc, "couples", list)
    if len(rows) != men or any(len(r) != women for r in rows):
        raise FormatError("couples table must be men x women")
    couples = {}
    for i, row in enumerate(rows):
        for j, cell in enumerate(row):
            where = f"couples[{i}][{j}]"
            if cls == "zero_sum":
                couples[(i, j)] = ZeroSumGame(
                    [[num(v, where) for v in r] for r in _expect(cell, "A", list)]
                )
            elif cls == "strictly_competitive":
                couples[(i, j)] = CompetitiveGame(
                    [[num(v, where) for v in r] for r in _expect(cell, "A", list)],
                    [[num(v, where) for v in r] for r in _expect(cell, "B", list)],
                )
            elif cls == "repeated":
                couples[(i, j)] = RepeatedGame(
                    [[num(v, where) for v in r] for r in _expect(cell, "A", list)],
                    [[num(v, where) for v in r] for r in _expect(cell, "B", list)],
                )
            else:
                couples[(i, j)] = TransferGame(
                    num(_expect(cell, "a"), where), num(_expect(cell, "b"), where)
                )
    irp_men = tuple(num(v, "irp_men") for v in _expect(doc, "irp_men", list))
    irp_women = tuple(num(v, "irp_women") for v in _expect(doc, "irp_women", list))
    eps = num(_expect(doc, "epsilon"), "epsilon")
    return MatchingGame(men, women, cls, couples, irp_men, irp_women, eps)


def load_instance(path: str) -> MatchingGame:
    with open(path) as fh:
        return instance_from_doc(_loads(fh.read()))


# ---------------------------------------------------------------------------
# assignments and profiles
# ---------------------------------------------------------------------------


def assignment_to_doc(a) -> dict:
    if isinstance(a, MixedAssignment):
        return {
            "type": "mixed",
            "x": [float(p) for p in a.x.weights],
            "y": [float(p) for p in a.y.weights],
        }
    if isinstance(a, TransferAssignment):
        return {"type": "transfer", "x": float(a.x), "y": float(a.y)}
    if isinstance(a, RepeatedAssignment):
        sig = a.sigma

        def pun(p):
            if p is None:
                return None
            return {"strategy": [rat_str(w) for w in p.strategy], "level": rat_str(p.level)}

        return {
            "type": "repeated",
            "schedule": [list(c) for c in sig.schedule],
            "limit": [rat_str(sig.limit_payoff[0]), rat_str(sig.limit_payoff[1])],
            "punish_man": pun(sig.punish_man),
            "punish_woman": pun(sig.punish_woman),
        }
    raise FormatError(f"unknown assignment {type(a).__name__}")


def assignment_from_doc(doc: dict):
    kind = _expect(doc, "type", str)
    if kind == "mixed":
        return MixedAssignment(
            MixedStrategy.of([float(p) for p in doc["x"]]),
            MixedStrategy.of([float(p) for p in doc["y"]]),
        )
    if kind == "transfer":
        return TransferAssignment(float(doc["x"]), float(doc["y"]))
    if kind == "repeated":
        def pun(d):
            if d is None:
                return None
            return Punishment(
                tuple(parse_rat(w, "punishment") for w in d["strategy"]),
                parse_rat(d["level"], "punishment"),
            )

        sig = RepeatedStrategy(
            tuple((int(s), int(t)) for s, t in doc["schedule"]),
            (parse_rat(doc["limit"][0], "limit"), parse_rat(doc["limit"][1], "limit")),
            pun(doc.get("punish_man")),
            pun(doc.get("punish_woman")),
        )
        return RepeatedAssignment(sig)
    raise FormatError(f"unknown assignment type {kind!r}")


def profile_to_doc(g: MatchingGame, pi: MatchingProfile) -> dict:
    return {
        "format": PROFILE_FORMAT,
        "version": FORMAT_VERSION,
        "matching": [[i, pi.mu.get(i)] for i in range(g.men)],
        "assignments": {
            f"{i},{j}": assignment_to_doc(a) for (i, j), a in sorted(pi.assignments.items())
        },
        "payoffs": {
            "men": [_num(x) for x in pi.u],
            "women": [_num(x) for x in pi.v],
        },
    }


def profile_from_doc(doc: dict, g: MatchingGame) -> MatchingProfile:
    if _expect(doc, "format") != PROFILE_FORMAT:
        raise FormatError("not a profile document")
    mu = {}
    for i, j in _expect(doc, "matching", list):
        mu[int(i)] = None if j is None else int(j)
    assignments = {}
    for key, adoc in _expect(doc, "assignments", dict).items():
        i, j = (int(p) for p in key.split(","))
        assignments[(i, j)] = assignment_from_doc(adoc)
    pi = make_profile(g, mu, assignments)
    pi.validate(g)
    return pi


def load_profile(path: str, g: MatchingGame) -> MatchingProfile:
    with open(path) as fh:
        return profile_from_doc(_loads(fh.read()), g)


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------


def trace_to_doc(trace: _engine.EngineTrace) -> dict:
    events = []
    for e in trace.events:
        d = {"event": type(e).__name__.lower()}
        for k, v in e.__dict__.items():
            if k == "assignment":
                d[k] = None if v is None else assignment_to_doc(v)
            elif isinstance(v, tuple):
                d[k] = [_num(x) for x in v]
            elif isinstance(v, Fraction):
                d[k] = rat_str(v)
            else:
                d[k] = v
        events.append(d)
    return {
        "format": TRACE_FORMAT,
        "version": FORMAT_VERSION,
        "iterations": trace.iterations,
        "sweeps": trace.sweeps,
        "rounds": trace.rounds,
        "iteration_cap": trace.iteration_cap,
        "sweep_cap": trace.sweep_cap,
        "converged": trace.converged,
        "events": events,
    }


def replay_trace(doc: dict, g: MatchingGame) -> MatchingProfile:
    """Re-derive the final profile by folding the event log."""
    if _expect(doc, "format") != TRACE_FORMAT:
        raise FormatError("not a trace document")
    mu = {}
    assignments = {}
    for e in _expect(doc, "events", list):
        kind = _expect(e, "event", str)
        if kind == "propose":
            if not e.get("accepted"):
                continue
            i, j = e["man"], e["woman"]
            _unmatch_woman(mu, assignments, j)
            old = mu.get(i)
            if old is not None and old != j:
                assignments.pop((i, old), None)
            mu[i] = j
            if j is not None:
                assignments[(i, j)] = assignment_from_doc(e["assignment"])
        elif kind == "settle":
            i, j = e["winner"], e["woman"]
            loser = _unmatch_woman(mu, assignments, j)
            if loser is not None and loser != i:
                mu[loser] = None
            old = mu.get(i)
            if old is not None and old != j:
                assignments.pop((i, old), None)
            mu[i] = j
            assignments[(i, j)] = assignment_from_doc(e["assignment"])
        elif kind == "coupleupdate":
            i, j = e["man"], e["woman"]
            if e.get("assignment") is None:
                mu[i] = None
                assignments.pop((i, j), None)
            else:
                assignments[(i, j)] = assignment_from_doc(e["assignment"])
    return make_profile(g, mu, assignments)


def _unmatch_woman(mu, assignments, j):
    if j is None:
        return None
    for i2, j2 in list(mu.items()):
        if j2 == j:
            assignments.pop((i2, j), None)
            return i2
    return None
