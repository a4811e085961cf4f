"""JSON game and witness files.

A game file holds ``players``, ``states``, ``owner`` (state -> player),
``edges`` (list of ``[source, target]``) and ``objectives``: an object
keyed by player number (or a list in player order) whose entries are

* ``{"type": "buchi", "states": [...]}`` and likewise ``"cobuchi"``,
* ``{"type": "parity", "colors": {"s0": 2, ...}}`` (min-even),
* ``{"type": "streett", "pairs": [[[F...], [G...]], ...]}`` and ``"rabin"``,
* ``{"type": "muller", "formula": "s0 & !s3 | s1"}``.
"""
from __future__ import annotations

import json
from pathlib import Path

from .arena import GameArena, validate_arena
from .errors import ArenaError, ObjectiveError, ParseError
from .objectives import (
    And,
    Atom,
    Buchi,
    CoBuchi,
    Conj,
    Const,
    Muller,
    Neg,
    Not,
    Or,
    Parity,
    Rabin,
    Streett,
    check_states,
    format_formula,
    parse_formula,
)
from .secure_eq import MooreStrategy, StrategyProfile

__all__ = [
    "parse_game_file",
    "parse_game",
    "dump_game",
    "objective_to_json",
    "player_expression",
    "dump_witness",
    "load_witness",
    "bundled_game",
]


def _locate(text: str, needle) -> int | None:
    """Line of the first occurrence of ``needle`` (as JSON) in ``text``."""
    if needle is None:
        return None
    token = json.dumps(needle)
    for k, line in enumerate(text.splitlines(), start=1):
        if token in line:
            return k
    return None


def _objective(desc, n_player):
    if not isinstance(desc, dict) or "type" not in desc:
        raise ObjectiveError(f"objective of player {n_player} needs a 'type'")
    kind = str(desc["type"]).lower().replace("-", "").replace("_", "")
    try:
        if kind == "buchi":
            return Buchi(desc["states"])
        if kind == "cobuchi":
            return CoBuchi(desc["states"])
        if kind == "parity":
            return Parity(desc["colors"])
        if kind in ("streett", "rabin"):
            pairs = [(tuple(f), tuple(g)) for f, g in desc["pairs"]]
            return Streett(pairs) if kind == "streett" else Rabin(pairs)
        if kind == "muller":
            return Muller(str(desc["formula"]))
    except KeyError as exc:
        raise ObjectiveError(f"objective of player {n_player} lacks {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ObjectiveError(f"objective of player {n_player} is malformed: {exc}") from None
    raise ObjectiveError(f"unknown objective type {desc['type']!r} for player {n_player}")


def parse_game(text: str, path=None):
    """Parse a game document; returns ``(arena, objectives)``."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg, path) from None
    if not isinstance(raw, dict):
        raise ParseError(1, "a game file is a JSON object", path)
    for key in ("players", "states", "owner", "edges", "objectives"):
        if key not in raw:
            raise ParseError(None, f"missing field {key!r}", path)
    try:
        arena = validate_arena(raw)
    except ArenaError as exc:
        culprit = getattr(exc, "state", None)
        if culprit is None:
            culprit = getattr(exc, "target", None) if getattr(exc, "source", None) is None else exc.source
        raise ParseError(_locate(text, culprit), str(exc), path) from None
    except (TypeError, ValueError) as exc:
        raise ParseError(None, f"malformed arena: {exc}", path) from None

    entries = raw["objectives"]
    if isinstance(entries, list):
        entries = {str(k): d for k, d in enumerate(entries, start=1)}
    if not isinstance(entries, dict):
        raise ParseError(_locate(text, "objectives"), "objectives must be an object or a list", path)
    objectives = []
    for key in entries:
        if not str(key).isdigit() or not 1 <= int(key) <= arena.n:
            raise ParseError(_locate(text, str(key)), f"objective for unknown player {key}", path)
    for i in range(1, arena.n + 1):
        if str(i) not in entries:
            raise ParseError(_locate(text, "objectives"), f"player {i} has no objective", path)
        try:
            o = _objective(entries[str(i)], i)
            check_states(o, arena)
        except ObjectiveError as exc:
            raise ParseError(_locate(text, str(i)), str(exc), path) from None
        objectives.append(o)
    return arena, objectives


def parse_game_file(path):
    """Read and validate a game file; returns ``(arena, objectives)``."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(None, exc.strerror or str(exc), str(path)) from None
    return parse_game(text, str(path))


def bundled_game(name: str = "fig1.game"):
    """Path to a game file shipped with the package."""
    return Path(__file__).with_name("data") / name


def objective_to_json(o) -> dict:
    if isinstance(o, Buchi):
        return {"type": "buchi", "states": sorted(o.states, key=str)}
    if isinstance(o, CoBuchi):
        return {"type": "cobuchi", "states": sorted(o.states, key=str)}
    if isinstance(o, Parity):
        return {"type": "parity", "colors": dict(o.colors)}
    if isinstance(o, (Streett, Rabin)):
        pairs = [[sorted(f, key=str), sorted(g, key=str)] for f, g in o.pairs]
        return {"type": "streett" if isinstance(o, Streett) else "rabin", "pairs": pairs}
    if isinstance(o, Muller):
        return {"type": "muller", "formula": format_formula(o.formula)}
    raise ObjectiveError(f"{type(o).__name__} objectives are not file-serializable")


def dump_game(arena: GameArena, objectives) -> str:
    doc = arena.to_dict()
    doc["objectives"] = {str(i): objective_to_json(o) for i, o in enumerate(objectives, start=1)}
    return json.dumps(doc, indent=2) + "\n"


def player_expression(text: str, objectives):
    """Objective expression over player objectives written ``p1 & !p2 | p3``."""
    try:
        f = parse_formula(text)
    except ObjectiveError as exc:
        raise ParseError(None, str(exc)) from None

    def build(g):
        if isinstance(g, Atom):
            name = str(g.state)
            if not (name[:1] in "pP" and name[1:].isdigit()):
                raise ParseError(None, f"expected p1..p{len(objectives)}, got {name!r}")
            k = int(name[1:])
            if not 1 <= k <= len(objectives):
                raise ParseError(None, f"no player {k}; players are 1..{len(objectives)}")
            return objectives[k - 1]
        if isinstance(g, Const):
            return And(()) if g.value else Or(())
        if isinstance(g, Neg):
            return Not(build(g.arg))
        if isinstance(g, Conj):
            return And(tuple(build(x) for x in g.args))
        return Or(tuple(build(x) for x in g.args))

    return build(f)


def dump_witness(profile: StrategyProfile, state=None) -> str:
    doc = {"state": state, "metadata": profile.metadata, "strategies": []}
    for st in profile.strategies:
        doc["strategies"].append({
            "player": st.player,
            "memory": list(st.memory),
            "initial": st.initial,
            "update": [[m, s, m2] for (m, s), m2 in st.transitions.items()],
            "move": [[m, s, t] for (m, s), t in st.moves.items()],
        })
    return json.dumps(doc, indent=1, default=str) + "\n"


def load_witness(text: str, arena: GameArena, path=None) -> StrategyProfile:
    try:
        doc = json.loads(text)
        strategies = []
        for entry in doc["strategies"]:
            memory = tuple(entry["memory"])
            known = set(memory)
            transitions = {}
            for m, s, m2 in entry["update"]:
                if m not in known or m2 not in known:
                    raise ParseError(None, f"update row mentions unknown memory {m!r}", path)
                transitions[(m, s)] = m2
            moves = {}
            for m, s, t in entry["move"]:
                if arena.idx(t) not in arena.succ[arena.idx(s)]:
                    raise ParseError(None, f"move ({s!r}, {t!r}) is not an edge", path)
                moves[(m, s)] = t
            strategies.append(MooreStrategy(entry["player"], memory, entry["initial"], transitions, moves))
        if len(strategies) != arena.n:
            raise ParseError(None, f"witness has {len(strategies)} strategies, arena has {arena.n} players", path)
        return StrategyProfile(tuple(strategies), doc.get("metadata") or {})
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg, path) from None
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(None, f"malformed witness: {exc}", path) from None
