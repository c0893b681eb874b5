"""Differential state language: edit ops plus core-function calls.

A diff script transforms one game state into the next. Ops are applied in
order to a working copy of the state tree; ``call`` ops run predefined core
functions (shuffle, deal, ...) whose randomness, if any, arrives as an
explicit seed argument, so every script replays deterministically.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .script import GameSpec
from .state import STATE_KEYS, GameState, Message, copy_tree

DIFF_HEADER = "#diff v1"


class DiffError(Exception):
    pass


class MalformedOp(DiffError):
    def __init__(self, detail: str, line: int = 0):
        super().__init__(f"malformed op on line {line}: {detail}")
        self.line = line


class UnknownCoreFn(DiffError):
    def __init__(self, name: str):
        super().__init__(f"unknown core function {name!r}")
        self.name = name


class ArityMismatch(DiffError):
    def __init__(self, name: str, detail: str):
        super().__init__(f"bad arguments for {name!r}: {detail}")


class IllegalState(DiffError):
    pass


class BadPath(DiffError):
    def __init__(self, path: str, index: int):
        super().__init__(f"op {index}: path {path!r} does not resolve")
        self.index = index


class CoreFnFailure(DiffError):
    def __init__(self, name: str, reason: str):
        super().__init__(f"core function {name!r} failed: {reason}")
        self.name = name
        self.reason = reason


class SchemaMismatch(DiffError):
    pass


# ---------------------------------------------------------------------------
# Ops
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SetOp:
    path: str
    value: object


@dataclass(frozen=True)
class RemoveOp:
    path: str


@dataclass(frozen=True)
class AppendOp:
    path: str
    value: object


@dataclass(frozen=True)
class MoveOp:
    src: str
    count: int
    dst: str


@dataclass(frozen=True)
class CallOp:
    name: str
    args: tuple[tuple[str, object], ...] = ()

    def arg_dict(self) -> dict:
        return dict(self.args)


EditOp = (SetOp, RemoveOp, AppendOp, MoveOp, CallOp)


@dataclass(frozen=True)
class DiffScript:
    ops: tuple = ()

    def __len__(self) -> int:
        return len(self.ops)


# ---------------------------------------------------------------------------
# Text form
# ---------------------------------------------------------------------------

def _dump(value) -> str:
    return json.dumps(value, separators=(",", ":"), sort_keys=True)


def render_diff(diff: DiffScript) -> str:
    lines = [DIFF_HEADER]
    for op in diff.ops:
        if isinstance(op, SetOp):
            lines.append(f"set {op.path} {_dump(op.value)}")
        elif isinstance(op, RemoveOp):
            lines.append(f"remove {op.path}")
        elif isinstance(op, AppendOp):
            lines.append(f"append {op.path} {_dump(op.value)}")
        elif isinstance(op, MoveOp):
            lines.append(f"move {op.src} {op.count} {op.dst}")
        elif isinstance(op, CallOp):
            args = " ".join(f"{k}={_dump(v)}" for k, v in sorted(op.args))
            lines.append(f"call {op.name}" + (f" {args}" if args else ""))
        else:
            raise TypeError(f"not an op: {op!r}")
    return "\n".join(lines) + "\n"


def parse_diff(text: str) -> DiffScript:
    ops = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line == DIFF_HEADER or line.startswith("#"):
            continue
        kind, _, rest = line.partition(" ")
        if kind in ("set", "append"):
            path, sep, payload = rest.partition(" ")
            if not sep:
                raise MalformedOp(f"{kind} needs a path and a value", lineno)
            try:
                value = json.loads(payload)
            except json.JSONDecodeError as e:
                raise MalformedOp(f"bad value {payload!r}: {e.msg}", lineno) from None
            ops.append(SetOp(path, value) if kind == "set" else AppendOp(path, value))
        elif kind == "remove":
            if not rest or " " in rest:
                raise MalformedOp("remove takes exactly one path", lineno)
            ops.append(RemoveOp(rest))
        elif kind == "move":
            parts = rest.split()
            if len(parts) != 3 or not parts[1].isdigit():
                raise MalformedOp("move takes src, count, dst", lineno)
            ops.append(MoveOp(parts[0], int(parts[1]), parts[2]))
        elif kind == "call":
            parts = rest.split()
            if not parts:
                raise MalformedOp("call needs a function name", lineno)
            name = parts[0]
            if name not in REGISTRY:
                raise UnknownCoreFn(name)
            args = []
            for tok in parts[1:]:
                key, sep, payload = tok.partition("=")
                if not sep:
                    raise MalformedOp(f"bad call argument {tok!r}", lineno)
                try:
                    args.append((key, json.loads(payload)))
                except json.JSONDecodeError as e:
                    raise MalformedOp(f"bad value {payload!r}: {e.msg}", lineno) from None
            ops.append(CallOp(name, tuple(sorted(args))))
        else:
            raise MalformedOp(f"unknown op {kind!r}", lineno)
    return DiffScript(tuple(ops))


# ---------------------------------------------------------------------------
# Core functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoreFunction:
    name: str
    signature: str
    doc: str
    fn: object = field(repr=False)
    needs_spec: bool = False


def _players(tree: dict) -> list[int]:
    return sorted(int(p) for p in tree["stacks"])


def _rotated(players: list[int], start_after: int) -> list[int]:
    """Players in clockwise order starting with the seat after ``start_after``."""
    ordered = sorted(players)
    if not ordered:
        return []
    idx = 0
    for i, p in enumerate(ordered):
        if p > start_after:
            idx = i
            break
    else:
        idx = 0
    return ordered[idx:] + ordered[:idx]


def _core_shuffle(tree: dict, spec, *, seed: int) -> None:
    random.Random(seed).shuffle(tree["deck"])


def _core_deal(tree: dict, spec, *, n: int, to: str = "all") -> None:
    folded = set(tree["folded"])
    recipients = [p for p in _rotated(_players(tree), tree["button"]) if p not in folded]
    deck = tree["deck"]
    if len(deck) < n * len(recipients):
        raise IllegalState(f"cannot deal {n} cards each to {len(recipients)} players "
                           f"from {len(deck)} remaining")
    for _ in range(n):
        for p in recipients:
            tree["hole"][str(p)].append(deck.pop(0))


def _core_flop(tree: dict, spec, *, n: int) -> None:
    deck = tree["deck"]
    if len(deck) < n:
        raise IllegalState(f"cannot flop {n} cards from {len(deck)} remaining")
    for _ in range(n):
        tree["community"].append(deck.pop(0))


def _core_sort_hand(tree: dict, spec: GameSpec, *, player: int) -> None:
    hole = tree["hole"].get(str(player))
    if hole is None:
        raise IllegalState(f"player {player} has no hand")
    suits = {s: i for i, s in enumerate(spec.suit_spec.suits)}
    values = {v: i for i, v in enumerate(spec.value_spec.ordered)}

    def key(token: str):
        if token[:1] in suits and token[1:] in values:
            return (0, suits[token[:1]], values[token[1:]], token)
        return (1, 0, 0, token)

    hole.sort(key=key)


def _core_rank_hands(tree: dict, spec: GameSpec, *, strategy: int) -> None:
    from .hands import best_hand  # deferred: hands sits above the state layer

    if not (0 <= strategy < len(spec.strategies)):
        raise IllegalState(f"no strategy {strategy}")
    strat = spec.strategies[strategy]
    label = strat.direction if len(spec.strategies) == 1 else f"{strat.direction}#{strategy}"
    folded = set(tree["folded"])
    for p in _players(tree):
        if p in folded:
            continue
        hole = tree["hole"][str(p)]
        ranked = best_hand(hole, tree["community"], strat, spec)
        shown = " ".join(hole)
        text = f"seat {p} shows {shown}: {ranked.combination.name} [{label}]"
        tree["messages"].append(Message.to_all(text).render())


def layered_pots(contributions: dict[int, int], all_in, folded) -> list[tuple[int, set[int]]]:
    """Split street contributions into pot layers.

    Layers rise through each all-in contributor's level; eligibility of a
    layer is every non-folded player who covered it. Folded money sinks into
    the layers it covers without eligibility.
    """
    positive = {p: c for p, c in contributions.items() if c > 0}
    if not positive:
        return []
    levels = sorted({c for p, c in positive.items() if p in all_in})
    top = max(positive.values())
    if top not in levels:
        levels.append(top)
        levels.sort()
    pots: list[tuple[int, set[int]]] = []
    prev = 0
    for level in levels:
        amount = sum(min(c, level) - min(c, prev) for c in positive.values())
        eligible = {p for p, c in positive.items() if c >= level and p not in folded}
        if amount > 0:
            if eligible:
                pots.append((amount, eligible))
            elif pots:
                # orphaned folded money: sink into the previous layer
                pots[-1] = (pots[-1][0] + amount, pots[-1][1])
            else:
                pots.append((amount, {p for p in positive if p not in folded} or set(positive)))
        prev = level
    return pots


def _core_collect_bets(tree: dict, spec) -> None:
    contributions = {int(p): n for p, n in tree["street_bets"].items()}
    layers = layered_pots(contributions, set(tree["all_in"]), set(tree["folded"]))
    pots = tree["pots"]
    for amount, eligible in layers:
        elig_sorted = sorted(eligible)
        for pot in reversed(pots):
            if pot["eligible"] == elig_sorted:
                pot["amount"] += amount
                break
        else:
            pots.append({"amount": amount, "eligible": elig_sorted})
    for p in tree["street_bets"]:
        tree["street_bets"][p] = 0


def _core_next_actor(tree: dict, spec, *, kind: str = "bet") -> None:
    to_act = set(tree["to_act"])
    if not to_act:
        tree["current_actor"] = None
        return
    anchor = tree["current_actor"] if tree["current_actor"] is not None else tree["button"]
    nxt = _rotated(sorted(to_act), anchor)[0]
    tree["current_actor"] = nxt
    if kind == "bet":
        text = "your turn to bet"
    else:
        text = "your turn to switch cards"
    tree["messages"].append(Message.to_player(nxt, text).render())


REGISTRY: dict[str, CoreFunction] = {}


def _register(name, signature, doc, fn, needs_spec=False):
    REGISTRY[name] = CoreFunction(name, signature, doc, fn, needs_spec)


_register("shuffle", "shuffle(seed: int)",
          "Rearrange the remaining deck by the seeded uniform permutation; the card multiset is unchanged.",
          _core_shuffle)
_register("deal", "deal(n: int, to: str = 'all')",
          "Deal n cards from the top of the deck to each non-folded player, one by one, clockwise from the button.",
          _core_deal)
_register("flop", "flop(n: int)",
          "Move n cards from the top of the deck onto the community board in order.",
          _core_flop)
_register("sort_hand", "sort_hand(player: int)",
          "Sort one player's hole cards by suit then value in the game's declared order.",
          _core_sort_hand, needs_spec=True)
_register("rank_hands", "rank_hands(strategy: int)",
          "Compute every live player's best hand under one ranking strategy and announce the showdown results.",
          _core_rank_hands, needs_spec=True)
_register("collect_bets", "collect_bets()",
          "Sweep this street's bets into the pots, layering side pots at each all-in level, then zero the street bets.",
          _core_collect_bets)
_register("next_actor", "next_actor(kind: str = 'bet')",
          "Advance the turn to the next player still to act, clockwise, and tell them to act.",
          _core_next_actor)

_CORE_PARAMS = {
    "shuffle": ({"seed"}, set()),
    "deal": ({"n"}, {"to"}),
    "flop": ({"n"}, set()),
    "sort_hand": ({"player"}, set()),
    "rank_hands": ({"strategy"}, set()),
    "collect_bets": (set(), set()),
    "next_actor": (set(), {"kind"}),
}


def registry_manifest() -> list[dict]:
    """Stable listing of the shipped core functions."""
    return [{"name": cf.name, "signature": cf.signature, "doc": cf.doc}
            for cf in sorted(REGISTRY.values(), key=lambda c: c.name)]


def _check_args(name: str, args: dict) -> None:
    required, optional = _CORE_PARAMS[name]
    missing = required - set(args)
    extra = set(args) - required - optional
    if missing:
        raise ArityMismatch(name, f"missing {sorted(missing)}")
    if extra:
        raise ArityMismatch(name, f"unexpected {sorted(extra)}")


def invoke_core(name: str, args: dict, state: GameState, spec: GameSpec | None = None) -> GameState:
    """Run one core function against a state, returning the new state."""
    cf = REGISTRY.get(name)
    if cf is None:
        raise UnknownCoreFn(name)
    _check_args(name, args)
    if cf.needs_spec and spec is None:
        raise CoreFnFailure(name, "this core function needs the game spec")
    tree = state.to_tree()
    cf.fn(tree, spec, **args)
    return GameState.from_tree(tree)


# ---------------------------------------------------------------------------
# Merge
# ---------------------------------------------------------------------------

def _walk(tree, path: str, index: int):
    parts = path.split("/")
    node = tree
    for part in parts[:-1]:
        node = _child(node, part, path, index)
    return node, parts[-1]


def _child(node, part: str, path: str, index: int):
    try:
        if isinstance(node, list):
            return node[int(part)]
        return node[part]
    except (KeyError, IndexError, ValueError, TypeError):
        raise BadPath(path, index) from None


def _apply_op(tree: dict, op, index: int, spec: GameSpec | None) -> None:
    if isinstance(op, CallOp):
        cf = REGISTRY.get(op.name)
        if cf is None:
            raise UnknownCoreFn(op.name)
        args = op.arg_dict()
        _check_args(op.name, args)
        if cf.needs_spec and spec is None:
            raise CoreFnFailure(op.name, "this core function needs the game spec")
        try:
            cf.fn(tree, spec, **args)
        except DiffError as e:
            raise CoreFnFailure(op.name, str(e)) from None
        return
    if isinstance(op, SetOp):
        node, last = _walk(tree, op.path, index)
        if isinstance(node, list):
            try:
                node[int(last)] = copy_tree(op.value)
            except (IndexError, ValueError):
                raise BadPath(op.path, index) from None
        elif isinstance(node, dict):
            node[last] = copy_tree(op.value)
        else:
            raise BadPath(op.path, index)
        return
    if isinstance(op, RemoveOp):
        node, last = _walk(tree, op.path, index)
        try:
            if isinstance(node, list):
                del node[int(last)]
            else:
                del node[last]
        except (KeyError, IndexError, ValueError, TypeError):
            raise BadPath(op.path, index) from None
        return
    if isinstance(op, AppendOp):
        node, last = _walk(tree, op.path, index)
        target = _child(node, last, op.path, index)
        if not isinstance(target, list):
            raise BadPath(op.path, index)
        target.append(copy_tree(op.value))
        return
    if isinstance(op, MoveOp):
        snode, slast = _walk(tree, op.src, index)
        dnode, dlast = _walk(tree, op.dst, index)
        src = _child(snode, slast, op.src, index)
        dst = _child(dnode, dlast, op.dst, index)
        if not isinstance(src, list) or not isinstance(dst, list) or len(src) < op.count:
            raise BadPath(op.src, index)
        for _ in range(op.count):
            dst.append(src.pop(0))
        return
    raise MalformedOp(f"unknown op object {op!r}")


def merge(prev: GameState, diff: DiffScript, spec: GameSpec | None = None) -> GameState:
    """Apply a diff to a state: the next state is the merge of the two."""
    tree = prev.to_tree()
    for i, op in enumerate(diff.ops):
        _apply_op(tree, op, i, spec)
    return GameState.from_tree(tree)


# ---------------------------------------------------------------------------
# Diff computation
# ---------------------------------------------------------------------------

def _list_ops(path: str, a: list, b: list) -> list:
    if len(b) > len(a) and b[: len(a)] == a:
        return [AppendOp(path, v) for v in b[len(a):]]
    return [SetOp(path, b)]


def compute_diff(prev: GameState, next_state: GameState) -> DiffScript:
    """Minimal per-key edit script with merge(prev, result) == next."""
    ta, tb = prev.to_tree(), next_state.to_tree()
    if set(ta) != set(tb):
        raise SchemaMismatch("states do not share the record schema")
    ops = []
    for key in STATE_KEYS:
        a, b = ta[key], tb[key]
        if a == b:
            continue
        if isinstance(a, dict) and isinstance(b, dict):
            for ck in sorted(set(a) | set(b), key=lambda s: (len(s), s)):
                path = f"{key}/{ck}"
                if ck not in b:
                    ops.append(RemoveOp(path))
                elif ck not in a:
                    ops.append(SetOp(path, b[ck]))
                elif a[ck] != b[ck]:
                    if isinstance(a[ck], list) and isinstance(b[ck], list):
                        ops.extend(_list_ops(path, a[ck], b[ck]))
                    else:
                        ops.append(SetOp(path, b[ck]))
        elif isinstance(a, list) and isinstance(b, list):
            ops.extend(_list_ops(key, a, b))
        else:
            ops.append(SetOp(key, b))
    return DiffScript(tuple(ops))


# ---------------------------------------------------------------------------
# Snippet equivalence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    reason: str | None = None


def equivalent(pred_text: str, gold_text: str, prev: GameState,
               spec: GameSpec | None = None) -> EquivalenceResult:
    """Decide whether a predicted diff snippet matches the gold one.

    Exact text match short-circuits; otherwise both snippets execute on the
    input state and the resulting states are compared structurally. A
    prediction that fails to parse or execute is simply not equivalent.
    """
    if pred_text.strip() == gold_text.strip():
        return EquivalenceResult(True)
    gold = parse_diff(gold_text)  # gold must parse; let errors propagate
    try:
        pred = parse_diff(pred_text)
    except DiffError as e:
        return EquivalenceResult(False, f"parse_error: {e}")
    gold_state = merge(prev, gold, spec)
    try:
        pred_state = merge(prev, pred, spec)
    except DiffError as e:
        return EquivalenceResult(False, f"execution_error: {e}")
    if pred_state == gold_state:
        return EquivalenceResult(True)
    ga, gb = pred_state.to_tree(), gold_state.to_tree()
    for key in STATE_KEYS:
        if ga[key] != gb[key]:
            return EquivalenceResult(False, f"state_mismatch at {key}")
    return EquivalenceResult(False, "state_mismatch")
