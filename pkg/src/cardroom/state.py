"""Game state record, its canonical text codec, player views, and validation.

A state is an ordered key-value record (flow cache first, messages last).
The text form is one key per line under a version header; rendering is
byte-stable so equal states always serialize identically.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .script import GameSpec, Violation

STATE_HEADER = "#state v1"

# Canonical key order. flow_cache leads (it is the summary that makes a
# single previous state sufficient); messages trail.
STATE_KEYS = (
    "flow_cache", "deck", "hole", "community", "discards", "stacks",
    "street_bets", "pots", "current_actor", "to_act", "folded", "all_in",
    "button", "messages",
)

HIDDEN_CARD = "?"


class StateError(Exception):
    pass


class MalformedState(StateError):
    def __init__(self, detail: str, line: int = 0):
        super().__init__(f"malformed state on line {line}: {detail}")
        self.line = line


class UnknownKey(StateError):
    def __init__(self, name: str):
        super().__init__(f"unknown state key {name!r}")
        self.name = name


class UnknownPlayer(StateError):
    def __init__(self, player):
        super().__init__(f"unknown player {player!r}")


@dataclass(frozen=True)
class Pot:
    amount: int
    eligible: frozenset[int]


@dataclass(frozen=True)
class Message:
    source: str  # "engine" or a seat number as text
    target: str  # "all" or a seat number as text
    text: str

    def render(self) -> str:
        return f"{self.source}->{self.target}: {self.text}"

    @classmethod
    def parse(cls, raw: str) -> "Message":
        head, sep, text = raw.partition(": ")
        if not sep or "->" not in head:
            raise MalformedState(f"bad message {raw!r}")
        source, target = head.split("->", 1)
        return cls(source, target, text)

    @classmethod
    def to_all(cls, text: str) -> "Message":
        return cls("engine", "all", text)

    @classmethod
    def to_player(cls, player: int, text: str) -> "Message":
        return cls("engine", str(player), text)


@dataclass(frozen=True)
class PlayerInput:
    """One player action, or the no-input marker for automatic steps."""

    player: int | None
    action: str  # check|call|raise|fold|all_in|discard|none
    amount: int | None = None
    cards: tuple[str, ...] = ()

    def render(self) -> str:
        if self.action == "none":
            return "none"
        if self.action == "raise":
            detail = f"raise {self.amount}"
        elif self.action == "discard":
            detail = "discard" + ("" if not self.cards else " " + " ".join(self.cards))
        else:
            detail = self.action
        return f"player {self.player}: {detail}"

    @classmethod
    def parse(cls, text: str) -> "PlayerInput":
        text = text.strip()
        if text == "none":
            return NO_INPUT
        if not text.startswith("player "):
            raise MalformedState(f"bad player input {text!r}")
        head, sep, detail = text.partition(": ")
        if not sep:
            raise MalformedState(f"bad player input {text!r}")
        player = int(head[len("player "):])
        parts = detail.split()
        kind = parts[0]
        if kind == "raise":
            return cls(player, "raise", amount=int(parts[1]))
        if kind == "discard":
            return cls(player, "discard", cards=tuple(parts[1:]))
        if kind in ("check", "call", "fold", "all_in"):
            return cls(player, kind)
        raise MalformedState(f"bad action {kind!r}")


NO_INPUT = PlayerInput(None, "none")


@dataclass
class GameState:
    """One frame of the game. Treated as immutable: every transition builds
    a new state, never mutates in place."""

    flow_cache: list[str] = field(default_factory=list)
    deck: list[str] = field(default_factory=list)
    hole: dict[int, list[str]] = field(default_factory=dict)
    community: list[str] = field(default_factory=list)
    discards: dict[int, list[str]] = field(default_factory=dict)
    stacks: dict[int, int] = field(default_factory=dict)
    street_bets: dict[int, int] = field(default_factory=dict)
    pots: list[Pot] = field(default_factory=list)
    current_actor: int | None = None
    to_act: frozenset[int] = frozenset()
    folded: frozenset[int] = frozenset()
    all_in: frozenset[int] = frozenset()
    button: int = 1
    messages: list[Message] = field(default_factory=list)

    def players(self) -> list[int]:
        return sorted(self.stacks)

    def active(self) -> list[int]:
        """Non-folded players (all-in players included)."""
        return [p for p in self.players() if p not in self.folded]

    def finished(self) -> bool:
        return bool(self.flow_cache) and self.flow_cache[-1] == "prize"

    # -- tree form ----------------------------------------------------------
    # Diff scripts address the state as a tree of dicts/lists/scalars with
    # string keys; per-player maps key on the seat number as a string.

    def to_tree(self) -> dict:
        return {
            "flow_cache": list(self.flow_cache),
            "deck": list(self.deck),
            "hole": {str(p): list(cs) for p, cs in sorted(self.hole.items())},
            "community": list(self.community),
            "discards": {str(p): list(cs) for p, cs in sorted(self.discards.items())},
            "stacks": {str(p): n for p, n in sorted(self.stacks.items())},
            "street_bets": {str(p): n for p, n in sorted(self.street_bets.items())},
            "pots": [{"amount": pot.amount, "eligible": sorted(pot.eligible)}
                     for pot in self.pots],
            "current_actor": self.current_actor,
            "to_act": sorted(self.to_act),
            "folded": sorted(self.folded),
            "all_in": sorted(self.all_in),
            "button": self.button,
            "messages": [m.render() for m in self.messages],
        }

    @classmethod
    def from_tree(cls, tree: dict) -> "GameState":
        unknown = set(tree) - set(STATE_KEYS)
        if unknown:
            raise UnknownKey(sorted(unknown)[0])
        return cls(
            flow_cache=[str(t) for t in tree.get("flow_cache", [])],
            deck=[str(c) for c in tree.get("deck", [])],
            hole={int(p): [str(c) for c in cs] for p, cs in tree.get("hole", {}).items()},
            community=[str(c) for c in tree.get("community", [])],
            discards={int(p): [str(c) for c in cs] for p, cs in tree.get("discards", {}).items()},
            stacks={int(p): int(n) for p, n in tree.get("stacks", {}).items()},
            street_bets={int(p): int(n) for p, n in tree.get("street_bets", {}).items()},
            pots=[Pot(int(d["amount"]), frozenset(int(e) for e in d["eligible"]))
                  for d in tree.get("pots", [])],
            current_actor=tree.get("current_actor"),
            to_act=frozenset(int(p) for p in tree.get("to_act", [])),
            folded=frozenset(int(p) for p in tree.get("folded", [])),
            all_in=frozenset(int(p) for p in tree.get("all_in", [])),
            button=int(tree.get("button", 1)),
            messages=[Message.parse(m) for m in tree.get("messages", [])],
        )

    def __eq__(self, other):
        if not isinstance(other, GameState):
            return NotImplemented
        return self.to_tree() == other.to_tree()


def copy_tree(node):
    """Fast deep copy for the plain dict/list/scalar state tree."""
    if isinstance(node, dict):
        return {k: copy_tree(v) for k, v in node.items()}
    if isinstance(node, list):
        return [copy_tree(v) for v in node]
    return node


# ---------------------------------------------------------------------------
# Codec
# ---------------------------------------------------------------------------

def _render_cards(cards: list[str]) -> str:
    return " ".join(cards)


def _render_per_player_cards(mapping: dict[int, list[str]]) -> str:
    return " ".join(f"{p}:[{_render_cards(cs)}]" for p, cs in sorted(mapping.items()))


def _render_per_player_ints(mapping: dict[int, int]) -> str:
    return " ".join(f"{p}:{n}" for p, n in sorted(mapping.items()))


def _render_id_set(ids) -> str:
    return "{" + " ".join(str(p) for p in sorted(ids)) + "}"


def serialize_state(state: GameState) -> str:
    """Canonical text: header line, then one key per line in STATE_KEYS order."""
    actor = "-" if state.current_actor is None else str(state.current_actor)
    values = {
        "flow_cache": "; ".join(state.flow_cache),
        "deck": _render_cards(state.deck),
        "hole": _render_per_player_cards(state.hole),
        "community": _render_cards(state.community),
        "discards": _render_per_player_cards(state.discards),
        "stacks": _render_per_player_ints(state.stacks),
        "street_bets": _render_per_player_ints(state.street_bets),
        "pots": "; ".join(f"{pot.amount}@{_render_id_set(pot.eligible)}" for pot in state.pots),
        "current_actor": actor,
        "to_act": _render_id_set(state.to_act),
        "folded": _render_id_set(state.folded),
        "all_in": _render_id_set(state.all_in),
        "button": str(state.button),
        "messages": "; ".join(m.render() for m in state.messages),
    }
    lines = [STATE_HEADER]
    for key in STATE_KEYS:
        content = values[key]
        lines.append(f"{key}: {content}" if content else f"{key}:")
    return "\n".join(lines) + "\n"


def _parse_cards(content: str) -> list[str]:
    return content.split()


def _parse_per_player_cards(content: str, line: int) -> dict[int, list[str]]:
    out: dict[int, list[str]] = {}
    for chunk in _split_player_chunks(content, line):
        head, _, inner = chunk.partition(":[")
        if not chunk.endswith("]") or not head.isdigit():
            raise MalformedState(f"bad per-player cards {chunk!r}", line)
        out[int(head)] = _parse_cards(inner[:-1])
    return out


def _split_player_chunks(content: str, line: int) -> list[str]:
    # chunks look like "1:[H2 H3]" separated by single spaces
    chunks, depth, cur = [], 0, []
    for ch in content:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == " " and depth == 0:
            if cur:
                chunks.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if cur:
        chunks.append("".join(cur))
    if depth != 0:
        raise MalformedState("unbalanced brackets", line)
    return chunks


def _parse_per_player_ints(content: str, line: int) -> dict[int, int]:
    out: dict[int, int] = {}
    for chunk in content.split():
        head, sep, num = chunk.partition(":")
        if not sep or not head.isdigit():
            raise MalformedState(f"bad per-player value {chunk!r}", line)
        try:
            out[int(head)] = int(num)
        except ValueError:
            raise MalformedState(f"bad integer {num!r}", line) from None
    return out


def _parse_id_set(content: str, line: int) -> frozenset[int]:
    content = content.strip()
    if not (content.startswith("{") and content.endswith("}")):
        raise MalformedState(f"bad id set {content!r}", line)
    inner = content[1:-1].split()
    try:
        return frozenset(int(p) for p in inner)
    except ValueError:
        raise MalformedState(f"bad id set {content!r}", line) from None


def parse_state(text: str) -> GameState:
    """Inverse of serialize_state. Raises MalformedState/UnknownKey."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != STATE_HEADER:
        raise MalformedState("missing state header", 1)
    seen: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        key, sep, content = raw.partition(":")
        if not sep:
            raise MalformedState(f"expected 'key: value', got {raw!r}", lineno)
        key = key.strip()
        if key not in STATE_KEYS:
            raise UnknownKey(key)
        if key in seen:
            raise MalformedState(f"duplicate key {key!r}", lineno)
        seen[key] = (content.strip(), lineno)
    missing = [k for k in STATE_KEYS if k not in seen]
    if missing:
        raise MalformedState(f"missing keys: {', '.join(missing)}", len(lines))

    def content(key: str) -> str:
        return seen[key][0]

    def lineno(key: str) -> int:
        return seen[key][1]

    actor_raw = content("current_actor")
    if actor_raw == "-":
        actor = None
    elif actor_raw.isdigit():
        actor = int(actor_raw)
    else:
        raise MalformedState(f"bad actor {actor_raw!r}", lineno("current_actor"))

    pots = []
    if content("pots"):
        for chunk in content("pots").split("; "):
            amount_raw, sep, elig_raw = chunk.partition("@")
            if not sep or not amount_raw.isdigit():
                raise MalformedState(f"bad pot {chunk!r}", lineno("pots"))
            pots.append(Pot(int(amount_raw), _parse_id_set(elig_raw, lineno("pots"))))

    if not content("button").isdigit():
        raise MalformedState(f"bad button {content('button')!r}", lineno("button"))

    messages = []
    if content("messages"):
        for raw_msg in content("messages").split("; "):
            messages.append(Message.parse(raw_msg))

    return GameState(
        flow_cache=[t.strip() for t in content("flow_cache").split(";") if t.strip()],
        deck=_parse_cards(content("deck")),
        hole=_parse_per_player_cards(content("hole"), lineno("hole")),
        community=_parse_cards(content("community")),
        discards=_parse_per_player_cards(content("discards"), lineno("discards")),
        stacks=_parse_per_player_ints(content("stacks"), lineno("stacks")),
        street_bets=_parse_per_player_ints(content("street_bets"), lineno("street_bets")),
        pots=pots,
        current_actor=actor,
        to_act=_parse_id_set(content("to_act"), lineno("to_act")),
        folded=_parse_id_set(content("folded"), lineno("folded")),
        all_in=_parse_id_set(content("all_in"), lineno("all_in")),
        button=int(content("button")),
        messages=messages,
    )


# ---------------------------------------------------------------------------
# Player views
# ---------------------------------------------------------------------------

def view_for_player(state: GameState, player: int) -> GameState:
    """Redact a state down to what one seat may see.

    The deck is hidden entirely; other players' hole cards and discards are
    replaced by per-card placeholders; messages are filtered to this seat.
    """
    if player not in state.stacks:
        raise UnknownPlayer(player)

    def redact(mapping: dict[int, list[str]]) -> dict[int, list[str]]:
        return {p: (list(cs) if p == player else [HIDDEN_CARD] * len(cs))
                for p, cs in mapping.items()}

    return GameState(
        flow_cache=list(state.flow_cache),
        deck=[],
        hole=redact(state.hole),
        community=list(state.community),
        discards=redact(state.discards),
        stacks=dict(state.stacks),
        street_bets=dict(state.street_bets),
        pots=list(state.pots),
        current_actor=state.current_actor,
        to_act=state.to_act,
        folded=state.folded,
        all_in=state.all_in,
        button=state.button,
        messages=[m for m in state.messages if m.target in ("all", str(player))],
    )


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_state(spec: GameSpec, state: GameState) -> list[Violation]:
    """Report every violated state invariant (empty list = ok)."""
    v: list[Violation] = []
    players = set(spec.seats())

    if set(state.stacks) != players:
        v.append(Violation("PlayerSet", "stacks must cover exactly the spec's seats"))
    for mapping, name in ((state.hole, "hole"), (state.discards, "discards"),
                          (state.street_bets, "street_bets")):
        if set(mapping) - players:
            v.append(Violation("PlayerSet", f"{name} mentions unknown players"))

    # Card conservation: deck + holes + community + discards must equal the
    # full deck as a multiset, at every state.
    held = Counter(state.deck) + Counter(state.community)
    for cs in state.hole.values():
        held.update(cs)
    for cs in state.discards.values():
        held.update(cs)
    expected = Counter(spec.deck_tokens())
    if held != expected:
        extra = held - expected
        missing = expected - held
        detail = []
        if extra:
            detail.append("extra " + " ".join(sorted(extra.elements())))
        if missing:
            detail.append("missing " + " ".join(sorted(missing.elements())))
        v.append(Violation("CardConservation", "; ".join(detail)))

    for p, n in state.stacks.items():
        if n < 0:
            v.append(Violation("NegativeChips", f"stack of player {p} is {n}"))
    for p, n in state.street_bets.items():
        if n < 0:
            v.append(Violation("NegativeChips", f"street bet of player {p} is {n}"))

    # Chip conservation: stacks + live street bets + pots never change.
    total = (sum(state.stacks.values()) + sum(state.street_bets.values())
             + sum(pot.amount for pot in state.pots))
    expected_total = spec.starting_stack * spec.num_players
    if total != expected_total:
        v.append(Violation("ChipConservation", f"total {total} != {expected_total}"))

    for i, pot in enumerate(state.pots):
        if pot.amount < 0:
            v.append(Violation("BadPot", f"pot {i} amount {pot.amount}"))
        if not pot.eligible:
            v.append(Violation("BadPot", f"pot {i} has no eligible players"))
        if pot.eligible - players:
            v.append(Violation("BadPot", f"pot {i} eligibility outside player set"))

    if state.current_actor is not None:
        if state.current_actor not in players:
            v.append(Violation("BadActor", f"actor {state.current_actor} not seated"))
        if state.current_actor in state.folded or state.current_actor in state.all_in:
            v.append(Violation("BadActor", "actor is folded or all-in"))
    if state.folded & state.all_in:
        v.append(Violation("BadActor", "player both folded and all-in"))
    if state.button not in players:
        v.append(Violation("BadButton", f"button {state.button} not seated"))

    for m in state.messages:
        if m.target != "all" and (not m.target.isdigit() or int(m.target) not in players):
            v.append(Violation("BadMessage", f"message target {m.target!r} unknown"))

    return v
