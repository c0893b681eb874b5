"""Game script grammar: the text format that defines a poker variant.

A script is a line-oriented block of labeled sections (players, bet limits,
suits, values, specials, one or more ranking strategies with their card
combinations, and the ordered game flow). ``parse_script`` turns script text
into a validated :class:`GameSpec`; ``render_script`` is its byte-stable
inverse.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

FLOW_KINDS = ("start", "blind", "shuffle", "deal", "bet", "flop", "switch", "show", "prize")

DEFAULT_STARTING_STACK = 100
DEFAULT_BLINDS = (1, 2)


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class ScriptError(Exception):
    """Base class for script parsing/validation failures. Carries a line number."""

    def __init__(self, message: str, line: int = 0):
        super().__init__(message)
        self.line = line


class MissingSection(ScriptError):
    def __init__(self, name: str):
        super().__init__(f"missing required section: {name}", 0)
        self.name = name


class UnknownSymbol(ScriptError):
    def __init__(self, token: str, line: int):
        super().__init__(f"unknown symbol {token!r} on line {line}", line)
        self.token = token


class MalformedFlow(ScriptError):
    def __init__(self, detail: str, line: int):
        super().__init__(f"malformed flow on line {line}: {detail}", line)


class MalformedScript(ScriptError):
    def __init__(self, detail: str, line: int):
        super().__init__(f"malformed script on line {line}: {detail}", line)


# ---------------------------------------------------------------------------
# Matcher atoms
# ---------------------------------------------------------------------------
#
# A combination is a conjunction of atoms. Sized atoms (SameValue, SameSuit,
# ConsecutiveValues, DistinctSuits, DistinctValues) must be satisfied by one
# shared witness subset of the hand; ValueIn constrains every witness card;
# CountSpecial counts a special symbol over the whole hand. DisjointGroups
# requires several witness groups on pairwise disjoint cards.

@dataclass(frozen=True)
class SameValue:
    k: int


@dataclass(frozen=True)
class ConsecutiveValues:
    k: int


@dataclass(frozen=True)
class SameSuit:
    k: int


@dataclass(frozen=True)
class DistinctSuits:
    k: int


@dataclass(frozen=True)
class DistinctValues:
    k: int


@dataclass(frozen=True)
class ValueIn:
    values: tuple[str, ...]


@dataclass(frozen=True)
class CountSpecial:
    symbol: str
    lo: int
    hi: int


@dataclass(frozen=True)
class DisjointGroups:
    groups: tuple[tuple, ...]  # each group: tuple of atoms sharing one witness


Atom = (SameValue, ConsecutiveValues, SameSuit, DistinctSuits, DistinctValues,
        ValueIn, CountSpecial, DisjointGroups)


# ---------------------------------------------------------------------------
# Spec types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValueSpec:
    """Ordered card values, lowest first. ``wheel`` lets the single highest
    value also act as one-below-the-lowest in consecutive runs (ace wheel)."""

    ordered: tuple[str, ...]
    wheel: bool = False

    def rank(self, value: str) -> int:
        return self.ordered.index(value)


@dataclass(frozen=True)
class SuitSpec:
    """Suit symbols plus an ordered partition into rank classes (later class
    outranks earlier). Most games use a single class: suits unranked."""

    suits: tuple[str, ...]
    rank_classes: tuple[tuple[str, ...], ...]

    def class_of(self, suit: str) -> int:
        for i, cls in enumerate(self.rank_classes):
            if suit in cls:
                return i
        raise KeyError(suit)


@dataclass(frozen=True)
class SpecialCardSpec:
    symbol: str
    count: int
    kind: str  # "wild" (any suit/value) or "null" (no suit/value)


@dataclass(frozen=True)
class CombinationDef:
    name: str
    rank_index: int
    atoms: tuple  # conjunction; empty tuple = catch-all
    tiebreak: str = "auto"  # "auto" (group values, then kickers) or "values"

    @property
    def is_catch_all(self) -> bool:
        return not self.atoms


@dataclass(frozen=True)
class RankingStrategy:
    direction: str  # "high" or "low"
    hand_size: int
    hole_exact: int | None  # None = any mix of hole/community
    combinations: tuple[CombinationDef, ...]
    low_convention: str = "none"  # none | ace_to_five | deuce_to_seven | badugi_style

    def catch_all(self) -> CombinationDef:
        for c in self.combinations:
            if c.is_catch_all:
                return c
        raise ValueError("strategy has no catch-all combination")


@dataclass(frozen=True)
class FlowStep:
    kind: str
    n: int | None = None  # deal/flop count, or switch max discards

    def token(self) -> str:
        return self.kind if self.n is None else f"{self.kind} {self.n}"


@dataclass(frozen=True)
class GameSpec:
    name: str
    num_players: int
    min_bet: int
    max_bet: int
    value_spec: ValueSpec
    suit_spec: SuitSpec
    specials: tuple[SpecialCardSpec, ...]
    strategies: tuple[RankingStrategy, ...]
    flow: tuple[FlowStep, ...]
    starting_stack: int = DEFAULT_STARTING_STACK
    small_blind: int = DEFAULT_BLINDS[0]
    big_blind: int = DEFAULT_BLINDS[1]

    def deck_tokens(self) -> list[str]:
        """Full deck in canonical order: suits in declared order, values
        ascending, then specials."""
        deck = [s + v for s in self.suit_spec.suits for v in self.value_spec.ordered]
        for sp in self.specials:
            deck.extend([sp.symbol] * sp.count)
        return deck

    def special_symbols(self) -> dict[str, SpecialCardSpec]:
        return {sp.symbol: sp for sp in self.specials}

    def seats(self) -> list[int]:
        return list(range(1, self.num_players + 1))


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str


# ---------------------------------------------------------------------------
# Card tokens
# ---------------------------------------------------------------------------

def split_card(token: str, spec: GameSpec) -> tuple[str | None, str | None, str | None]:
    """Split a card token into (suit, value, special_symbol).

    Specials match by exact symbol; anything else must be a declared suit
    letter followed by a declared value.
    """
    if token in spec.special_symbols():
        return None, None, token
    suit, value = token[:1], token[1:]
    if suit not in spec.suit_spec.suits or value not in spec.value_spec.ordered:
        raise ValueError(f"card token {token!r} not in this game's deck")
    return suit, value, None


def parse_flow_token(token: str, line: int = 0) -> FlowStep:
    parts = token.split()
    if not parts or parts[0] not in FLOW_KINDS:
        raise MalformedFlow(f"unknown step {token!r}", line)
    kind = parts[0]
    if kind in ("deal", "flop", "switch"):
        if len(parts) != 2 or not parts[1].isdigit():
            raise MalformedFlow(f"step {kind!r} needs an integer parameter", line)
        n = int(parts[1])
        if kind in ("deal", "flop") and n < 1:
            raise MalformedFlow(f"step {kind!r} parameter must be >= 1", line)
        return FlowStep(kind, n)
    if len(parts) != 1:
        raise MalformedFlow(f"step {kind!r} takes no parameter", line)
    return FlowStep(kind)


# ---------------------------------------------------------------------------
# Match expression grammar
# ---------------------------------------------------------------------------
#
#   expr   := 'any' | term ('&' term)*
#   term   := atom | 'groups(' group (';' group)* ')'
#   group  := atom ('+' atom)*
#   atom   := value(K) | consec(K) | suit(K) | dsuit(K) | dvalue(K)
#           | in(V1,V2,...) | special(SYM,K) | special(SYM,LO..HI)
#
# Expressions contain no whitespace.

_ATOM_RE = re.compile(r"^(value|consec|suit|dsuit|dvalue|in|special)\((.*)\)$")


def _parse_atom(text: str, line: int):
    m = _ATOM_RE.match(text)
    if not m:
        raise UnknownSymbol(text, line)
    kind, args = m.group(1), m.group(2)
    if kind == "in":
        vals = tuple(v for v in args.split(",") if v)
        if not vals:
            raise UnknownSymbol(text, line)
        return ValueIn(vals)
    if kind == "special":
        parts = args.split(",")
        if len(parts) != 2:
            raise UnknownSymbol(text, line)
        sym, count = parts
        if ".." in count:
            lo, hi = count.split("..", 1)
            if not (lo.isdigit() and hi.isdigit()):
                raise UnknownSymbol(text, line)
            return CountSpecial(sym, int(lo), int(hi))
        if not count.isdigit():
            raise UnknownSymbol(text, line)
        return CountSpecial(sym, int(count), int(count))
    if not args.isdigit():
        raise UnknownSymbol(text, line)
    k = int(args)
    cls = {"value": SameValue, "consec": ConsecutiveValues, "suit": SameSuit,
           "dsuit": DistinctSuits, "dvalue": DistinctValues}[kind]
    return cls(k)


def _split_top(text: str, sep: str) -> list[str]:
    """Split on ``sep`` outside parentheses."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def parse_match_expr(text: str, line: int = 0) -> tuple:
    if text == "any":
        return ()
    atoms = []
    for term in _split_top(text, "&"):
        if term.startswith("groups(") and term.endswith(")"):
            inner = term[len("groups("):-1]
            groups = []
            for grp in _split_top(inner, ";"):
                groups.append(tuple(_parse_atom(a, line) for a in _split_top(grp, "+")))
            atoms.append(DisjointGroups(tuple(groups)))
        else:
            atoms.append(_parse_atom(term, line))
    return tuple(atoms)


def _render_atom(atom) -> str:
    if isinstance(atom, SameValue):
        return f"value({atom.k})"
    if isinstance(atom, ConsecutiveValues):
        return f"consec({atom.k})"
    if isinstance(atom, SameSuit):
        return f"suit({atom.k})"
    if isinstance(atom, DistinctSuits):
        return f"dsuit({atom.k})"
    if isinstance(atom, DistinctValues):
        return f"dvalue({atom.k})"
    if isinstance(atom, ValueIn):
        return "in(" + ",".join(atom.values) + ")"
    if isinstance(atom, CountSpecial):
        rng = str(atom.lo) if atom.lo == atom.hi else f"{atom.lo}..{atom.hi}"
        return f"special({atom.symbol},{rng})"
    if isinstance(atom, DisjointGroups):
        return "groups(" + ";".join("+".join(_render_atom(a) for a in g) for g in atom.groups) + ")"
    raise TypeError(f"not an atom: {atom!r}")


def render_match_expr(atoms: tuple) -> str:
    if not atoms:
        return "any"
    return "&".join(_render_atom(a) for a in atoms)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_SECTION_RE = re.compile(r"^([a-z_]+):\s*(.*)$")
_NAME_RE = re.compile(r"^[A-Za-z0-9_*-]+$")


def parse_script(text: str) -> GameSpec:
    """Parse script text into a GameSpec.

    Raises a typed ScriptError (with .line) on any malformed input; never
    propagates anything else.
    """
    sections: dict[str, tuple[str, int]] = {}
    strategies_raw: list[dict] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _SECTION_RE.match(line)
        if not m:
            raise MalformedScript(f"expected 'section: content', got {line!r}", lineno)
        label, content = m.group(1), m.group(2).strip()
        if label == "strategy":
            strategies_raw.append({"header": (content, lineno), "combos": []})
        elif label == "combo":
            if not strategies_raw:
                raise MalformedScript("combo line before any strategy", lineno)
            strategies_raw[-1]["combos"].append((content, lineno))
        else:
            if label in sections:
                raise MalformedScript(f"duplicate section {label!r}", lineno)
            sections[label] = (content, lineno)

    known = {"game", "players", "bet_limits", "starting_stack", "blinds",
             "suits", "suit_ranks", "values", "specials", "flow"}
    for label, (_, lineno) in sections.items():
        if label not in known:
            raise UnknownSymbol(label, lineno)

    for required in ("players", "bet_limits", "suits", "values", "flow"):
        if required not in sections:
            raise MissingSection(required)
    if not strategies_raw:
        raise MissingSection("strategy")

    def _int(content: str, lineno: int) -> int:
        if not re.match(r"^-?\d+$", content):
            raise MalformedScript(f"expected integer, got {content!r}", lineno)
        return int(content)

    name = sections.get("game", ("custom", 0))[0] or "custom"
    if not _NAME_RE.match(name):
        raise MalformedScript(f"bad game name {name!r}", sections["game"][1])

    num_players = _int(*sections["players"])

    content, lineno = sections["bet_limits"]
    parts = content.split()
    if len(parts) != 2:
        raise MalformedScript("bet_limits needs two integers", lineno)
    min_bet, max_bet = _int(parts[0], lineno), _int(parts[1], lineno)

    starting_stack = DEFAULT_STARTING_STACK
    if "starting_stack" in sections:
        starting_stack = _int(*sections["starting_stack"])

    small_blind, big_blind = DEFAULT_BLINDS
    if "blinds" in sections:
        content, lineno = sections["blinds"]
        parts = content.split()
        if len(parts) != 2:
            raise MalformedScript("blinds needs two integers", lineno)
        small_blind, big_blind = _int(parts[0], lineno), _int(parts[1], lineno)

    # Suits: single-character symbols.
    content, lineno = sections["suits"]
    suits = tuple(content.split())
    for s in suits:
        if len(s) != 1 or not _NAME_RE.match(s):
            raise UnknownSymbol(s, lineno)

    # Suit rank classes, ascending: "H=D=C=S" or "H=D=C=S<L".
    if "suit_ranks" in sections:
        content, lineno = sections["suit_ranks"]
        classes = []
        for cls in content.split("<"):
            members = tuple(m for m in cls.split("=") if m)
            if not members:
                raise MalformedScript("empty suit rank class", lineno)
            for m in members:
                if m not in suits:
                    raise UnknownSymbol(m, lineno)
            classes.append(members)
        rank_classes = tuple(classes)
    else:
        rank_classes = (suits,)
    suit_spec = SuitSpec(suits, rank_classes)

    # Values: "2<3<...<K<1", optional trailing "wheel".
    content, lineno = sections["values"]
    parts = content.split()
    wheel = False
    if len(parts) == 2 and parts[1] == "wheel":
        wheel = True
    elif len(parts) != 1:
        raise MalformedScript("values section is one ordering plus optional 'wheel'", lineno)
    ordered = tuple(v for v in parts[0].split("<") if v)
    for v in ordered:
        if not _NAME_RE.match(v):
            raise UnknownSymbol(v, lineno)
    value_spec = ValueSpec(ordered, wheel)

    # Specials: "* x10 null; J1 x1 wild".
    specials: list[SpecialCardSpec] = []
    if "specials" in sections:
        content, lineno = sections["specials"]
        if content:
            for chunk in content.split(";"):
                parts = chunk.split()
                if len(parts) != 3 or not parts[1].startswith("x") or not parts[1][1:].isdigit():
                    raise MalformedScript(f"bad specials entry {chunk.strip()!r}", lineno)
                sym, count, kind = parts[0], int(parts[1][1:]), parts[2]
                if kind not in ("wild", "null"):
                    raise UnknownSymbol(kind, lineno)
                specials.append(SpecialCardSpec(sym, count, kind))

    strategies = []
    for raw in strategies_raw:
        content, lineno = raw["header"]
        parts = content.split()
        if not parts or parts[0] not in ("high", "low"):
            raise MalformedScript("strategy must start with 'high' or 'low'", lineno)
        direction = parts[0]
        opts = {"size": None, "hole": "any", "convention": "none"}
        for tok in parts[1:]:
            if "=" not in tok:
                raise UnknownSymbol(tok, lineno)
            key, val = tok.split("=", 1)
            if key not in opts:
                raise UnknownSymbol(key, lineno)
            opts[key] = val
        if opts["size"] is None or not opts["size"].isdigit():
            raise MalformedScript("strategy needs size=<int>", lineno)
        hand_size = int(opts["size"])
        hole_exact = None
        if opts["hole"] != "any":
            if not opts["hole"].isdigit():
                raise UnknownSymbol(opts["hole"], lineno)
            hole_exact = int(opts["hole"])
        if opts["convention"] not in ("none", "ace_to_five", "deuce_to_seven", "badugi_style"):
            raise UnknownSymbol(opts["convention"], lineno)

        combos = []
        for ctext, clineno in raw["combos"]:
            cparts = ctext.split()
            if not cparts or not _NAME_RE.match(cparts[0]):
                raise MalformedScript(f"bad combo line {ctext!r}", clineno)
            cname = cparts[0]
            copts = {"rank": None, "match": None, "tie": "auto"}
            for tok in cparts[1:]:
                if "=" not in tok:
                    raise UnknownSymbol(tok, clineno)
                key, val = tok.split("=", 1)
                if key not in copts:
                    raise UnknownSymbol(key, clineno)
                copts[key] = val
            if copts["rank"] is None or not copts["rank"].isdigit():
                raise MalformedScript("combo needs rank=<int>", clineno)
            if copts["match"] is None:
                raise MalformedScript("combo needs match=<expr>", clineno)
            if copts["tie"] not in ("auto", "values"):
                raise UnknownSymbol(copts["tie"], clineno)
            atoms = parse_match_expr(copts["match"], clineno)
            combos.append(CombinationDef(cname, int(copts["rank"]), atoms, copts["tie"]))
        strategies.append(RankingStrategy(direction, hand_size, hole_exact,
                                          tuple(combos), opts["convention"]))

    content, lineno = sections["flow"]
    steps = tuple(parse_flow_token(tok.strip(), lineno) for tok in content.split(">"))
    if not steps:
        raise MalformedFlow("empty flow", lineno)

    return GameSpec(
        name=name,
        num_players=num_players,
        min_bet=min_bet,
        max_bet=max_bet,
        value_spec=value_spec,
        suit_spec=suit_spec,
        specials=tuple(specials),
        strategies=tuple(strategies),
        flow=steps,
        starting_stack=starting_stack,
        small_blind=small_blind,
        big_blind=big_blind,
    )


# ---------------------------------------------------------------------------
# Renderer
# ---------------------------------------------------------------------------

def render_script(spec: GameSpec) -> str:
    """Deterministic script text; parse_script(render_script(s)) == s."""
    lines = [
        f"game: {spec.name}",
        f"players: {spec.num_players}",
        f"bet_limits: {spec.min_bet} {spec.max_bet}",
        f"starting_stack: {spec.starting_stack}",
        f"blinds: {spec.small_blind} {spec.big_blind}",
        f"suits: {' '.join(spec.suit_spec.suits)}",
    ]
    if spec.suit_spec.rank_classes != (spec.suit_spec.suits,):
        lines.append("suit_ranks: " + "<".join("=".join(c) for c in spec.suit_spec.rank_classes))
    values = "<".join(spec.value_spec.ordered)
    if spec.value_spec.wheel:
        values += " wheel"
    lines.append(f"values: {values}")
    if spec.specials:
        lines.append("specials: " + "; ".join(
            f"{sp.symbol} x{sp.count} {sp.kind}" for sp in spec.specials))
    for strat in spec.strategies:
        hole = "any" if strat.hole_exact is None else str(strat.hole_exact)
        lines.append(f"strategy: {strat.direction} size={strat.hand_size} "
                     f"hole={hole} convention={strat.low_convention}")
        for combo in strat.combinations:
            line = (f"combo: {combo.name} rank={combo.rank_index} "
                    f"match={render_match_expr(combo.atoms)}")
            if combo.tiebreak != "auto":
                line += f" tie={combo.tiebreak}"
            lines.append(line)
    lines.append("flow: " + " > ".join(st.token() for st in spec.flow))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _atom_symbol_violations(atoms, spec: GameSpec, where: str) -> list[Violation]:
    out = []
    for atom in atoms:
        if isinstance(atom, ValueIn):
            for v in atom.values:
                if v not in spec.value_spec.ordered:
                    out.append(Violation("UnknownValue", f"{where}: value {v!r} not declared"))
        elif isinstance(atom, CountSpecial):
            if atom.symbol not in spec.special_symbols():
                out.append(Violation("UnknownSpecial", f"{where}: special {atom.symbol!r} not declared"))
            if atom.lo > atom.hi or atom.lo < 0:
                out.append(Violation("BadSpecialRange", f"{where}: bad count range"))
        elif isinstance(atom, DisjointGroups):
            for grp in atom.groups:
                out.extend(_atom_symbol_violations(grp, spec, where))
        elif atom.k < 1:
            out.append(Violation("BadAtomSize", f"{where}: atom size must be >= 1"))
    return out


def validate_spec(spec: GameSpec) -> list[Violation]:
    """Return every violated GameSpec invariant (empty list = ok)."""
    v: list[Violation] = []

    if spec.num_players < 2:
        v.append(Violation("PlayerCount", f"need >= 2 players, got {spec.num_players}"))
    if spec.min_bet > spec.max_bet:
        v.append(Violation("BetLimits", f"min_bet {spec.min_bet} > max_bet {spec.max_bet}"))
    if spec.min_bet < 1:
        v.append(Violation("BetLimits", "min_bet must be >= 1"))
    if spec.starting_stack < 1:
        v.append(Violation("BadStack", "starting_stack must be >= 1"))
    if spec.small_blind < 0 or spec.big_blind < 0:
        v.append(Violation("BadBlinds", "blinds must be >= 0"))

    if len(spec.value_spec.ordered) < 2:
        v.append(Violation("ValueCount", "need at least 2 values"))
    if len(set(spec.value_spec.ordered)) != len(spec.value_spec.ordered):
        v.append(Violation("DuplicateValue", "duplicate value symbols"))
    if not spec.suit_spec.suits:
        v.append(Violation("SuitCount", "need at least 1 suit"))
    if len(set(spec.suit_spec.suits)) != len(spec.suit_spec.suits):
        v.append(Violation("DuplicateSuit", "duplicate suit symbols"))

    flat = [s for cls in spec.suit_spec.rank_classes for s in cls]
    if sorted(flat) != sorted(spec.suit_spec.suits):
        v.append(Violation("SuitRankPartition", "rank classes must partition the suit set"))

    deck = set()
    for s in spec.suit_spec.suits:
        for val in spec.value_spec.ordered:
            deck.add(s + val)
    for sp in spec.specials:
        if sp.count < 0:
            v.append(Violation("BadSpecialCount", f"special {sp.symbol!r} count < 0"))
        if sp.kind not in ("wild", "null"):
            v.append(Violation("BadSpecialKind", f"special {sp.symbol!r} kind {sp.kind!r}"))
        if sp.symbol in deck:
            v.append(Violation("SpecialCollision",
                               f"special {sp.symbol!r} collides with a suit+value token"))

    if not (1 <= len(spec.strategies) <= 2):
        v.append(Violation("StrategyCount", "need one or two strategies"))
    for i, strat in enumerate(spec.strategies):
        where = f"strategy {i}"
        if strat.hand_size < 1:
            v.append(Violation("BadHandSize", f"{where}: hand_size must be >= 1"))
        catch = [c for c in strat.combinations if c.is_catch_all]
        if len(catch) != 1:
            v.append(Violation("CatchAll", f"{where}: need exactly one catch-all, got {len(catch)}"))
        ranks = [c.rank_index for c in strat.combinations]
        if len(set(ranks)) != len(ranks):
            v.append(Violation("DuplicateRank", f"{where}: duplicate combination ranks"))
        names = [c.name for c in strat.combinations]
        if len(set(names)) != len(names):
            v.append(Violation("DuplicateCombo", f"{where}: duplicate combination names"))
        for combo in strat.combinations:
            v.extend(_atom_symbol_violations(combo.atoms, spec, f"{where}/{combo.name}"))
        if strat.hole_exact is not None and strat.hole_exact > strat.hand_size:
            v.append(Violation("BadHoleUse", f"{where}: hole_exact exceeds hand size"))

    # Flow shape.
    if not spec.flow or spec.flow[0].kind != "start":
        v.append(Violation("MalformedFlow", "flow must begin with start"))
    if not spec.flow or spec.flow[-1].kind != "prize":
        v.append(Violation("MalformedFlow", "flow must end with prize"))
    for kind in ("start", "prize"):
        if sum(1 for st in spec.flow if st.kind == kind) > 1:
            v.append(Violation("MalformedFlow", f"flow may contain {kind} only once"))
    if not any(st.kind == "deal" for st in spec.flow):
        v.append(Violation("MalformedFlow", "flow must deal hole cards"))

    # Deck arithmetic: deals and flops must fit the deck.
    deck_size = len(spec.deck_tokens())
    dealt = sum(st.n * spec.num_players for st in spec.flow if st.kind == "deal")
    flopped = sum(st.n for st in spec.flow if st.kind == "flop")
    if dealt + flopped > deck_size:
        v.append(Violation("DeckExhausted",
                           f"flow consumes {dealt + flopped} cards from a {deck_size}-card deck"))

    # Hand sizes must be coverable by dealt hole plus community.
    hole_total = sum(st.n for st in spec.flow if st.kind == "deal")
    for i, strat in enumerate(spec.strategies):
        if strat.hole_exact is not None:
            if strat.hole_exact > hole_total or strat.hand_size - strat.hole_exact > flopped:
                v.append(Violation("BadHoleUse", f"strategy {i}: hole/community split unattainable"))
        elif strat.hand_size > hole_total + flopped:
            v.append(Violation("BadHandSize", f"strategy {i}: hand size exceeds available cards"))

    return v
