"""Built-in game definitions.

Ten base games ship as script files under ``presets/``; four player-style
variant games (three-card draw, six-card draw, odd lover, joker hold'em)
under ``presets/appendix/``. The builder functions here are the canonical
definitions; the shipped files are their rendered form and tests assert the
two stay in sync.
"""

from __future__ import annotations

from importlib import resources

from .script import (
    CombinationDef,
    ConsecutiveValues,
    DisjointGroups,
    DistinctSuits,
    DistinctValues,
    FlowStep,
    GameSpec,
    RankingStrategy,
    SameSuit,
    SameValue,
    SpecialCardSpec,
    SuitSpec,
    ValueIn,
    ValueSpec,
    parse_script,
    render_script,
)

BASE_PRESETS = (
    "texas_holdem",
    "omaha",
    "omaha_hl",
    "short_deck",
    "draw_27_triple",
    "draw_a5_triple",
    "draw_27_single",
    "badugi",
    "badeucey",
    "badacey",
)

APPENDIX_PRESETS = (
    "three_card_draw",
    "six_card_draw",
    "odd_lover",
    "joker_holdem",
)

FOUR_SUITS = SuitSpec(("H", "D", "C", "S"), (("H", "D", "C", "S"),))
ACE_HIGH = ValueSpec(("2", "3", "4", "5", "6", "7", "8", "9", "10", "J", "Q", "K", "1"), wheel=True)
ACE_HIGH_NO_WHEEL = ValueSpec(ACE_HIGH.ordered, wheel=False)
ACE_LOW = ValueSpec(("1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "J", "Q", "K"))


def standard_high_combos(n: int = 5) -> tuple[CombinationDef, ...]:
    """The classic ladder over n-card hands (n >= 5 uses 5-card structures)."""
    run = min(n, 5)
    return (
        CombinationDef("high_card", 0, ()),
        CombinationDef("pair", 1, (SameValue(2),)),
        CombinationDef("two_pair", 2, (DisjointGroups(((SameValue(2),), (SameValue(2),))),)),
        CombinationDef("three_of_a_kind", 3, (SameValue(3),)),
        CombinationDef("straight", 4, (ConsecutiveValues(run),)),
        CombinationDef("flush", 5, (SameSuit(run),)),
        CombinationDef("full_house", 6, (DisjointGroups(((SameValue(3),), (SameValue(2),))),)),
        CombinationDef("four_of_a_kind", 7, (SameValue(4),)),
        CombinationDef("straight_flush", 8, (SameSuit(run), ConsecutiveValues(run))),
    )


def ace_to_five_combos() -> tuple[CombinationDef, ...]:
    """Lowball ladder where straights and flushes never count."""
    return (
        CombinationDef("high_card", 0, ()),
        CombinationDef("pair", 1, (SameValue(2),)),
        CombinationDef("two_pair", 2, (DisjointGroups(((SameValue(2),), (SameValue(2),))),)),
        CombinationDef("three_of_a_kind", 3, (SameValue(3),)),
        CombinationDef("full_house", 4, (DisjointGroups(((SameValue(3),), (SameValue(2),))),)),
        CombinationDef("four_of_a_kind", 5, (SameValue(4),)),
    )


def badugi_combos() -> tuple[CombinationDef, ...]:
    """Hands scored by the largest subset with pairwise distinct suits and values."""
    return (
        CombinationDef("one_card", 0, ()),
        CombinationDef("two_card", 1, (DisjointGroups(((DistinctSuits(2), DistinctValues(2)),)),)),
        CombinationDef("three_card", 2, (DisjointGroups(((DistinctSuits(3), DistinctValues(3)),)),)),
        CombinationDef("badugi", 3, (DistinctSuits(4), DistinctValues(4))),
    )


def _flow(tokens: str) -> tuple[FlowStep, ...]:
    from .script import parse_flow_token

    return tuple(parse_flow_token(t.strip()) for t in tokens.split(">"))

HOLDEM_FLOW = "start > blind > shuffle > deal {n} > bet > flop 3 > bet > flop 1 > bet > flop 1 > bet > show > prize"
TRIPLE_DRAW_FLOW = "start > blind > shuffle > deal {n} > bet > switch {n} > bet > switch {n} > bet > switch {n} > bet > show > prize"
SINGLE_DRAW_FLOW = "start > blind > shuffle > deal {n} > bet > switch {n} > bet > show > prize"


def _spec(name, players, value_spec, strategies, flow, *, suits=FOUR_SUITS,
          specials=(), min_bet=2, max_bet=10, stack=100, blinds=(1, 2)) -> GameSpec:
    return GameSpec(
        name=name,
        num_players=players,
        min_bet=min_bet,
        max_bet=max_bet,
        value_spec=value_spec,
        suit_spec=suits,
        specials=tuple(specials),
        strategies=tuple(strategies),
        flow=flow,
        starting_stack=stack,
        small_blind=blinds[0],
        big_blind=blinds[1],
    )


def build_preset(name: str) -> GameSpec:
    high5 = RankingStrategy("high", 5, None, standard_high_combos())
    if name == "texas_holdem":
        return _spec(name, 5, ACE_HIGH, [high5], _flow(HOLDEM_FLOW.format(n=2)))
    if name == "omaha":
        strat = RankingStrategy("high", 5, 2, standard_high_combos())
        return _spec(name, 5, ACE_HIGH, [strat], _flow(HOLDEM_FLOW.format(n=4)))
    if name == "omaha_hl":
        hi = RankingStrategy("high", 5, 2, standard_high_combos())
        lo = RankingStrategy("low", 5, 2, ace_to_five_combos(), "ace_to_five")
        return _spec(name, 5, ACE_HIGH, [hi, lo], _flow(HOLDEM_FLOW.format(n=4)))
    if name == "short_deck":
        values = ValueSpec(("6", "7", "8", "9", "10", "J", "Q", "K", "1"), wheel=True)
        return _spec(name, 5, values, [high5], _flow(HOLDEM_FLOW.format(n=2)))
    if name == "draw_27_triple":
        strat = RankingStrategy("low", 5, None, standard_high_combos(), "deuce_to_seven")
        return _spec(name, 5, ACE_HIGH_NO_WHEEL, [strat], _flow(TRIPLE_DRAW_FLOW.format(n=5)))
    if name == "draw_a5_triple":
        strat = RankingStrategy("low", 5, None, ace_to_five_combos(), "ace_to_five")
        return _spec(name, 5, ACE_LOW, [strat], _flow(TRIPLE_DRAW_FLOW.format(n=5)))
    if name == "draw_27_single":
        strat = RankingStrategy("low", 5, None, standard_high_combos(), "deuce_to_seven")
        return _spec(name, 5, ACE_HIGH_NO_WHEEL, [strat], _flow(SINGLE_DRAW_FLOW.format(n=5)))
    if name == "badugi":
        strat = RankingStrategy("low", 4, None, badugi_combos(), "badugi_style")
        return _spec(name, 6, ACE_LOW, [strat], _flow(TRIPLE_DRAW_FLOW.format(n=4)))
    if name == "badeucey":
        bad = RankingStrategy("low", 4, None, badugi_combos(), "badugi_style")
        low = RankingStrategy("low", 5, None, standard_high_combos(), "deuce_to_seven")
        return _spec(name, 5, ACE_HIGH_NO_WHEEL, [bad, low], _flow(TRIPLE_DRAW_FLOW.format(n=5)))
    if name == "badacey":
        bad = RankingStrategy("low", 4, None, badugi_combos(), "badugi_style")
        low = RankingStrategy("low", 5, None, ace_to_five_combos(), "ace_to_five")
        return _spec(name, 5, ACE_LOW, [bad, low], _flow(TRIPLE_DRAW_FLOW.format(n=5)))

    if name == "three_card_draw":
        suits = SuitSpec(("H", "D", "C"), (("H", "D", "C"),))
        combos = (
            CombinationDef("high_card", 0, ()),
            CombinationDef("pair", 1, (SameValue(2),)),
            CombinationDef("three_of_a_kind", 2, (SameValue(3),)),
            CombinationDef("straight", 3, (ConsecutiveValues(3),)),
            CombinationDef("flush", 4, (SameSuit(3),)),
            CombinationDef("straight_flush", 5, (SameSuit(3), ConsecutiveValues(3))),
        )
        strat = RankingStrategy("high", 3, None, combos)
        return _spec(name, 4, ACE_HIGH_NO_WHEEL, [strat], _flow(SINGLE_DRAW_FLOW.format(n=3)),
                     suits=suits)
    if name == "six_card_draw":
        values = ValueSpec(("2", "3", "4", "5", "6", "7", "8", "9", "10", "11", "12", "13", "1"))
        combos = (
            CombinationDef("high_card", 0, ()),
            CombinationDef("pair", 1, (SameValue(2),)),
            CombinationDef("three_of_a_kind", 2, (SameValue(3),)),
            CombinationDef("straight", 3, (ConsecutiveValues(5),)),
            CombinationDef("flush", 4, (SameSuit(5),)),
            CombinationDef("full_house", 5, (DisjointGroups(((SameValue(3),), (SameValue(2),))),)),
            CombinationDef("three_pair", 6, (DisjointGroups(
                ((SameValue(2),), (SameValue(2),), (SameValue(2),))),)),
            CombinationDef("big_house", 7, (DisjointGroups(((SameValue(3),), (SameValue(3),))),)),
            CombinationDef("straight_flush", 8, (SameSuit(5), ConsecutiveValues(5))),
        )
        strat = RankingStrategy("high", 6, None, combos)
        return _spec(name, 4, values, [strat], _flow(SINGLE_DRAW_FLOW.format(n=6)))
    if name == "odd_lover":
        values = ValueSpec(("2", "4", "6", "8", "10", "1", "3", "5", "7", "9"))
        odds = ("1", "3", "5", "7", "9")
        combos = (
            CombinationDef("high_card", 0, ()),
            CombinationDef("odd_straight", 1, (ConsecutiveValues(5), ValueIn(odds))),
            CombinationDef("odd_flush", 2, (SameSuit(5), ValueIn(odds))),
            CombinationDef("odd_straight_flush", 3,
                           (SameSuit(5), ConsecutiveValues(5), ValueIn(odds))),
        )
        strat = RankingStrategy("high", 5, None, combos)
        return _spec(name, 4, values, [strat], _flow(SINGLE_DRAW_FLOW.format(n=5)))
    if name == "joker_holdem":
        specials = (SpecialCardSpec("J1", 1, "wild"), SpecialCardSpec("J2", 1, "wild"))
        combos = (
            CombinationDef("high_card", 0, ()),
            CombinationDef("pair", 1, (SameValue(2),)),
            CombinationDef("two_pair", 2, (DisjointGroups(((SameValue(2),), (SameValue(2),))),)),
            CombinationDef("three_of_a_kind", 3, (SameValue(3),)),
            CombinationDef("straight", 4, (ConsecutiveValues(5),)),
            CombinationDef("flush", 5, (SameSuit(5),)),
            CombinationDef("full_house", 6, (DisjointGroups(((SameValue(3),), (SameValue(2),))),)),
            CombinationDef("four_of_a_kind", 7, (SameValue(4),)),
            CombinationDef("five_of_a_kind", 8, (SameValue(5),)),
            CombinationDef("straight_flush", 9, (SameSuit(5), ConsecutiveValues(5))),
        )
        strat = RankingStrategy("high", 5, None, combos)
        return _spec(name, 4, ACE_HIGH_NO_WHEEL, [strat], _flow(HOLDEM_FLOW.format(n=2)),
                     specials=specials)
    raise KeyError(f"unknown preset {name!r}")


def _preset_path(name: str):
    root = resources.files("cardroom") / "presets"
    if name in APPENDIX_PRESETS:
        return root / "appendix" / f"{name}.txt"
    return root / f"{name}.txt"


def preset_text(name: str) -> str:
    if name not in BASE_PRESETS and name not in APPENDIX_PRESETS:
        raise KeyError(f"unknown preset {name!r}")
    return _preset_path(name).read_text(encoding="utf-8")


def load_preset(name: str) -> GameSpec:
    """Load a shipped preset by parsing its script file."""
    return parse_script(preset_text(name))


def write_preset_files(root) -> None:
    """Regenerate the shipped script files from the builders (dev helper)."""
    from pathlib import Path

    root = Path(root)
    (root / "appendix").mkdir(parents=True, exist_ok=True)
    for name in BASE_PRESETS:
        (root / f"{name}.txt").write_text(render_script(build_preset(name)), encoding="utf-8")
    for name in APPENDIX_PRESETS:
        (root / "appendix" / f"{name}.txt").write_text(
            render_script(build_preset(name)), encoding="utf-8")
