"""Engine: round setup, legal actions, betting and draw mechanics,
settlement, and termination."""

from collections import Counter

import pytest

from cardroom import datagen, presets
from cardroom.engine import (
    IllegalAction,
    InvalidSpec,
    build_side_pots,
    distribute_prize,
    init_round,
    legal_actions,
    pending_step,
    step,
)
from cardroom.hands import best_hand
from cardroom.state import NO_INPUT, Pot, PlayerInput, validate_state
from cardroom.diff import CallOp


def _first(legal, kind, **kw):
    for a in sorted(legal, key=lambda a: (a.kind, a.amount or 0, a.cards)):
        if a.kind == kind and all(getattr(a, k) == v for k, v in kw.items()):
            return a
    raise AssertionError(f"no {kind} in {legal}")


def _advance_to(spec, state, kind, seed_base=1000):
    """Step automatic transitions (checking/calling through bets) until the
    pending step has the given kind."""
    i = 0
    while pending_step(spec, state).kind != kind:
        i += 1
        if state.current_actor is None:
            state, _ = step(spec, state, NO_INPUT, seed=seed_base + i)
        else:
            legal = legal_actions(spec, state)
            try:
                action = _first(legal, "check")
            except AssertionError:
                action = _first(legal, "call")
            state, _ = step(spec, state, action.to_input(state.current_actor),
                            seed=seed_base + i)
    return state


# ---------------------------------------------------------------------------
# Setup
# ---------------------------------------------------------------------------

def test_init_round_contents(texas):
    s = init_round(texas, 0)
    assert s.flow_cache == ["start"]
    deck = Counter(texas.deck_tokens())
    assert Counter(s.deck) == deck
    assert s.deck == texas.deck_tokens()  # canonical order, unshuffled
    assert all(v == texas.starting_stack for v in s.stacks.values())
    assert s.pots == []
    assert s.button in texas.seats()


def test_init_round_deterministic(texas):
    assert init_round(texas, 7) == init_round(texas, 7)


def test_init_round_rejects_invalid_spec(texas):
    from dataclasses import replace

    with pytest.raises(InvalidSpec):
        init_round(replace(texas, num_players=1), 0)


def test_button_varies_with_seed(texas):
    buttons = {init_round(texas, s).button for s in range(texas.num_players)}
    assert len(buttons) == texas.num_players


# ---------------------------------------------------------------------------
# Legal actions
# ---------------------------------------------------------------------------

def test_non_actor_has_empty_action_set(texas):
    s = init_round(texas, 0)
    assert legal_actions(texas, s) == frozenset()


def test_facing_a_bet(texas):
    s = init_round(texas, 0)
    s = _advance_to(texas, s, "bet")
    # preflop: actor faces the big blind
    legal = legal_actions(texas, s)
    kinds = {a.kind for a in legal}
    assert kinds == {"call", "raise", "fold", "all_in"}
    raises = sorted(a.amount for a in legal if a.kind == "raise")
    assert raises[0] == texas.min_bet and raises[-1] == texas.max_bet


def test_switch_discard_action_count():
    spec = presets.load_preset("draw_27_triple")
    s = init_round(spec, 0)
    s = _advance_to(spec, s, "switch")
    s, _ = step(spec, s, NO_INPUT, seed=77) if s.current_actor is None else (s, None)
    legal = legal_actions(spec, s)
    # max_discards 5 over a 5-card hole: all subsets = 2^5 = 32
    assert len(legal) == 32
    hole = s.hole[s.current_actor]
    # capping at 3 discards would give C(5,0)+C(5,1)+C(5,2)+C(5,3) = 26
    limited = {a for a in legal if len(a.cards) <= 3}
    assert len(limited) == 26
    assert all(set(a.cards) <= set(hole) for a in legal)


def test_out_of_turn_rejected(texas):
    s = init_round(texas, 0)
    s = _advance_to(texas, s, "bet")
    wrong = next(p for p in texas.seats() if p != s.current_actor)
    with pytest.raises(IllegalAction) as err:
        step(texas, s, PlayerInput(wrong, "check"))
    assert err.value.legal  # carries the legal set
    # state unchanged on failure is implicit: step returned nothing


def test_illegal_raise_amount_rejected(texas):
    s = init_round(texas, 0)
    s = _advance_to(texas, s, "bet")
    with pytest.raises(IllegalAction):
        step(texas, s, PlayerInput(s.current_actor, "raise", amount=texas.max_bet + 5))


# ---------------------------------------------------------------------------
# Betting mechanics
# ---------------------------------------------------------------------------

def test_raise_updates_chips_and_messages(texas):
    s = init_round(texas, 0)
    s = _advance_to(texas, s, "bet")
    actor = s.current_actor
    before = s.stacks[actor]
    nxt, d = step(texas, s, PlayerInput(actor, "raise", amount=texas.min_bet))
    outstanding = max(s.street_bets.values()) - s.street_bets[actor]
    assert nxt.stacks[actor] == before - outstanding - texas.min_bet
    assert nxt.street_bets[actor] == max(s.street_bets.values()) + texas.min_bet
    # the next actor is told to bet
    turn_msgs = [m for m in nxt.messages if "your turn" in m.text]
    assert len(turn_msgs) == 1
    assert turn_msgs[0].target == str(nxt.current_actor)


def test_check_around_closes_street(texas):
    s = init_round(texas, 0)
    s = _advance_to(texas, s, "flop")
    # street bets collected into a single pot covering the blinds and calls
    assert s.street_bets == {p: 0 for p in texas.seats()}
    assert len(s.pots) == 1
    assert s.pots[0].amount >= texas.small_blind + texas.big_blind


def test_all_fold_skips_to_prize(texas):
    s = init_round(texas, 0)
    s = _advance_to(texas, s, "bet")
    while len(s.active()) > 1:
        legal = legal_actions(texas, s)
        s, _ = step(texas, s, _first(legal, "fold").to_input(s.current_actor))
    assert pending_step(texas, s).kind == "prize"
    winner = s.active()[0]
    total = sum(p.amount for p in s.pots)
    before = s.stacks[winner]
    s, _ = step(texas, s, NO_INPUT)
    assert s.finished()
    assert "show" not in s.flow_cache  # no showdown, holes stay hidden
    assert s.stacks[winner] == before + total
    assert sum(s.stacks.values()) == texas.starting_stack * texas.num_players


def test_all_in_short_call_creates_side_pot(texas):
    s = init_round(texas, 0)
    s = _advance_to(texas, s, "bet")
    # first actor raises the max, everyone else shoves or folds
    legal = legal_actions(texas, s)
    s, _ = step(texas, s, _first(legal, "raise", amount=texas.max_bet)
                .to_input(s.current_actor))
    while s.current_actor is not None:
        legal = legal_actions(texas, s)
        s, _ = step(texas, s, _first(legal, "all_in").to_input(s.current_actor))
    assert len(s.pots) >= 1
    assert sum(p.amount for p in s.pots) == sum(
        texas.starting_stack - s.stacks[p] for p in texas.seats())
    # everyone shoved: the remaining streets run out automatically
    i = 0
    while not s.finished():
        i += 1
        assert s.current_actor is None
        s, _ = step(texas, s, NO_INPUT, seed=9000 + i)
    assert "show" in s.flow_cache
    assert sum(s.stacks.values()) == texas.starting_stack * texas.num_players


def test_blind_bigger_than_stack_posts_all_in(texas):
    from dataclasses import replace

    tiny = replace(texas, starting_stack=2, min_bet=1, max_bet=2)
    s = init_round(tiny, 0)
    s, _ = step(tiny, s, NO_INPUT)  # blind
    bb_seat = next(p for p, n in s.street_bets.items() if n == tiny.big_blind)
    assert s.stacks[bb_seat] == 0
    assert bb_seat in s.all_in
    # the round still runs out to prize with chips conserved
    log = datagen.simulate_round(tiny, 0)
    assert log.final_state().flow_cache[-1] == "prize"
    assert sum(log.final_state().stacks.values()) == 2 * tiny.num_players


def test_draw_pile_reshuffle_when_deck_runs_out():
    """Tiny deck forces discards back into the draw pile; conservation and
    determinism must survive the reshuffle."""
    from dataclasses import replace

    from cardroom.script import SuitSpec, ValueSpec, parse_flow_token, validate_spec

    base = presets.load_preset("draw_27_single")
    flow = tuple(parse_flow_token(t) for t in
                 ("start", "blind", "shuffle", "deal 4", "bet", "switch 4",
                  "bet", "show", "prize"))
    strat = replace(base.strategies[0], hand_size=4)
    tiny = replace(base, num_players=2, suit_spec=SuitSpec(("H", "D"), (("H", "D"),)),
                   value_spec=ValueSpec(("2", "3", "4", "5", "6")),
                   strategies=(strat,), flow=flow)
    assert validate_spec(tiny) == []
    # deck is 10 cards; dealing 4 to each of 2 players leaves 2: any discard
    # of 3+ cards must trigger the reshuffle
    s = init_round(tiny, 1)
    s = _advance_to(tiny, s, "switch", seed_base=500)
    if s.current_actor is None:
        s, _ = step(tiny, s, NO_INPUT, seed=600)
    actor = s.current_actor
    cards = tuple(sorted(s.hole[actor]))[:4]
    nxt, d = step(tiny, s, PlayerInput(actor, "discard", cards=cards), seed=601)
    assert len(nxt.hole[actor]) == 4
    assert validate_state(tiny, nxt) == []
    # deterministic under the same seed
    again, d2 = step(tiny, s, PlayerInput(actor, "discard", cards=cards), seed=601)
    assert again == nxt and d2 == d
    different, _ = step(tiny, s, PlayerInput(actor, "discard", cards=cards), seed=602)
    assert different.deck != nxt.deck or different.hole[actor] != nxt.hole[actor]


# ---------------------------------------------------------------------------
# Side pots and settlement
# ---------------------------------------------------------------------------

def test_side_pot_example():
    pots = build_side_pots({1: 10, 2: 20, 3: 30}, all_in={1, 2, 3}, folded=set())
    assert [(p.amount, sorted(p.eligible)) for p in pots] == [
        (30, [1, 2, 3]), (20, [2, 3]), (10, [3])]


def test_single_pot_when_equal():
    pots = build_side_pots({1: 25, 2: 25}, all_in=set(), folded=set())
    assert [(p.amount, sorted(p.eligible)) for p in pots] == [(50, [1, 2])]


def test_prize_tie_odd_chip(texas):
    # two-way tie on a 101-chip pot: 51 to the earliest seat left of the button
    strat = texas.strategies[0]
    board = ["H2", "D5", "C7", "S9", "HJ"]
    rankings = [{
        1: best_hand(["HK", "DQ"], board, strat, texas),
        2: best_hand(["DK", "CQ"], board, strat, texas),
        3: best_hand(["D3", "C4"], board, strat, texas),
    }]
    payouts = distribute_prize(texas, [Pot(101, frozenset({1, 2, 3}))], rankings, button=3)
    assert payouts[1] == 51 and payouts[2] == 50 and payouts[3] == 0
    # same tie, button at 1: seat 2 is first after the button
    payouts = distribute_prize(texas, [Pot(101, frozenset({1, 2, 3}))], rankings, button=1)
    assert payouts[2] == 51 and payouts[1] == 50


def test_hi_lo_no_qualifying_low_scoops():
    spec = presets.load_preset("omaha_hl")
    hi, lo = spec.strategies
    board = ["H9", "D10", "CJ", "SQ", "H2"]
    holes = {1: ["HK", "DK", "C3", "S4"], 2: ["D9", "C9", "H5", "S6"]}
    rankings = [
        {p: best_hand(h, board, hi, spec) for p, h in holes.items()},
        {p: best_hand(h, board, lo, spec) for p, h in holes.items()},
    ]
    payouts = distribute_prize(spec, [Pot(100, frozenset({1, 2}))], rankings, button=1)
    assert sum(payouts.values()) == 100
    # board has only two low cards: no eight-or-better is possible, high scoops
    winner = max(payouts, key=payouts.get)
    assert payouts[winner] == 100


def test_hi_lo_split_with_qualifying_low():
    spec = presets.load_preset("omaha_hl")
    hi, lo = spec.strategies
    board = ["H4", "D5", "C6", "SQ", "HK"]
    holes = {1: ["HQ", "DQ", "C9", "S10"],   # strong high, no low
             2: ["D1", "C2", "H9", "S9"]}    # makes 1-2-4-5-6 low
    rankings = [
        {p: best_hand(h, board, hi, spec) for p, h in holes.items()},
        {p: best_hand(h, board, lo, spec) for p, h in holes.items()},
    ]
    payouts = distribute_prize(spec, [Pot(100, frozenset({1, 2}))], rankings, button=1)
    assert sum(payouts.values()) == 100
    assert payouts[2] == 50  # low half


def test_payouts_conserve_chips(seeded_logs):
    for log in seeded_logs:
        final = log.final_state()
        total = sum(final.stacks.values())
        assert total == log.spec.starting_stack * log.spec.num_players


# ---------------------------------------------------------------------------
# Rounds
# ---------------------------------------------------------------------------

def test_run_round_deterministic(texas):
    a = datagen.simulate_round(texas, 5)
    b = datagen.simulate_round(texas, 5)
    assert len(a.transitions) == len(b.transitions)
    for ta, tb in zip(a.transitions, b.transitions):
        assert ta.next == tb.next and ta.diff == tb.diff


def test_round_chains_and_validates(seeded_logs):
    for log in seeded_logs:
        for a, b in zip(log.transitions, log.transitions[1:]):
            assert a.next == b.prev
        for t in log.transitions:
            assert validate_state(log.spec, t.next) == []
        assert log.final_state().flow_cache[-1] == "prize"


def test_actor_liveness(seeded_logs):
    for log in seeded_logs:
        for t in log.transitions:
            s = t.next
            if s.current_actor is not None:
                assert s.current_actor not in s.folded
                assert s.current_actor not in s.all_in


def test_step_bound_respected(seeded_logs):
    for log in seeded_logs:
        bound = 10 * len(log.spec.flow) * log.spec.num_players
        assert len(log.transitions) < bound


def test_draw_games_replace_discards():
    spec = presets.load_preset("draw_27_triple")
    switches = []
    for seed in range(20):
        log = datagen.simulate_round(spec, seed)
        switches.extend(t for t in log.transitions if t.category == "switch"
                        and t.input.action == "discard" and t.input.cards)
    assert switches, "twenty seeds should include at least one real discard"
    for t in switches:
        p = t.input.player
        assert len(t.next.hole[p]) == len(t.prev.hole[p])
        for c in t.input.cards:
            assert c in t.prev.hole[p]
        # discarded cards land in the discard pile unless a reshuffle swept them
        moved = [op for op in t.diff.ops if isinstance(op, CallOp)]
        assert Counter(t.next.hole[p]) != Counter(t.prev.hole[p]) or not t.input.cards


def test_blind_step_posts_both(texas):
    s = init_round(texas, 0)
    s, _ = step(texas, s, NO_INPUT)  # blind
    posted = {p: n for p, n in s.street_bets.items() if n > 0}
    assert sorted(posted.values()) == sorted([texas.small_blind, texas.big_blind])
    assert "blind" in s.flow_cache


def test_pots_empty_after_prize(seeded_logs):
    for log in seeded_logs:
        assert log.final_state().pots == []
