"""Flow execution: given spec, state, and player input, produce the next
state together with the diff script that encodes the transition.

The engine builds each transition as a diff and derives the next state by
applying that diff, so merge-faithfulness holds by construction. Stochastic
steps (shuffle, draw-pile reshuffle) take an explicit seed that ends up
recorded inside the diff.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from . import diff as diffmod
from .diff import AppendOp, CallOp, DiffScript, MoveOp, SetOp, layered_pots
from .hands import RankedHand, best_hand, compare_hands
from .script import FlowStep, GameSpec, validate_spec
from .state import NO_INPUT, GameState, Message, PlayerInput, Pot, view_for_player


class EngineError(Exception):
    pass


class InvalidSpec(EngineError):
    def __init__(self, violations):
        super().__init__("; ".join(f"{v.code}: {v.detail}" for v in violations))
        self.violations = violations


class IllegalAction(EngineError):
    def __init__(self, reason: str, legal=frozenset()):
        super().__init__(reason)
        self.reason = reason
        self.legal = legal


class NonTermination(EngineError):
    pass


@dataclass(frozen=True)
class Action:
    """One choice available to the current actor. ``cards`` is kept sorted so
    equal discard sets compare equal."""

    kind: str  # check | call | raise | fold | all_in | discard
    amount: int | None = None
    cards: tuple[str, ...] = ()

    def to_input(self, player: int) -> PlayerInput:
        return PlayerInput(player, self.kind, amount=self.amount, cards=self.cards)


@dataclass(frozen=True)
class Transition:
    prev: GameState
    input: PlayerInput
    next: GameState
    diff: DiffScript
    category: str
    seed: int | None = None


@dataclass
class RoundLog:
    spec: GameSpec
    seed: int
    transitions: list[Transition] = field(default_factory=list)

    def final_state(self) -> GameState:
        return self.transitions[-1].next


# ---------------------------------------------------------------------------
# Seating helpers
# ---------------------------------------------------------------------------

def _nth_after(seats: list[int], seat: int, n: int) -> int:
    idx = seats.index(seat)
    return seats[(idx + n) % len(seats)]


def _clockwise_from(candidates, after: int, seats: list[int]) -> list[int]:
    """Candidates ordered clockwise starting after the given seat."""
    order = seats[seats.index(after) + 1:] + seats[: seats.index(after) + 1]
    return [p for p in order if p in candidates]


# ---------------------------------------------------------------------------
# Round setup
# ---------------------------------------------------------------------------

def blank_state(spec: GameSpec, seed: int) -> GameState:
    """The pre-start frame: seats stacked, fresh deck in canonical order."""
    seats = spec.seats()
    return GameState(
        flow_cache=[],
        deck=spec.deck_tokens(),
        hole={p: [] for p in seats},
        community=[],
        discards={p: [] for p in seats},
        stacks={p: spec.starting_stack for p in seats},
        street_bets={p: 0 for p in seats},
        pots=[],
        current_actor=None,
        to_act=frozenset(),
        folded=frozenset(),
        all_in=frozenset(),
        button=seats[seed % len(seats)],
        messages=[],
    )


def init_round(spec: GameSpec, seed: int) -> GameState:
    violations = validate_spec(spec)
    if violations:
        raise InvalidSpec(violations)
    state, _ = step(spec, blank_state(spec, seed), NO_INPUT)
    return state


def pending_step(spec: GameSpec, state: GameState) -> FlowStep | None:
    """The flow step the next transition will execute, or None when done.

    When all but one player have folded the round jumps straight to prize.
    """
    if state.finished():
        return None
    if state.flow_cache and len(state.active()) == 1:
        return spec.flow[-1]
    idx = len(state.flow_cache)
    if idx >= len(spec.flow):
        raise EngineError("flow cache ahead of flow")
    return spec.flow[idx]


# ---------------------------------------------------------------------------
# Legal actions
# ---------------------------------------------------------------------------

def _current_bet(state: GameState) -> int:
    return max(state.street_bets.values(), default=0)


def legal_actions(spec: GameSpec, state: GameState) -> frozenset[Action]:
    if state.finished() or state.current_actor is None:
        return frozenset()
    p = state.current_actor
    pending = pending_step(spec, state)
    acts: set[Action] = set()
    if pending.kind == "bet":
        stack = state.stacks[p]
        outstanding = _current_bet(state) - state.street_bets[p]
        if outstanding == 0:
            acts.add(Action("check"))
        elif stack >= outstanding:
            acts.add(Action("call"))
        for x in range(spec.min_bet, spec.max_bet + 1):
            if stack >= outstanding + x:
                acts.add(Action("raise", amount=x))
        acts.add(Action("fold"))
        if stack > 0:
            acts.add(Action("all_in"))
    elif pending.kind == "switch":
        hole = state.hole[p]
        limit = min(pending.n, len(hole))
        for k in range(0, limit + 1):
            for combo in itertools.combinations(sorted(hole), k):
                acts.add(Action("discard", cards=combo))
    return frozenset(acts)


# ---------------------------------------------------------------------------
# Transition construction
# ---------------------------------------------------------------------------

class _Builder:
    """Accumulates diff ops, mirroring them onto a working tree so later ops
    can consult intermediate values."""

    def __init__(self, spec: GameSpec, state: GameState):
        self.spec = spec
        self.tree = state.to_tree()
        self.ops: list = []

    def emit(self, op) -> None:
        diffmod._apply_op(self.tree, op, len(self.ops), self.spec)
        self.ops.append(op)

    def msg_all(self, text: str) -> None:
        self.emit(AppendOp("messages", Message.to_all(text).render()))

    def msg_player(self, player: int, text: str) -> None:
        self.emit(AppendOp("messages", Message.to_player(player, text).render()))

    def set_stack(self, p: int, n: int) -> None:
        self.emit(SetOp(f"stacks/{p}", n))

    def set_street(self, p: int, n: int) -> None:
        self.emit(SetOp(f"street_bets/{p}", n))

    def finish(self, prev: GameState) -> tuple[GameState, DiffScript]:
        return GameState.from_tree(self.tree), DiffScript(tuple(self.ops))

    # views over the working tree
    def stacks(self, p: int) -> int:
        return self.tree["stacks"][str(p)]

    def street(self, p: int) -> int:
        return self.tree["street_bets"][str(p)]


def _init_interactive(b: _Builder, spec: GameSpec, step_def: FlowStep) -> None:
    """Set up the turn order for an upcoming bet/switch step (or leave it
    auto-resolvable when nobody can act)."""
    seats = spec.seats()
    folded = set(b.tree["folded"])
    all_in = set(b.tree["all_in"])
    can_act = [p for p in seats if p not in folded and p not in all_in]
    if step_def.kind == "bet":
        high = max(b.tree["street_bets"].values(), default=0)
        if len(can_act) == 1 and high - b.street(can_act[0]) <= 0:
            can_act = []
        blinds_live = any(n > 0 for n in b.tree["street_bets"].values())
        anchor = _nth_after(seats, b.tree["button"], 2) if blinds_live else b.tree["button"]
    else:
        anchor = b.tree["button"]
    b.emit(SetOp("to_act", sorted(can_act)))
    if not can_act:
        b.emit(SetOp("current_actor", None))
        return
    first = _clockwise_from(set(can_act), anchor, seats)[0]
    b.emit(SetOp("current_actor", first))
    if step_def.kind == "bet":
        b.msg_player(first, "your turn to bet")
    else:
        b.msg_player(first, f"your turn to switch up to {step_def.n} cards")


def _advance_after(b: _Builder, spec: GameSpec) -> None:
    """After completing a flow step, prime the next one if it needs a turn
    order. The uncontested jump to prize needs no priming."""
    if len([p for p in spec.seats() if p not in set(b.tree["folded"])]) == 1:
        return
    idx = len(b.tree["flow_cache"])
    if idx < len(spec.flow) and spec.flow[idx].kind in ("bet", "switch"):
        _init_interactive(b, spec, spec.flow[idx])


def _close_betting(b: _Builder, spec: GameSpec) -> None:
    b.emit(SetOp("to_act", []))
    b.emit(SetOp("current_actor", None))
    b.emit(CallOp("collect_bets"))
    b.emit(AppendOp("flow_cache", "bet"))
    _advance_after(b, spec)


def _apply_bet_action(b: _Builder, spec: GameSpec, p: int, action: Action) -> None:
    seats = spec.seats()
    high = max(b.tree["street_bets"].values(), default=0)
    outstanding = high - b.street(p)
    to_act = set(b.tree["to_act"])

    if action.kind == "check":
        b.msg_all(f"seat {p} checks")
        to_act.discard(p)
    elif action.kind == "call":
        b.set_stack(p, b.stacks(p) - outstanding)
        b.set_street(p, b.street(p) + outstanding)
        b.msg_all(f"seat {p} calls {outstanding}")
        to_act.discard(p)
    elif action.kind == "raise":
        pay = outstanding + action.amount
        b.set_stack(p, b.stacks(p) - pay)
        b.set_street(p, high + action.amount)
        b.msg_all(f"seat {p} raises to {high + action.amount}")
        to_act = {q for q in seats
                  if q != p and q not in set(b.tree["folded"]) and q not in set(b.tree["all_in"])}
    elif action.kind == "fold":
        b.emit(SetOp("folded", sorted(set(b.tree["folded"]) | {p})))
        b.msg_all(f"seat {p} folds")
        to_act.discard(p)
        to_act &= set(q for q in seats if q not in set(b.tree["folded"]))
    elif action.kind == "all_in":
        stack = b.stacks(p)
        new_bet = b.street(p) + stack
        b.set_stack(p, 0)
        b.set_street(p, new_bet)
        b.msg_all(f"seat {p} goes all in for {new_bet}")
        if new_bet > high:
            to_act = {q for q in seats
                      if q != p and q not in set(b.tree["folded"])
                      and q not in set(b.tree["all_in"])}
        else:
            to_act.discard(p)
    else:
        raise IllegalAction(f"action {action.kind!r} is not a betting action")

    if b.stacks(p) == 0 and action.kind in ("call", "raise", "all_in"):
        b.emit(SetOp("all_in", sorted(set(b.tree["all_in"]) | {p})))
        to_act.discard(p)

    active = [q for q in seats if q not in set(b.tree["folded"])]
    if len(active) == 1:
        b.msg_all("all other players folded")
        _close_betting(b, spec)
        return
    to_act = {q for q in to_act if q not in set(b.tree["all_in"])}
    if to_act:
        b.emit(SetOp("to_act", sorted(to_act)))
        b.emit(CallOp("next_actor", (("kind", "bet"),)))
    else:
        _close_betting(b, spec)


def _apply_switch_action(b: _Builder, spec: GameSpec, p: int, action: Action,
                         step_def: FlowStep, seed: int | None) -> None:
    hole = list(b.tree["hole"][str(p)])
    drawn = len(action.cards)
    if drawn == 0:
        b.msg_all(f"seat {p} stands pat")
    else:
        remaining = hole[:]
        for c in action.cards:
            remaining.remove(c)
        b.emit(SetOp(f"hole/{p}", remaining))
        for c in action.cards:
            b.emit(AppendOp(f"discards/{p}", c))
        if len(b.tree["deck"]) < drawn:
            # draw pile exhausted: shuffle every discard pile back in (seeded)
            if seed is None:
                raise EngineError("seed required to reshuffle the draw pile")
            pool = []
            for q in spec.seats():
                pool.extend(b.tree["discards"][str(q)])
                b.emit(SetOp(f"discards/{q}", []))
            random.Random(seed).shuffle(pool)
            b.emit(SetOp("deck", list(b.tree["deck"]) + pool))
        b.emit(MoveOp("deck", drawn, f"hole/{p}"))
        b.msg_all(f"seat {p} discards {drawn} cards")
    to_act = set(b.tree["to_act"])
    to_act.discard(p)
    if to_act:
        b.emit(SetOp("to_act", sorted(to_act)))
        b.emit(CallOp("next_actor", (("kind", "switch"),)))
    else:
        b.emit(SetOp("to_act", []))
        b.emit(SetOp("current_actor", None))
        b.emit(AppendOp("flow_cache", step_def.token()))
        _advance_after(b, spec)


def _run_automatic(b: _Builder, spec: GameSpec, step_def: FlowStep,
                   seed: int | None) -> None:
    seats = spec.seats()
    kind = step_def.kind
    if kind == "start":
        b.emit(AppendOp("flow_cache", "start"))
        b.msg_all(f"game {spec.name} started, button at seat {b.tree['button']}")
    elif kind == "blind":
        sb_seat = _nth_after(seats, b.tree["button"], 1)
        bb_seat = _nth_after(seats, b.tree["button"], 2)
        notes = []
        for seat, blind, label in ((sb_seat, spec.small_blind, "small"),
                                   (bb_seat, spec.big_blind, "big")):
            posted = min(blind, b.stacks(seat))
            b.set_stack(seat, b.stacks(seat) - posted)
            b.set_street(seat, b.street(seat) + posted)
            if b.stacks(seat) == 0:
                b.emit(SetOp("all_in", sorted(set(b.tree["all_in"]) | {seat})))
            notes.append(f"seat {seat} posts {label} blind {posted}")
        b.emit(AppendOp("flow_cache", "blind"))
        b.msg_all(", ".join(notes))
    elif kind == "shuffle":
        if seed is None:
            raise EngineError("seed required for the shuffle step")
        b.emit(CallOp("shuffle", (("seed", seed),)))
        b.emit(AppendOp("flow_cache", "shuffle"))
        b.msg_all("deck shuffled")
    elif kind == "deal":
        b.emit(CallOp("deal", (("n", step_def.n),)))
        b.emit(AppendOp("flow_cache", step_def.token()))
        b.msg_all(f"dealt {step_def.n} cards to each player")
    elif kind == "flop":
        b.emit(CallOp("flop", (("n", step_def.n),)))
        b.emit(AppendOp("flow_cache", step_def.token()))
        board = " ".join(b.tree["community"])
        b.msg_all(f"community now {board}")
    elif kind == "bet":
        # nobody can act: the betting round resolves itself
        b.emit(CallOp("collect_bets"))
        b.emit(AppendOp("flow_cache", "bet"))
        b.msg_all("no action possible, betting round skipped")
    elif kind == "switch":
        b.emit(AppendOp("flow_cache", step_def.token()))
        b.msg_all("no action possible, draw round skipped")
    elif kind == "show":
        for i in range(len(spec.strategies)):
            b.emit(CallOp("rank_hands", (("strategy", i),)))
        b.emit(AppendOp("flow_cache", "show"))
    elif kind == "prize":
        _run_prize(b, spec)
    else:
        raise EngineError(f"unknown flow step {kind!r}")
    _advance_after(b, spec)


def _run_prize(b: _Builder, spec: GameSpec) -> None:
    seats = spec.seats()
    folded = set(b.tree["folded"])
    active = [p for p in seats if p not in folded]
    pots = [Pot(d["amount"], frozenset(d["eligible"])) for d in b.tree["pots"]]
    if len(active) == 1:
        payouts = {active[0]: sum(p.amount for p in pots)}
    else:
        rankings = []
        for strat in spec.strategies:
            rankings.append({p: best_hand(b.tree["hole"][str(p)], b.tree["community"],
                                          strat, spec) for p in active})
        payouts = distribute_prize(spec, pots, rankings, b.tree["button"])
    for p in sorted(payouts):
        if payouts[p]:
            b.set_stack(p, b.stacks(p) + payouts[p])
    b.emit(SetOp("pots", []))
    b.emit(AppendOp("flow_cache", "prize"))
    for p in sorted(payouts):
        if payouts[p]:
            b.msg_all(f"seat {p} wins {payouts[p]}")


# ---------------------------------------------------------------------------
# Prize math
# ---------------------------------------------------------------------------

def build_side_pots(contributions: dict[int, int], all_in, folded) -> list[Pot]:
    """Layer one street's contributions into pots with nested eligibility."""
    return [Pot(amount, frozenset(elig))
            for amount, elig in layered_pots(contributions, set(all_in), set(folded))]


def _qualifies_low(hand: RankedHand, strategy, spec: GameSpec) -> bool:
    """Eight-or-better: an unpaired hand whose every card is an eight or
    lower under the ace-low order."""
    if not hand.combination.is_catch_all:
        return False
    from .hands import effective_order

    order = effective_order(spec, strategy)
    if "8" not in order:
        return False
    limit = order.index("8")
    return all(pos <= limit for pos in hand.tiebreak)


def distribute_prize(spec: GameSpec, pots: list[Pot],
                     rankings: list[dict[int, RankedHand]], button: int) -> dict[int, int]:
    """Split every pot among its best eligible hands.

    Two-strategy games halve each pot between the strategies (odd chip to
    the first); when the game pairs a high strategy with an ace-to-five low,
    the low half needs an eight-or-better qualifier or the high hand scoops.
    Within a side, ties split evenly with odd chips going clockwise from the
    button.
    """
    seats = spec.seats()
    payouts = {p: 0 for p in seats}
    live = set(rankings[0])

    def award(amount: int, winners: list[int]) -> None:
        share, odd = divmod(amount, len(winners))
        ordered = _clockwise_from(set(winners), button, seats)
        for p in winners:
            payouts[p] += share
        for p in ordered[:odd]:
            payouts[p] += 1

    qualifier = (len(spec.strategies) == 2
                 and spec.strategies[0].direction == "high"
                 and spec.strategies[1].low_convention == "ace_to_five")

    for pot in pots:
        eligible = sorted(pot.eligible & live) or sorted(live)
        sides: list[tuple[int, int]] = []  # (strategy index, amount)
        if len(spec.strategies) == 1:
            sides = [(0, pot.amount)]
        else:
            lo_elig = eligible
            if qualifier:
                lo_elig = [p for p in eligible
                           if _qualifies_low(rankings[1][p], spec.strategies[1], spec)]
            if not lo_elig:
                sides = [(0, pot.amount)]
            else:
                half = pot.amount // 2
                sides = [(0, pot.amount - half), (1, half)]
        for si, amount in sides:
            if amount == 0:
                continue
            strat = spec.strategies[si]
            pool = eligible
            if si == 1 and qualifier:
                pool = [p for p in eligible
                        if _qualifies_low(rankings[1][p], strat, spec)]
            best = None
            winners: list[int] = []
            for p in pool:
                hand = rankings[si][p]
                if best is None:
                    best, winners = hand, [p]
                    continue
                c = compare_hands(hand, best, strat)
                if c > 0:
                    best, winners = hand, [p]
                elif c == 0:
                    winners.append(p)
            award(amount, winners)
    return payouts


# ---------------------------------------------------------------------------
# Step
# ---------------------------------------------------------------------------

def step(spec: GameSpec, state: GameState, player_input: PlayerInput,
         seed: int | None = None) -> tuple[GameState, DiffScript]:
    """Advance the game by one transition.

    Automatic steps take the no-input marker; bet/switch steps take the
    current actor's choice. Raises IllegalAction (state untouched) on any
    out-of-turn or illegal input.
    """
    if state.finished():
        raise IllegalAction("round is finished")

    b = _Builder(spec, state)
    b.emit(SetOp("messages", []))

    if state.current_actor is not None:
        legal = legal_actions(spec, state)
        if player_input.action == "none":
            raise IllegalAction(f"seat {state.current_actor} must act", legal)
        if player_input.player != state.current_actor:
            raise IllegalAction(
                f"not seat {player_input.player}'s turn (actor is {state.current_actor})", legal)
        action = Action(player_input.action, player_input.amount,
                        tuple(sorted(player_input.cards)))
        if action not in legal:
            raise IllegalAction(f"illegal action {player_input.render()!r}", legal)
        step_def = pending_step(spec, state)
        if step_def.kind == "bet":
            _apply_bet_action(b, spec, state.current_actor, action)
        else:
            _apply_switch_action(b, spec, state.current_actor, action, step_def, seed)
    else:
        if player_input.action != "none":
            raise IllegalAction("no player may act during an automatic step")
        step_def = pending_step(spec, state)
        _run_automatic(b, spec, step_def, seed)

    return b.finish(state)


# ---------------------------------------------------------------------------
# Round driver
# ---------------------------------------------------------------------------

def run_round(spec: GameSpec, seed: int, policies: dict[int, object]) -> RoundLog:
    """Play one full round with the given per-seat policies.

    A policy is a callable (spec, view, legal_actions) -> Action. The log
    records every transition with its category and step seed; identical
    seeds and policies replay identically.
    """
    violations = validate_spec(spec)
    if violations:
        raise InvalidSpec(violations)
    rng = random.Random(seed)
    state = blank_state(spec, seed)
    log = RoundLog(spec, seed)
    bound = 10 * len(spec.flow) * spec.num_players
    while not state.finished():
        if len(log.transitions) >= bound:
            raise NonTermination(f"round exceeded {bound} transitions")
        step_seed = rng.getrandbits(32)
        category = pending_step(spec, state).kind
        if state.current_actor is not None:
            actor = state.current_actor
            legal = legal_actions(spec, state)
            action = policies[actor](spec, view_for_player(state, actor), legal)
            player_input = action.to_input(actor)
        else:
            player_input = NO_INPUT
        nxt, d = step(spec, state, player_input, seed=step_seed)
        log.transitions.append(Transition(state, player_input, nxt, d, category, step_seed))
        state = nxt
    return log


def round_outcome(log: RoundLog) -> str | None:
    """Winning combination name under the first strategy, or None when the
    pot went uncontested."""
    if not log.transitions:
        return None
    final = log.final_state()
    if "show" not in final.flow_cache:
        return None
    spec = log.spec
    strat = spec.strategies[0]
    best = None
    for p in final.active():
        hand = best_hand(final.hole[p], final.community, strat, spec)
        if best is None or compare_hands(hand, best, strat) > 0:
            best = hand
    return best.combination.name if best else None
