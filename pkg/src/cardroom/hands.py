"""Hand evaluation: match card sets against combination definitions, pick the
best hand a player can make, and totally order hands under a strategy.

Matching semantics: a combination is a conjunction of atoms. Sized atoms in
one group must be satisfied by one shared witness subset; ``DisjointGroups``
requires several witnesses on pairwise disjoint cards; ``CountSpecial``
counts a special symbol over the whole hand. Wildcards are resolved by
enumerating assignments and keeping the one that ranks best for the owner.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple

from .script import (
    CombinationDef,
    ConsecutiveValues,
    CountSpecial,
    DisjointGroups,
    DistinctSuits,
    DistinctValues,
    GameSpec,
    RankingStrategy,
    SameSuit,
    SameValue,
    ValueIn,
)


class NoLegalHand(Exception):
    pass


class StrategyMismatch(Exception):
    pass


class EvalCard(NamedTuple):
    token: str
    suit: str | None
    value: str | None
    pos: int | None  # index in the strategy's effective value order
    wild: bool


@dataclass(frozen=True)
class RankedHand:
    combination: CombinationDef
    cards: tuple[str, ...]
    tiebreak: tuple[int, ...]
    wildcard_assignment: tuple[tuple[str, str, str], ...]  # (token, suit, value)
    strategy: RankingStrategy


@dataclass(frozen=True)
class EvalContext:
    spec: GameSpec
    strategy: RankingStrategy
    order: tuple[str, ...]
    pos: dict
    wheel: bool
    prefer_low: bool
    combos_desc: tuple[CombinationDef, ...]


def effective_order(spec: GameSpec, strategy: RankingStrategy) -> tuple[str, ...]:
    """Value order as seen by one strategy. The ace-to-five convention moves
    the "1" symbol to the bottom; other conventions keep the game order."""
    order = spec.value_spec.ordered
    if strategy.low_convention == "ace_to_five" and "1" in order:
        return ("1",) + tuple(v for v in order if v != "1")
    return order


def context_for(spec: GameSpec, strategy: RankingStrategy) -> EvalContext:
    order = effective_order(spec, strategy)
    combos = tuple(sorted(strategy.combinations, key=lambda c: -c.rank_index))
    return EvalContext(
        spec=spec,
        strategy=strategy,
        order=order,
        pos={v: i for i, v in enumerate(order)},
        wheel=spec.value_spec.wheel,
        prefer_low=strategy.direction == "low",
        combos_desc=combos,
    )


def resolve_cards(tokens, ctx: EvalContext) -> list[EvalCard]:
    """Turn card tokens into evaluation cards (wildcards left unassigned)."""
    specials = ctx.spec.special_symbols()
    out = []
    for t in tokens:
        sp = specials.get(t)
        if sp is not None:
            out.append(EvalCard(t, None, None, None, sp.kind == "wild"))
        else:
            suit, value = t[:1], t[1:]
            if suit not in ctx.spec.suit_spec.suits or value not in ctx.pos:
                raise ValueError(f"card token {t!r} not in this game's deck")
            out.append(EvalCard(t, suit, value, ctx.pos[value], False))
    return out


def _assignments(cards: list[EvalCard], ctx: EvalContext):
    """Yield resolved card lists, one per wildcard assignment."""
    wild_idx = [i for i, c in enumerate(cards) if c.wild]
    if not wild_idx:
        yield cards, ()
        return
    domain = [(s, v) for s in ctx.spec.suit_spec.suits for v in ctx.order]
    for combo in itertools.product(domain, repeat=len(wild_idx)):
        resolved = list(cards)
        record = []
        for i, (suit, value) in zip(wild_idx, combo):
            resolved[i] = EvalCard(cards[i].token, suit, value, ctx.pos[value], True)
            record.append((cards[i].token, suit, value))
        yield resolved, tuple(record)


# ---------------------------------------------------------------------------
# Witness matching
# ---------------------------------------------------------------------------

def _consecutive_positions(ps: list[int], ctx: EvalContext) -> tuple[int, ...] | None:
    """Positions if the values form a run, wheel-adjusted; else None."""
    k = len(ps)
    if len(set(ps)) != k:
        return None
    s = sorted(ps)
    if s[-1] - s[0] == k - 1:
        return tuple(sorted(ps, reverse=True))
    top = len(ctx.order) - 1
    if ctx.wheel and top in ps:
        alt = [-1 if p == top else p for p in ps]
        s = sorted(alt)
        if len(set(alt)) == k and s[-1] - s[0] == k - 1:
            return tuple(sorted(alt, reverse=True))
    return None


def _group_contrib(group, witness: tuple[EvalCard, ...], ctx: EvalContext):
    """Contribution vector if the witness satisfies every atom, else None."""
    if any(c.pos is None for c in witness):
        return None
    ps = [c.pos for c in witness]
    eff = tuple(sorted(ps, reverse=True))
    has_same_value = False
    for atom in group:
        if isinstance(atom, SameValue):
            if len(set(ps)) != 1:
                return None
            has_same_value = True
        elif isinstance(atom, SameSuit):
            if len({c.suit for c in witness}) != 1:
                return None
        elif isinstance(atom, DistinctSuits):
            if len({c.suit for c in witness}) != len(witness):
                return None
        elif isinstance(atom, DistinctValues):
            if len(set(ps)) != len(witness):
                return None
        elif isinstance(atom, ValueIn):
            if any(c.value not in atom.values for c in witness):
                return None
        elif isinstance(atom, ConsecutiveValues):
            run = _consecutive_positions(ps, ctx)
            if run is None:
                return None
            eff = run
        else:
            return None
    return (eff[0],) if has_same_value else eff


def _group_size(group) -> int:
    sizes = [a.k for a in group if hasattr(a, "k")]
    return max(sizes) if sizes else 0


def _split_atoms(combo: CombinationDef):
    """(global CountSpecial atoms, witness groups)."""
    globals_, implicit, groups = [], [], []
    for atom in combo.atoms:
        if isinstance(atom, CountSpecial):
            globals_.append(atom)
        elif isinstance(atom, DisjointGroups):
            groups.extend(atom.groups)
        else:
            implicit.append(atom)
    if implicit:
        groups.insert(0, tuple(implicit))
    return globals_, groups


def _plausible(group, counts: Counter, suit_counts: Counter) -> bool:
    """Cheap reject before witness enumeration."""
    for atom in group:
        if isinstance(atom, SameValue) and (not counts or max(counts.values()) < atom.k):
            return False
        if isinstance(atom, SameSuit) and (not suit_counts or max(suit_counts.values()) < atom.k):
            return False
        if isinstance(atom, DistinctSuits) and len(suit_counts) < atom.k:
            return False
        if isinstance(atom, (DistinctValues, ConsecutiveValues)) and len(counts) < atom.k:
            return False
    return True


def _best_vector(cards: list[EvalCard], combo: CombinationDef, ctx: EvalContext):
    """Best tiebreak vector for this combination over resolved cards, or None."""
    for atom in _split_atoms(combo)[0]:
        n = sum(1 for c in cards if c.token == atom.symbol)
        if not (atom.lo <= n <= atom.hi):
            return None
    groups = _split_atoms(combo)[1]
    valued = [c for c in cards if c.pos is not None]

    if not groups:
        kick = tuple(sorted((c.pos for c in valued), reverse=True))
        return kick if combo.tiebreak != "suited" else _suited_vector(valued, ctx)

    counts = Counter(c.pos for c in valued)
    suit_counts = Counter(c.suit for c in valued)
    for g in groups:
        if not _plausible(g, counts, suit_counts):
            return None

    best = None

    def search(gi: int, used: frozenset, contribs: tuple):
        nonlocal best
        if gi == len(groups):
            kickers = tuple(sorted((c.pos for i, c in enumerate(valued) if i not in used),
                                   reverse=True))
            vec = tuple(x for contrib in contribs for x in contrib) + kickers
            if combo.tiebreak == "values":
                vec = tuple(sorted((c.pos for c in valued), reverse=True))
            elif combo.tiebreak == "suited":
                vec = _suited_vector(valued, ctx)
            if best is None or (vec < best if ctx.prefer_low else vec > best):
                best = vec
            return
        group = groups[gi]
        size = _group_size(group)
        if size == 0:
            # unsized group (pure ValueIn): constrains every valued card
            contrib = _group_contrib(group, tuple(valued), ctx)
            if contrib is not None:
                search(gi + 1, used | frozenset(range(len(valued))), contribs)
            return
        free = [i for i in range(len(valued)) if i not in used]
        for idx in itertools.combinations(free, size):
            contrib = _group_contrib(group, tuple(valued[i] for i in idx), ctx)
            if contrib is not None:
                search(gi + 1, used | frozenset(idx), contribs + (contrib,))

    search(0, frozenset(), ())
    return best


def _suited_vector(valued: list[EvalCard], ctx: EvalContext) -> tuple[int, ...]:
    top_class = max((ctx.spec.suit_spec.class_of(c.suit) for c in valued), default=0)
    return (top_class,) + tuple(sorted((c.pos for c in valued), reverse=True))


def match_combination(cards, combo: CombinationDef, ctx: EvalContext) -> RankedHand | None:
    """Match a card multiset against one combination definition.

    ``cards`` may be tokens or pre-resolved EvalCards. Returns the match with
    the best tiebreak over all wildcard assignments, or None.
    """
    if cards and not isinstance(cards[0], EvalCard):
        cards = resolve_cards(cards, ctx)
    best: RankedHand | None = None
    for resolved, record in _assignments(list(cards), ctx):
        vec = _best_vector(resolved, combo, ctx)
        if vec is None:
            continue
        better = (best is None
                  or (vec < best.tiebreak if ctx.prefer_low else vec > best.tiebreak))
        if better:
            best = RankedHand(combo, tuple(c.token for c in cards), vec, record, ctx.strategy)
    return best


def _classify(resolved: list[EvalCard], record, tokens, ctx: EvalContext) -> RankedHand:
    """Forced classification: the highest-ranked matching combination."""
    for combo in ctx.combos_desc:
        vec = _best_vector(resolved, combo, ctx)
        if vec is not None:
            return RankedHand(combo, tokens, vec, record, ctx.strategy)
    raise ValueError("strategy has no catch-all combination")


# ---------------------------------------------------------------------------
# Ordering
# ---------------------------------------------------------------------------

def compare_hands(a: RankedHand, b: RankedHand, strategy: RankingStrategy) -> int:
    """-1, 0, or 1: is ``a`` worse, equal, or better than ``b``.

    Classic lowball (ace-to-five, deuce-to-seven, plain low) inverts the
    whole order; badugi-style inverts only the card values, keeping bigger
    structures better.
    """
    if a.strategy != strategy or b.strategy != strategy:
        raise StrategyMismatch("hands ranked under different strategies")
    invert_rank = strategy.direction == "low" and strategy.low_convention != "badugi_style"
    invert_tiebreak = strategy.direction == "low"
    ra, rb = a.combination.rank_index, b.combination.rank_index
    if ra != rb:
        better = ra > rb
        if invert_rank:
            better = not better
        return 1 if better else -1
    if a.tiebreak != b.tiebreak:
        better = a.tiebreak > b.tiebreak
        if invert_tiebreak:
            better = not better
        return 1 if better else -1
    return 0


def _legal_subsets(hole, community, strategy: RankingStrategy):
    n = strategy.hand_size
    if strategy.hole_exact is not None:
        k = strategy.hole_exact
        if k > len(hole) or n - k > len(community) or n < k:
            return
        for hs in itertools.combinations(hole, k):
            for cs in itertools.combinations(community, n - k):
                yield hs + cs
    else:
        pool = tuple(hole) + tuple(community)
        if len(pool) < n:
            return
        for sub in itertools.combinations(pool, n):
            yield sub


def best_hand(hole, community, strategy: RankingStrategy, spec: GameSpec) -> RankedHand:
    """Best hand over every legal subset honoring the strategy's hole use."""
    ctx = context_for(spec, strategy)
    best: RankedHand | None = None
    for subset in _legal_subsets(hole, community, strategy):
        resolved = resolve_cards(subset, ctx)
        for assigned, record in _assignments(resolved, ctx):
            cand = _classify(assigned, record, tuple(subset), ctx)
            if best is None or compare_hands(cand, best, strategy) > 0:
                best = cand
    if best is None:
        raise NoLegalHand(f"cannot form a {strategy.hand_size}-card hand")
    return best


def oracle_best_hand(hole, community, strategy: RankingStrategy, spec: GameSpec) -> RankedHand:
    """Brute-force reference: enumerate every subset, assignment, combination,
    and witness with no shortcuts, then take the maximum by compare_hands."""
    ctx = context_for(spec, strategy)
    best: RankedHand | None = None
    found = False
    for subset in _legal_subsets(hole, community, strategy):
        found = True
        resolved = resolve_cards(subset, ctx)
        for assigned, record in _assignments(resolved, ctx):
            matches = []
            for combo in strategy.combinations:
                vec = _oracle_vector(assigned, combo, ctx)
                if vec is not None:
                    matches.append((combo, vec))
            top_rank = max(c.rank_index for c, _ in matches)
            vecs = [v for c, v in matches if c.rank_index == top_rank]
            top = next(c for c, _ in matches if c.rank_index == top_rank)
            vec = min(vecs) if ctx.prefer_low else max(vecs)
            cand = RankedHand(top, tuple(subset), vec, record, strategy)
            if best is None or compare_hands(cand, best, strategy) > 0:
                best = cand
    if not found:
        raise NoLegalHand(f"cannot form a {strategy.hand_size}-card hand")
    return best


def _oracle_vector(cards: list[EvalCard], combo: CombinationDef, ctx: EvalContext):
    """Independent straight-line matcher: no plausibility pruning, explicit
    enumeration of every witness combination."""
    globals_, groups = _split_atoms(combo)
    for atom in globals_:
        n = sum(1 for c in cards if c.token == atom.symbol)
        if not (atom.lo <= n <= atom.hi):
            return None
    valued = [c for c in cards if c.pos is not None]
    if not groups:
        if combo.tiebreak == "suited":
            return _suited_vector(valued, ctx)
        return tuple(sorted((c.pos for c in valued), reverse=True))

    solutions = []

    def walk(gi, used, contribs):
        if gi == len(groups):
            kickers = tuple(sorted((c.pos for i, c in enumerate(valued) if i not in used),
                                   reverse=True))
            solutions.append(tuple(x for con in contribs for x in con) + kickers)
            return
        group = groups[gi]
        size = _group_size(group)
        if size == 0:
            contrib = _group_contrib(group, tuple(valued), ctx)
            if contrib is not None:
                walk(gi + 1, used | set(range(len(valued))), contribs)
            return
        for idx in itertools.combinations([i for i in range(len(valued)) if i not in used], size):
            contrib = _group_contrib(group, tuple(valued[i] for i in idx), ctx)
            if contrib is not None:
                walk(gi + 1, used | set(idx), contribs + (contrib,))

    walk(0, set(), ())
    if not solutions:
        return None
    if combo.tiebreak == "values":
        return tuple(sorted((c.pos for c in valued), reverse=True))
    if combo.tiebreak == "suited":
        return _suited_vector(valued, ctx)
    return min(solutions) if ctx.prefer_low else max(solutions)
