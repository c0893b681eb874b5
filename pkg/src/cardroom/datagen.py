"""Corpus generation: simulate rounds with policy players, balance the logs,
and emit training samples for full-state and diff-state prediction."""

from __future__ import annotations

import dataclasses
import json
import random
from collections import defaultdict
from dataclasses import dataclass, replace

from .diff import REGISTRY, render_diff
from .engine import Action, RoundLog, round_outcome, run_round
from .presets import load_preset
from .script import GameSpec, SuitSpec, ValueSpec, render_script, validate_spec
from .state import serialize_state

MODES = ("NSP", "DSP")


class DatagenError(Exception):
    pass


class EmptyCategory(DatagenError):
    def __init__(self, key: str):
        super().__init__(f"no round falls in balance category {key!r}")
        self.key = key


FOLD_WIN = "fold_win"  # outcome label for rounds that never reach showdown


@dataclass(frozen=True)
class SampleRecord:
    script: str
    prev_state: str
    input: str
    target: str
    mode: str
    round_id: str
    step_idx: int
    category: str
    outcome_label: str

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "SampleRecord":
        return cls(**json.loads(line))


@dataclass(frozen=True)
class BalanceTarget:
    key: str  # an outcome label (winning combination name or "fold_win")
    weight: float


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------

class RandomPolicy:
    """Uniform-random over legal action kinds with a capped fold rate.

    Pure uniform play folds most rounds before showdown; capping folds and
    nudging raises keeps show/prize states common enough to learn from.
    """

    def __init__(self, seed, fold_cap: float = 0.06, raise_bias: float = 0.4,
                 all_in_rate: float = 0.05):
        self.rng = random.Random(seed)
        self.fold_cap = fold_cap
        self.raise_bias = raise_bias
        self.all_in_rate = all_in_rate

    def __call__(self, spec, view, legal) -> Action:
        kinds = sorted({a.kind for a in legal})
        if "fold" in kinds and self.rng.random() < self.fold_cap:
            return Action("fold")
        kinds = [k for k in kinds if k != "fold"] or kinds
        if "all_in" in kinds and len(kinds) > 1 and self.rng.random() > self.all_in_rate:
            kinds = [k for k in kinds if k != "all_in"]
        if "raise" in kinds and self.rng.random() < self.raise_bias:
            kind = "raise"
        else:
            kind = self.rng.choice(kinds)
        options = sorted((a for a in legal if a.kind == kind),
                         key=lambda a: (a.amount or 0, a.cards))
        return self.rng.choice(options)


def default_policies(spec: GameSpec, seed: int) -> dict[int, RandomPolicy]:
    return {p: RandomPolicy(f"policy-{seed}-{p}") for p in spec.seats()}


def simulate_round(spec: GameSpec, seed: int, policies=None) -> RoundLog:
    if policies is None:
        policies = default_policies(spec, seed)
    return run_round(spec, seed, policies)


# ---------------------------------------------------------------------------
# Variant sampling
# ---------------------------------------------------------------------------

_EXTRA_SUITS = ("L", "W", "T")


def sample_variant(base: str, seed: int) -> GameSpec:
    """Perturb a preset's configurable elements into a fresh legal variant.

    Strategies stay untouched (they are the game's identity); players, bet
    limits, stack, blinds, suit set, and value range vary. Resamples until
    the variant validates, falling back to the base after bounded retries.
    """
    base_spec = load_preset(base)
    rng = random.Random(f"variant-{base}-{seed}")
    for _ in range(50):
        spec = _perturb(base_spec, rng)
        if not validate_spec(spec):
            return spec
    return base_spec


def _perturb(spec: GameSpec, rng: random.Random) -> GameSpec:
    players = rng.randint(2, 6)
    min_bet = rng.randint(1, 4)
    max_bet = min_bet + rng.randint(2, 12)
    stack = rng.choice((60, 80, 100, 120, 160, 200))
    small = rng.randint(1, min_bet)
    out = replace(spec, num_players=players, min_bet=min_bet, max_bet=max_bet,
                  starting_stack=stack, small_blind=small, big_blind=2 * small,
                  name=f"{spec.name}_v{rng.randrange(10**6)}")

    uses_special_values = any(
        _mentions_value_subset(s) for s in spec.strategies)
    if rng.random() < 0.3 and not uses_special_values:
        ordered = spec.value_spec.ordered
        trim = rng.randint(1, 2)
        if len(ordered) - trim >= 6:
            out = replace(out, value_spec=ValueSpec(ordered[trim:], spec.value_spec.wheel))

    needs_four_suits = any(s.low_convention == "badugi_style" for s in spec.strategies)
    if rng.random() < 0.3 and not needs_four_suits:
        suits = list(spec.suit_spec.suits)
        if rng.random() < 0.5 and len(suits) > 3:
            suits = suits[:-1]
        else:
            for extra in _EXTRA_SUITS:
                if extra not in suits:
                    suits.append(extra)
                    break
        out = replace(out, suit_spec=SuitSpec(tuple(suits), (tuple(suits),)))
    return out


def _mentions_value_subset(strategy) -> bool:
    from .script import DisjointGroups, ValueIn

    def scan(atoms):
        for a in atoms:
            if isinstance(a, ValueIn):
                return True
            if isinstance(a, DisjointGroups) and any(scan(g) for g in a.groups):
                return True
        return False

    return any(scan(c.atoms) for c in strategy.combinations)


# ---------------------------------------------------------------------------
# Balancing
# ---------------------------------------------------------------------------

def round_category(log: RoundLog) -> str:
    return round_outcome(log) or FOLD_WIN


def balance(logs: list[RoundLog], targets: list[BalanceTarget], seed: int) -> list[RoundLog]:
    """Up/down-sample rounds so targeted outcome categories approach their
    relative weights. Untargeted categories pass through unchanged; every
    output round is a copy of an input round."""
    if not logs:
        raise DatagenError("no logs to balance")
    if not targets:
        return list(logs)
    groups: dict[str, list[RoundLog]] = defaultdict(list)
    for log in logs:
        groups[round_category(log)].append(log)
    for t in targets:
        if t.key not in groups:
            raise EmptyCategory(t.key)
        if t.weight <= 0:
            raise DatagenError(f"balance weight for {t.key!r} must be positive")
    rng = random.Random(seed)
    total_weight = sum(t.weight for t in targets)
    targeted = {t.key for t in targets}
    budget = sum(len(groups[k]) for k in targeted)
    out: list[RoundLog] = []
    for key in sorted(groups):
        rounds = groups[key]
        if key not in targeted:
            out.extend(rounds)
            continue
        weight = next(t.weight for t in targets if t.key == key)
        want = max(1, round(budget * weight / total_weight))
        if want <= len(rounds):
            out.extend(rounds[:want])
        else:
            out.extend(rounds)
            out.extend(rng.choices(rounds, k=want - len(rounds)))
    return out


# ---------------------------------------------------------------------------
# Sample emission
# ---------------------------------------------------------------------------

def emit_samples(log: RoundLog, mode: str, round_id: str | None = None) -> list[SampleRecord]:
    """One record per transition of a round: script, previous state, player
    input, and the full next state (NSP) or its diff (DSP)."""
    if mode not in MODES:
        raise DatagenError(f"mode must be one of {MODES}")
    script_text = render_script(log.spec)
    outcome = round_category(log)
    rid = round_id if round_id is not None else f"{log.spec.name}-{log.seed}"
    records = []
    for i, t in enumerate(log.transitions):
        target = serialize_state(t.next) if mode == "NSP" else render_diff(t.diff)
        records.append(SampleRecord(
            script=script_text,
            prev_state=serialize_state(t.prev),
            input=t.input.render(),
            target=target,
            mode=mode,
            round_id=rid,
            step_idx=i,
            category=t.category,
            outcome_label=outcome,
        ))
    return records


# ---------------------------------------------------------------------------
# Core-set instruction pairs
# ---------------------------------------------------------------------------

def _core_set_pair(name: str, rng: random.Random) -> dict:
    if name == "shuffle":
        s = rng.randrange(2**16)
        return {
            "function": name,
            "args": {"seed": s},
            "instruction": f"Shuffle the remaining deck using seed {s}. Every card stays "
                           "in the deck, rearranged into the seeded order.",
            "behavior": f"call shuffle seed={s} permutes the deck deterministically; "
                        "the card multiset is unchanged.",
        }
    if name == "deal":
        k = rng.randint(1, 5)
        return {
            "function": name,
            "args": {"n": k},
            "instruction": f"Deal {k} cards to each player still in the hand. Hand out the "
                           "cards one by one, clockwise from the seat after the button, "
                           "taking each card from the top of the deck.",
            "behavior": f"call deal n={k} removes {k} x (number of non-folded players) cards "
                        "from the deck top, appending them to the holes one by one in "
                        "round-robin order.",
        }
    if name == "flop":
        k = rng.randint(1, 4)
        return {
            "function": name,
            "args": {"n": k},
            "instruction": f"Reveal {k} cards from the top of the deck onto the community "
                           "board, keeping their order.",
            "behavior": f"call flop n={k} moves {k} deck-top cards to the end of the "
                        "community list.",
        }
    if name == "sort_hand":
        p = rng.randint(1, 6)
        return {
            "function": name,
            "args": {"player": p},
            "instruction": f"Sort the hole cards of seat {p} by suit and then by value, "
                           "using the game's declared orders.",
            "behavior": f"call sort_hand player={p} reorders that hole in place; "
                        "no card enters or leaves it.",
        }
    if name == "rank_hands":
        i = rng.randint(0, 1)
        return {
            "function": name,
            "args": {"strategy": i},
            "instruction": f"Work out each live player's best hand under ranking strategy "
                           f"{i} and announce the showdown result for every seat.",
            "behavior": f"call rank_hands strategy={i} appends one show message per "
                        "non-folded player naming their best combination.",
        }
    if name == "collect_bets":
        return {
            "function": name,
            "args": {},
            "instruction": "Sweep this street's bets into the pots. Create a side pot at "
                           "each all-in player's level so nobody can win more than they "
                           "matched, then reset the street bets to zero.",
            "behavior": "call collect_bets layers street contributions into pots with "
                        "nested eligibility and zeroes street_bets.",
        }
    if name == "next_actor":
        kind = rng.choice(("bet", "switch"))
        return {
            "function": name,
            "args": {"kind": kind},
            "instruction": f"Pass the turn to the next player who still has to act this "
                           f"{kind} round, moving clockwise, and tell them to act.",
            "behavior": f"call next_actor kind={kind} sets current_actor to the next seat "
                        "in to_act and appends a your-turn message (or clears the actor "
                        "when nobody is left).",
        }
    raise DatagenError(f"no instruction template for core function {name!r}")


def emit_core_set(registry=None, n: int = 1000, seed: int = 0) -> list[dict]:
    """Instruction/behavior pairs over the core functions, covering every
    function evenly with randomized argument scenarios."""
    names = sorted(registry if registry is not None else REGISTRY)
    if not names:
        raise DatagenError("empty core-function registry")
    rng = random.Random(f"core-set-{seed}")
    sequence = [names[i % len(names)] for i in range(n)]
    rng.shuffle(sequence)
    return [_core_set_pair(name, rng) for name in sequence]


# ---------------------------------------------------------------------------
# Script chunking for external rephrasing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentPolicy:
    chunk_lines: int = 2
    rephrase_prob: float = 0.3
    full_mask_prob: float = 0.01  # chance the whole script gets rephrased


def segment_script(text: str, policy: SegmentPolicy, seed: int) -> tuple[list[str], list[bool]]:
    """Split a script into chunks and mark which ones an external rephraser
    should rewrite. Chunks concatenate back to the original text exactly;
    the all-marked mask appears only with the configured small probability."""
    if not text:
        raise DatagenError("cannot segment empty text")
    lines = text.splitlines(keepends=True)
    size = max(1, policy.chunk_lines)
    chunks = ["".join(lines[i:i + size]) for i in range(0, len(lines), size)]
    rng = random.Random(f"segment-{seed}")
    if len(chunks) == 1:
        return chunks, [rng.random() < policy.full_mask_prob]
    if rng.random() < policy.full_mask_prob:
        return chunks, [True] * len(chunks)
    mask = [rng.random() < policy.rephrase_prob for _ in chunks]
    if all(mask):
        mask[rng.randrange(len(mask))] = False
    return chunks, mask


# ---------------------------------------------------------------------------
# Corpus statistics and IO
# ---------------------------------------------------------------------------

def corpus_stats(samples: list[SampleRecord]) -> dict:
    """Counts and mean character lengths per mode, plus states per round."""
    stats: dict = {"samples": len(samples), "rounds": 0, "mean_states_per_round": 0.0}
    per_round: dict[str, set[int]] = defaultdict(set)
    for s in samples:
        per_round[s.round_id].add(s.step_idx)
    stats["rounds"] = len(per_round)
    if per_round:
        stats["mean_states_per_round"] = round(
            sum(len(v) for v in per_round.values()) / len(per_round), 2)
    for mode in MODES:
        rows = [s for s in samples if s.mode == mode]
        if not rows:
            stats[mode.lower()] = {"samples": 0}
            continue
        stats[mode.lower()] = {
            "samples": len(rows),
            "mean_script_len": round(sum(len(r.script) for r in rows) / len(rows), 1),
            "mean_input_len": round(sum(len(r.input) for r in rows) / len(rows), 1),
            "mean_target_len": round(sum(len(r.target) for r in rows) / len(rows), 1),
        }
    categories = sorted({s.category for s in samples})
    stats["categories"] = categories
    return stats


def write_ndjson(rows, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            line = row.to_json() if hasattr(row, "to_json") else json.dumps(row, sort_keys=True)
            f.write(line + "\n")


def read_corpus(path) -> list[SampleRecord]:
    with open(path, encoding="utf-8") as f:
        return [SampleRecord.from_json(line) for line in f if line.strip()]


# ---------------------------------------------------------------------------
# End-to-end corpus build
# ---------------------------------------------------------------------------

def generate_logs(preset_names, rounds: int, seed: int, variants: int = 0) -> list[RoundLog]:
    """Round logs over the presets; with ``variants`` > 0 each preset also
    contributes sampled rule variants."""
    logs = []
    for name in preset_names:
        specs = [load_preset(name)]
        for v in range(variants):
            specs.append(sample_variant(name, seed * 1000 + v))
        for si, spec in enumerate(specs):
            for r in range(rounds):
                round_seed = (seed * 7919 + si * 101 + r) & 0x7FFFFFFF
                logs.append(simulate_round(spec, round_seed))
    return logs


def build_corpus(logs: list[RoundLog], mode: str,
                 targets: list[BalanceTarget] | None = None, seed: int = 0,
                 max_samples: int | None = None) -> list[SampleRecord]:
    chosen = balance(logs, targets, seed) if targets else list(logs)
    records: list[SampleRecord] = []
    for i, log in enumerate(chosen):
        rid = f"{log.spec.name}-{log.seed}-{i}"
        records.extend(emit_samples(log, mode, round_id=rid))
        if max_samples is not None and len(records) >= max_samples:
            return records[:max_samples]
    return records
