"""Score an external predictor's outputs against gold logs, per transition
category and per round."""

from __future__ import annotations

import dataclasses
import json
from collections import defaultdict
from dataclasses import dataclass, field

from .datagen import SampleRecord
from .diff import equivalent
from .script import parse_script
from .state import parse_state

# Category column order used by every report.
CATEGORY_ORDER = ("start", "blind", "shuffle", "deal", "flop", "switch", "bet", "show", "prize")


class EvalError(Exception):
    pass


class CorpusMismatch(EvalError):
    def __init__(self, round_id: str, detail: str):
        super().__init__(f"round {round_id}: {detail}")
        self.round_id = round_id


@dataclass(frozen=True)
class PredictionRecord:
    round_id: str
    step_idx: int
    predicted: str

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "PredictionRecord":
        return cls(**json.loads(line))


def read_predictions(path) -> list[PredictionRecord]:
    with open(path, encoding="utf-8") as f:
        return [PredictionRecord.from_json(line) for line in f if line.strip()]


@dataclass
class ScoreReport:
    mode: str
    categories: dict = field(default_factory=dict)  # category -> [correct, total]
    rounds: dict = field(default_factory=dict)      # round_id -> bool
    games: dict = field(default_factory=dict)       # game name -> [successes, rounds]
    failures: list = field(default_factory=list)    # exemplar dicts

    def category_accuracy(self, category: str) -> float | None:
        if category not in self.categories:
            return None
        correct, total = self.categories[category]
        return correct / total if total else None

    def round_rate(self) -> float:
        if not self.rounds:
            return 0.0
        return sum(self.rounds.values()) / len(self.rounds)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "categories": {k: list(v) for k, v in sorted(self.categories.items())},
            "round_success": sum(self.rounds.values()),
            "round_total": len(self.rounds),
            "games": {k: list(v) for k, v in sorted(self.games.items())},
            "failures": self.failures,
        }


_MAX_FAILURES = 10


def _game_name(script_text: str, cache: dict) -> str:
    if script_text not in cache:
        cache[script_text] = parse_script(script_text).name
    return cache[script_text]


def score_states(gold: list[SampleRecord], preds: list[PredictionRecord]) -> ScoreReport:
    """Per-transition verdicts aggregated by flow-step category.

    A missing prediction is wrong, never skipped: an engine must answer
    every state. DSP predictions score by execution equivalence on the gold
    previous state; NSP predictions by canonical state equality.
    """
    if not gold:
        raise EvalError("empty gold corpus")
    mode = gold[0].mode
    by_key: dict[tuple[str, int], PredictionRecord] = {}
    gold_keys = {(g.round_id, g.step_idx) for g in gold}
    for p in preds:
        key = (p.round_id, p.step_idx)
        if key in by_key:
            raise CorpusMismatch(p.round_id, f"duplicate prediction for step {p.step_idx}")
        if key not in gold_keys:
            raise CorpusMismatch(p.round_id, f"prediction for unknown step {p.step_idx}")
        by_key[key] = p

    report = ScoreReport(mode=mode)
    spec_cache: dict = {}
    name_cache: dict = {}
    round_ok: dict[str, bool] = defaultdict(lambda: True)
    round_game: dict[str, str] = {}

    for g in gold:
        pred = by_key.get((g.round_id, g.step_idx))
        ok, reason = _verdict(g, pred, spec_cache)
        bucket = report.categories.setdefault(g.category, [0, 0])
        bucket[1] += 1
        if ok:
            bucket[0] += 1
        else:
            round_ok[g.round_id] = False
            if len(report.failures) < _MAX_FAILURES:
                report.failures.append({
                    "round_id": g.round_id, "step_idx": g.step_idx,
                    "category": g.category, "reason": reason,
                })
        round_ok.setdefault(g.round_id, True)
        round_game[g.round_id] = _game_name(g.script, name_cache)

    report.rounds = dict(round_ok)
    games: dict[str, list[int]] = {}
    for rid, ok in report.rounds.items():
        bucket = games.setdefault(round_game[rid], [0, 0])
        bucket[1] += 1
        if ok:
            bucket[0] += 1
    report.games = games
    return report


def _verdict(g: SampleRecord, pred: PredictionRecord | None, spec_cache: dict):
    if pred is None:
        return False, "missing prediction"
    if g.mode == "NSP":
        try:
            predicted = parse_state(pred.predicted)
        except Exception as e:
            return False, f"parse_error: {e}"
        return (predicted == parse_state(g.target), "state_mismatch")
    if g.script not in spec_cache:
        spec_cache[g.script] = parse_script(g.script)
    spec = spec_cache[g.script]
    prev = parse_state(g.prev_state)
    result = equivalent(pred.predicted, g.target, prev, spec)
    return result.equivalent, result.reason or "not_equivalent"


def score_rounds(report: ScoreReport) -> dict[str, tuple[int, int]]:
    """Round-level success per game script: a round succeeds only when every
    one of its transitions scored equivalent."""
    return {name: (ok, total) for name, (ok, total) in sorted(report.games.items())}


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def render_report(report: ScoreReport) -> str:
    """Deterministic fixed-width table over the nine step categories, then
    round-level rates per game and failure exemplars."""
    cols = [c for c in CATEGORY_ORDER]
    extra = sorted(set(report.categories) - set(cols))
    cols.extend(extra)
    width = max(8, max((len(c) for c in cols), default=8) + 1)

    def row(label: str, cells: list[str]) -> str:
        return label.ljust(12) + "".join(c.rjust(width) for c in cells)

    lines = [f"state-level accuracy ({report.mode})"]
    lines.append(row("category", cols))
    accs, counts = [], []
    for c in cols:
        acc = report.category_accuracy(c)
        accs.append("-" if acc is None else f"{acc * 100:.1f}")
        if c in report.categories:
            correct, total = report.categories[c]
            counts.append(f"{correct}/{total}")
        else:
            counts.append("-")
    lines.append(row("accuracy%", accs))
    lines.append(row("counts", counts))
    lines.append("")
    lines.append(f"round-level success: {sum(report.rounds.values())}/{len(report.rounds)}")
    for name, (ok, total) in sorted(report.games.items()):
        mark = "ok" if ok == total else f"{ok}/{total}"
        lines.append(f"  {name.ljust(28)} {ok}/{total} ({mark})")
    if report.failures:
        lines.append("")
        lines.append("failure exemplars:")
        for f in report.failures:
            lines.append(f"  {f['round_id']} step {f['step_idx']} "
                         f"[{f['category']}]: {f['reason']}")
    return "\n".join(lines) + "\n"
