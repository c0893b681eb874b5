"""Rule-configurable poker engine: script-defined variants, diff-based state
transitions, corpus generation for state prediction, and prediction scoring."""

from .script import GameSpec, parse_script, render_script, validate_spec
from .state import GameState, parse_state, serialize_state, validate_state, view_for_player
from .engine import (
    Action,
    IllegalAction,
    RoundLog,
    init_round,
    legal_actions,
    run_round,
    step,
)
from .hands import best_hand, compare_hands, match_combination, oracle_best_hand
from .diff import DiffScript, compute_diff, equivalent, invoke_core, merge, parse_diff, render_diff
from .presets import BASE_PRESETS, APPENDIX_PRESETS, load_preset

__version__ = "0.1.0"

__all__ = [
    "Action",
    "APPENDIX_PRESETS",
    "BASE_PRESETS",
    "DiffScript",
    "GameSpec",
    "GameState",
    "IllegalAction",
    "RoundLog",
    "best_hand",
    "compare_hands",
    "compute_diff",
    "equivalent",
    "init_round",
    "invoke_core",
    "legal_actions",
    "load_preset",
    "match_combination",
    "merge",
    "oracle_best_hand",
    "parse_diff",
    "parse_script",
    "parse_state",
    "render_diff",
    "render_script",
    "run_round",
    "serialize_state",
    "step",
    "validate_spec",
    "validate_state",
    "view_for_player",
]
