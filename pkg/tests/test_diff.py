"""Diff language: codec roundtrips, merge semantics, core functions, and
snippet equivalence."""

import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from cardroom import engine, presets
from cardroom.diff import (
    AppendOp,
    ArityMismatch,
    BadPath,
    CallOp,
    CoreFnFailure,
    DiffScript,
    IllegalState,
    MalformedOp,
    MoveOp,
    RemoveOp,
    SetOp,
    UnknownCoreFn,
    compute_diff,
    equivalent,
    invoke_core,
    layered_pots,
    merge,
    parse_diff,
    registry_manifest,
    render_diff,
)


def test_compute_diff_identity(texas):
    s = engine.init_round(texas, 0)
    assert compute_diff(s, s).ops == ()
    assert merge(s, DiffScript()) == s


def test_merge_roundtrip_on_seeded_rounds(seeded_logs):
    for log in seeded_logs:
        for t in log.transitions:
            d = compute_diff(t.prev, t.next)
            assert merge(t.prev, d, log.spec) == t.next


def test_engine_diffs_replay(seeded_logs):
    for log in seeded_logs:
        for t in log.transitions:
            assert merge(t.prev, t.diff, log.spec) == t.next


def test_shuffle_transition_is_core_call(texas):
    log = engine.run_round(texas, 3, {p: _caller() for p in texas.seats()})
    shuffle_ts = [t for t in log.transitions if t.category == "shuffle"]
    assert shuffle_ts
    for t in shuffle_ts:
        calls = [op for op in t.diff.ops if isinstance(op, CallOp)]
        assert len(calls) == 1 and calls[0].name == "shuffle"
        assert calls[0].arg_dict() == {"seed": t.seed}


def test_raise_diff_touches_expected_keys(texas):
    log = engine.run_round(texas, 5, {p: _raiser() for p in texas.seats()})
    raise_ts = [t for t in log.transitions
                if t.input.action == "raise"]
    assert raise_ts
    allowed = {"stacks", "street_bets", "current_actor", "messages", "to_act",
               "folded", "all_in", "flow_cache", "pots"}
    for t in raise_ts:
        touched = set()
        for op in t.diff.ops:
            if isinstance(op, (SetOp, AppendOp)):
                touched.add(op.path.split("/")[0])
            elif isinstance(op, CallOp):
                touched.update({"pots", "street_bets", "current_actor", "messages"})
        assert touched <= allowed
        assert "stacks" in touched and "street_bets" in touched


def _caller():
    def policy(spec, view, legal):
        for kind in ("check", "call"):
            for a in sorted(legal, key=lambda a: (a.kind, a.amount or 0, a.cards)):
                if a.kind == kind:
                    return a
        return sorted(legal, key=lambda a: (a.kind, a.amount or 0, a.cards))[0]
    return policy


def _raiser():
    state = {"raised": 0}

    def policy(spec, view, legal):
        by_kind = {}
        for a in sorted(legal, key=lambda a: (a.kind, a.amount or 0, a.cards)):
            by_kind.setdefault(a.kind, a)
        if "raise" in by_kind and state["raised"] < 3:
            state["raised"] += 1
            return by_kind["raise"]
        return by_kind.get("check") or by_kind.get("call") or next(iter(by_kind.values()))
    return policy


# ---------------------------------------------------------------------------
# Text codec
# ---------------------------------------------------------------------------

def test_grammar_cases():
    d = parse_diff("call shuffle seed=42")
    assert d.ops == (CallOp("shuffle", (("seed", 42),)),)
    with pytest.raises(UnknownCoreFn):
        parse_diff("call shufle seed=1")
    with pytest.raises(MalformedOp):
        parse_diff("set stacks/1")
    with pytest.raises(MalformedOp):
        parse_diff("frobnicate deck")


def test_render_parse_roundtrip_engine_diffs(seeded_logs):
    for log in seeded_logs:
        for t in log.transitions:
            text = render_diff(t.diff)
            assert parse_diff(text) == t.diff
            assert render_diff(parse_diff(text)) == text


_paths = st.sampled_from(["deck", "community", "stacks/1", "stacks/2", "hole/1",
                          "current_actor", "button", "flow_cache", "messages"])
_values = st.one_of(st.integers(-100, 100), st.text(alphabet="HDCS123456789 ->:", max_size=12),
                    st.lists(st.text(alphabet="HDCS19", min_size=1, max_size=3), max_size=4),
                    st.none())
_ops = st.one_of(
    st.builds(SetOp, _paths, _values),
    st.builds(AppendOp, _paths, _values),
    st.builds(RemoveOp, _paths),
    st.builds(MoveOp, st.just("deck"), st.integers(0, 3), st.just("hole/1")),
    st.builds(lambda s: CallOp("shuffle", (("seed", s),)), st.integers(0, 2**31)),
    st.builds(lambda n: CallOp("deal", (("n", n),)), st.integers(1, 4)),
)


@settings(max_examples=400, deadline=None)
@given(st.lists(_ops, max_size=8).map(tuple).map(DiffScript))
def test_random_script_roundtrip(script):
    assert parse_diff(render_diff(script)) == script


def test_generator_roundtrip_10k():
    rng = random.Random(202)
    paths = ["deck", "community", "stacks/1", "stacks/2", "hole/3", "pots/0/amount",
             "current_actor", "flow_cache", "messages", "to_act"]
    values = [0, -5, 173, None, "H9", "engine->all: hi", ["H2", "D4"], [], [1, 2, 3]]
    for _ in range(10_000):
        ops = []
        for _ in range(rng.randint(0, 6)):
            kind = rng.choice(("set", "append", "remove", "move", "call"))
            if kind == "set":
                ops.append(SetOp(rng.choice(paths), rng.choice(values)))
            elif kind == "append":
                ops.append(AppendOp(rng.choice(paths), rng.choice(values)))
            elif kind == "remove":
                ops.append(RemoveOp(rng.choice(paths)))
            elif kind == "move":
                ops.append(MoveOp("deck", rng.randint(0, 5), rng.choice(paths)))
            else:
                ops.append(CallOp("shuffle", (("seed", rng.randrange(2**31)),)))
        script = DiffScript(tuple(ops))
        assert parse_diff(render_diff(script)) == script


# ---------------------------------------------------------------------------
# Core functions
# ---------------------------------------------------------------------------

def test_shuffle_permutes_only(texas):
    s = engine.init_round(texas, 0)
    out = invoke_core("shuffle", {"seed": 42}, s)
    assert Counter(out.deck) == Counter(s.deck)
    assert out.deck != s.deck
    # seeded determinism
    again = invoke_core("shuffle", {"seed": 42}, s)
    assert again.deck == out.deck


def test_deal_round_robin(texas):
    s = engine.init_round(texas, 0)
    out = invoke_core("deal", {"n": 2}, s)
    n = texas.num_players
    assert len(out.deck) == len(s.deck) - 2 * n
    # one at a time: player left of button got deck[0] and deck[n]
    first = engine._nth_after(texas.seats(), s.button, 1)
    assert out.hole[first] == [s.deck[0], s.deck[n]]
    for p in texas.seats():
        assert len(out.hole[p]) == 2


def test_deal_exhaustion():
    spec = presets.load_preset("texas_holdem")
    s = engine.init_round(spec, 0)
    with pytest.raises(IllegalState):
        invoke_core("deal", {"n": 20}, s)


def test_invoke_unknown_and_arity(texas):
    s = engine.init_round(texas, 0)
    with pytest.raises(UnknownCoreFn):
        invoke_core("nope", {}, s)
    with pytest.raises(ArityMismatch):
        invoke_core("shuffle", {}, s)
    with pytest.raises(ArityMismatch):
        invoke_core("shuffle", {"seed": 1, "extra": 2}, s)


def test_rank_hands_needs_spec(texas):
    s = engine.init_round(texas, 0)
    with pytest.raises(CoreFnFailure):
        invoke_core("rank_hands", {"strategy": 0}, s, spec=None)


def test_merge_bad_path(texas):
    s = engine.init_round(texas, 0)
    with pytest.raises(BadPath):
        merge(s, DiffScript((SetOp("stacks/99/nested", 1),)))


def test_registry_manifest_shape():
    manifest = registry_manifest()
    names = {m["name"] for m in manifest}
    assert {"shuffle", "deal", "flop", "sort_hand", "rank_hands",
            "collect_bets", "next_actor"} <= names
    for m in manifest:
        assert m["signature"] and m["doc"]


def test_sort_hand(texas):
    s = engine.init_round(texas, 0)
    out = invoke_core("deal", {"n": 5}, s)
    sorted_state = invoke_core("sort_hand", {"player": 1}, out, spec=texas)
    hole = sorted_state.hole[1]
    suits = {c: i for i, c in enumerate(texas.suit_spec.suits)}
    values = {v: i for i, v in enumerate(texas.value_spec.ordered)}
    keys = [(suits[c[0]], values[c[1:]]) for c in hole]
    assert keys == sorted(keys)
    assert Counter(hole) == Counter(out.hole[1])


# ---------------------------------------------------------------------------
# Side-pot layering
# ---------------------------------------------------------------------------

def test_layered_pots_examples():
    # all three all-in for 10/20/30
    pots = layered_pots({1: 10, 2: 20, 3: 30}, {1, 2, 3}, set())
    assert [(a, sorted(e)) for a, e in pots] == [(30, [1, 2, 3]), (20, [2, 3]), (10, [3])]
    # no all-in: single pot for the non-folded
    pots = layered_pots({1: 10, 2: 10, 3: 10}, set(), set())
    assert [(a, sorted(e)) for a, e in pots] == [(30, [1, 2, 3])]
    # equal contributions, one folded
    pots = layered_pots({1: 10, 2: 10, 3: 10}, set(), {3})
    assert [(a, sorted(e)) for a, e in pots] == [(30, [1, 2])]


def test_build_side_pots_wrapper():
    pots = engine.build_side_pots({1: 10, 2: 20, 3: 30}, {1, 2, 3}, set())
    assert [p.amount for p in pots] == [30, 20, 10]
    # nested descending eligibility
    for a, b in zip(pots, pots[1:]):
        assert b.eligible < a.eligible


# ---------------------------------------------------------------------------
# Equivalence
# ---------------------------------------------------------------------------

def test_equivalent_identical_without_execution(texas):
    s = engine.init_round(texas, 0)
    text = "set button 1\n"
    assert equivalent(text, text, s, texas).equivalent


def test_equivalent_reordered_ops(texas):
    s = engine.init_round(texas, 0)
    a = "set stacks/1 90\nset stacks/2 80\n"
    b = "set stacks/2 80\nset stacks/1 90\n"
    assert equivalent(a, b, s, texas).equivalent


def test_equivalent_detects_missing_update(texas):
    log = engine.run_round(texas, 11, {p: _caller() for p in texas.seats()})
    t = next(t for t in log.transitions if t.input.action == "call")
    gold = render_diff(t.diff)
    # drop the stack update from the prediction
    pruned = DiffScript(tuple(op for op in t.diff.ops
                              if not (isinstance(op, SetOp) and op.path.startswith("stacks"))))
    res = equivalent(render_diff(pruned), gold, t.prev, texas)
    assert not res.equivalent
    assert "stacks" in res.reason


def test_equivalent_parse_failure_is_verdict(texas):
    s = engine.init_round(texas, 0)
    res = equivalent("call shufle", "set button 1\n", s, texas)
    assert not res.equivalent
    assert res.reason.startswith("parse_error")


def test_equivalent_symmetric_when_both_parse(texas):
    s = engine.init_round(texas, 0)
    rng = random.Random(4)
    snippets = ["set button 1\n", "set button 2\n", "set stacks/1 50\n",
                "set stacks/1 50\nset button 1\n"]
    for _ in range(20):
        a, b = rng.choice(snippets), rng.choice(snippets)
        assert (equivalent(a, b, s, texas).equivalent
                == equivalent(b, a, s, texas).equivalent)


def test_equivalent_reflexive_on_engine_diffs(seeded_logs):
    for log in seeded_logs[:3]:
        for t in log.transitions:
            text = render_diff(t.diff)
            assert equivalent(text, text, t.prev, log.spec).equivalent
