"""Command-line entry points: simulate rounds, build corpora, score
predictions, and serve interactive play."""

from __future__ import annotations

import json

import click

from . import datagen as dg
from . import evalharness as ev
from .diff import registry_manifest, render_diff
from .presets import BASE_PRESETS, load_preset
from .state import serialize_state


@click.group()
def main():
    """Rule-configurable poker engine and corpus tooling."""


@main.command()
@click.option("--preset", "presets", multiple=True, default=("texas_holdem",),
              help="Preset name; repeat for several.")
@click.option("--rounds", default=20, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def simulate(presets, rounds, seed, out):
    """Run seeded rounds with random players and write a transition log."""
    rows = []
    for name in presets:
        spec = load_preset(name)
        for r in range(rounds):
            round_seed = (seed * 7919 + r) & 0x7FFFFFFF
            log = dg.simulate_round(spec, round_seed)
            rid = f"{name}-{round_seed}"
            for i, t in enumerate(log.transitions):
                rows.append({
                    "round_id": rid,
                    "step_idx": i,
                    "category": t.category,
                    "input": t.input.render(),
                    "diff": render_diff(t.diff),
                    "next_state": serialize_state(t.next),
                })
    dg.write_ndjson(rows, out)
    click.echo(f"wrote {len(rows)} transitions over "
               f"{rounds * len(presets)} rounds to {out}")


@main.command("datagen")
@click.option("--preset", "presets", multiple=True,
              help="Preset name; repeat for several. Default: all ten.")
@click.option("--variants", default=0, show_default=True,
              help="Sampled rule variants per preset, in addition to the preset itself.")
@click.option("--rounds", default=10, show_default=True, help="Rounds per game spec.")
@click.option("--mode", type=click.Choice(["nsp", "dsp"]), default="dsp", show_default=True)
@click.option("--balance", "balance_file", type=click.Path(exists=True, dir_okay=False),
              help="JSON list of {key, weight} balance targets.")
@click.option("--seed", default=0, show_default=True)
@click.option("--max-samples", default=None, type=int)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def datagen_cmd(presets, variants, rounds, mode, balance_file, seed, max_samples, out):
    """Generate a training corpus of per-transition samples."""
    names = presets or BASE_PRESETS
    targets = None
    if balance_file:
        with open(balance_file, encoding="utf-8") as f:
            targets = [dg.BalanceTarget(d["key"], d["weight"]) for d in json.load(f)]
    logs = dg.generate_logs(names, rounds, seed, variants)
    records = dg.build_corpus(logs, mode.upper(), targets, seed, max_samples)
    dg.write_ndjson(records, out)
    stats = dg.corpus_stats(records)
    click.echo(json.dumps(stats, sort_keys=True))
    click.echo(f"wrote {len(records)} samples to {out}")


@main.command("eval")
@click.option("--gold", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--pred", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["nsp", "dsp"]), default=None,
              help="Expected corpus mode (checked against the gold file).")
@click.option("--report", "report_path", required=True, type=click.Path(dir_okay=False))
@click.option("--json", "json_path", type=click.Path(dir_okay=False))
def eval_cmd(gold, pred, mode, report_path, json_path):
    """Score a prediction file against a gold corpus."""
    gold_records = dg.read_corpus(gold)
    if mode and gold_records and gold_records[0].mode != mode.upper():
        raise click.ClickException(
            f"gold corpus is {gold_records[0].mode}, not {mode.upper()}")
    preds = ev.read_predictions(pred)
    report = ev.score_states(gold_records, preds)
    text = ev.render_report(report)
    with open(report_path, "w", encoding="utf-8") as f:
        f.write(text)
    if json_path:
        with open(json_path, "w", encoding="utf-8") as f:
            json.dump(report.to_dict(), f, sort_keys=True, indent=2)
            f.write("\n")
    click.echo(text)


@main.command()
@click.option("--n", default=1000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def coreset(n, seed, out):
    """Emit the core-function instruction warmup set."""
    pairs = dg.emit_core_set(n=n, seed=seed)
    dg.write_ndjson(pairs, out)
    click.echo(f"wrote {len(pairs)} instruction pairs to {out}")


@main.command()
def registry():
    """Print the core-function registry manifest."""
    click.echo(json.dumps(registry_manifest(), indent=2, sort_keys=True))


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", default=None, type=click.Path(file_okay=False),
              help="Directory for append-only session event files.")
def serve(port, host, data_dir):
    """Serve the interactive play API."""
    import uvicorn

    from .service import PlayService, build_app

    app = build_app(PlayService(data_dir))
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
