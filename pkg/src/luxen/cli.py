"""Command line interface: batch recommendations, the HTTP server, benchmarks."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .bench import BenchConfig, OPT_LEVELS, run_benchmark, width_scaling
from .errors import CsvFormatError, IntentParseError, IntentValidationError
from .frame import LoadOptions, load_csv
from .intent import parse_intent, validate_intent
from .metadata import compute_metadata
from .optimize import Engine, EngineConfig
from .specdoc import serialize_spec_doc, to_spec_doc


def _engine_options(fn):
    fn = click.option(
        "--sample-cap", envvar="LUXEN_SAMPLE_CAP", default=30000, show_default=True
    )(fn)
    fn = click.option("--k", envvar="LUXEN_TOPK", default=15, show_default=True)(fn)
    fn = click.option(
        "--prune-margin", envvar="LUXEN_PRUNE_MARGIN", default=2.0, show_default=True
    )(fn)
    fn = click.option(
        "--parallelism", envvar="LUXEN_PARALLELISM", default=0, show_default=True
    )(fn)
    return fn


@click.group()
def main():
    """Always-on visualization recommendations for tabular data."""


@main.command()
@click.argument("input_csv", type=click.Path(path_type=Path))
@click.option("--intent", "intent_clauses", multiple=True, help="Clause strings; repeatable or comma-separated.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=Path("specs"), show_default=True)
@click.option("--delimiter", default=",", show_default=True)
@click.option("--seed", default=17, show_default=True)
@click.option("--no-prune", is_flag=True)
@click.option("--no-async", is_flag=True)
@click.option("--no-memoize", is_flag=True)
@_engine_options
def recommend(
    input_csv,
    intent_clauses,
    out_dir,
    delimiter,
    seed,
    no_prune,
    no_async,
    no_memoize,
    sample_cap,
    k,
    prune_margin,
    parallelism,
):
    """Generate a ranked dashboard for a CSV and write spec documents."""
    try:
        with open(input_csv, "rb") as fh:
            frame = load_csv(fh, LoadOptions(delimiter=delimiter), name=input_csv.stem)
    except OSError as e:
        click.echo(f"error: cannot read {input_csv}: {e}", err=True)
        sys.exit(1)
    except CsvFormatError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)

    config = EngineConfig(
        sample_cap=sample_cap,
        top_k=k,
        prune_margin=prune_margin,
        parallelism=parallelism,
        prune=not no_prune,
        async_scheduling=not no_async,
        memoize=not no_memoize,
        seed=seed,
    )
    engine = Engine(config)

    clauses = []
    for chunk in intent_clauses:
        clauses.extend(part.strip() for part in chunk.split(",") if part.strip())
    if clauses:
        try:
            intent = parse_intent(clauses)
            _, warnings = validate_intent(intent, compute_metadata(frame))
        except (IntentParseError, IntentValidationError) as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(2)
        for w in warnings:
            click.echo(f"warning: {w.message}", err=True)
        frame.set_intent(intent)

    dashboard = engine.recommend(frame, k)

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        manifest = {"input": str(input_csv), "k": k, "actions": []}
        for rec in dashboard.recommendations:
            entry = {"action": rec.action_name, "note": rec.note, "vises": []}
            for rank, vis in enumerate(rec.vises):
                filename = f"{rec.action_name}-{rank}.json"
                (out_dir / filename).write_bytes(serialize_spec_doc(to_spec_doc(vis)))
                entry["vises"].append(
                    {"file": filename, "score": vis.score, "signature": vis.signature}
                )
            manifest["actions"].append(entry)
        (out_dir / "manifest.json").write_text(
            json.dumps(manifest, indent=2), encoding="utf-8"
        )
    except OSError as e:
        click.echo(f"error: cannot write output: {e}", err=True)
        sys.exit(1)

    total = sum(len(r.vises) for r in dashboard.recommendations)
    click.echo(f"wrote {total} spec documents to {out_dir}")
    for d in dashboard.diagnostics:
        click.echo(f"note: {d}", err=True)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8787, show_default=True)
@click.option("--no-prune", is_flag=True)
@click.option("--no-async", is_flag=True)
@_engine_options
def serve(host, port, no_prune, no_async, sample_cap, k, prune_margin, parallelism):
    """Run the HTTP/SSE service."""
    from .server import serve_endpoints

    config = EngineConfig(
        sample_cap=sample_cap,
        top_k=k,
        prune_margin=prune_margin,
        parallelism=parallelism,
        prune=not no_prune,
        async_scheduling=not no_async,
    )
    serve_endpoints(config, host=host, port=port)


@main.command()
@click.option("--rows", default=100_000, show_default=True)
@click.option("--cols", default=50, show_default=True)
@click.option(
    "--opt-level",
    "opt_levels",
    multiple=True,
    type=click.Choice(OPT_LEVELS),
    help="Repeatable; defaults to all levels.",
)
@click.option("--reps", default=1, show_default=True)
@click.option("--seed", default=11, show_default=True)
@click.option("--k", default=15, show_default=True)
@click.option("--sample-cap", default=30_000, show_default=True)
@click.option("--widths", default="", help="Comma-separated widths for the scaling sweep (optional).")
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None)
def bench(rows, cols, opt_levels, reps, seed, k, sample_cap, widths, out_path):
    """Replay the scripted workload across optimization levels."""
    config = BenchConfig(
        rows=rows,
        cols=cols,
        opt_levels=tuple(opt_levels) if opt_levels else OPT_LEVELS,
        repetitions=reps,
        seed=seed,
        k=k,
        sample_cap=sample_cap,
    )
    report = run_benchmark(config)
    click.echo(report.text_table())
    payload = report.to_dict()
    if widths:
        ws = [int(w) for w in widths.split(",") if w.strip()]
        scaling = width_scaling(ws, rows=rows, seed=seed)
        payload["width_scaling"] = scaling
        for level, data in scaling.items():
            fit = data["fit"]
            click.echo(
                f"width fit {level}: t = {fit['a']:.4f} + {fit['b']:.3g} * w^{fit['c']:.2f}"
            )
    if out_path is not None:
        out_path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
        click.echo(f"report written to {out_path}")


if __name__ == "__main__":
    main()
