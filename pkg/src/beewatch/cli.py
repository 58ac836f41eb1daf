"""Operator command line.

Exit codes: 0 success, 1 domain error, 2 usage error. Data goes to stdout,
diagnostics to stderr. Tables are fixed-width text with a CSV mirror under
``--format csv``.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import __version__
from .backends import parse_backend_spec
from .dataset import compute_stats, format_stats_table, histogram_csv, load_corpus
from .errors import BeewatchError
from .evaluation import evaluate_dataset, format_summary_table, load_predictions_dir, load_truth_dir, map_at
from .jobs import run_detection_job
from .pipeline import KeyframePolicy
from .timing import ADDITIVITY_TOLERANCE_MS, aggregate_timings


@click.group()
@click.version_option(version=__version__, prog_name="beewatch")
def main():
    """Pollinator monitoring pipeline: evaluate, inspect, detect, serve."""


def _fail(exc: BeewatchError):
    raise click.ClickException(str(exc))


@main.command("eval")
@click.option("--truth", "truth_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--preds", "preds_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--iou-thresholds", default="", help="Comma-separated extra mAP thresholds.")
@click.option("--conf", default=0.25, show_default=True, help="Confidence operating point for P/R.")
@click.option("--name", default="model", show_default=True, help="Row label.")
@click.option("--format", "fmt", type=click.Choice(["text", "csv"]), default="text")
def cmd_eval(truth_dir, preds_dir, iou_thresholds, conf, name, fmt):
    """Score a prediction directory against truth annotations."""
    try:
        truth = load_truth_dir(truth_dir)
        predictions = load_predictions_dir(preds_dir)
        unmatched = sorted(set(predictions) - set(truth))
        if unmatched:
            for stem in unmatched:
                click.echo(f"prediction file without truth: {stem}.txt", err=True)
            raise click.ClickException(f"{len(unmatched)} unmatched prediction file(s)")
        for stem in truth:
            predictions.setdefault(stem, [])
        summary = evaluate_dataset(predictions, truth, conf_threshold=conf)
        if iou_thresholds:
            dets = [d for group in predictions.values() for d in group]
            gts = [g for group in truth.values() for g in group]
            for raw in iou_thresholds.split(","):
                t = float(raw)
                summary.extra_maps[t] = 100.0 * map_at(dets, gts, t)
        click.echo(format_summary_table({name: summary}, fmt=fmt), nl=False)
        if not summary.precision_defined or not summary.recall_defined:
            click.echo("note: * marks metrics with a zero denominator (reported as 100.0)", err=True)
    except BeewatchError as exc:
        _fail(exc)


@main.command("stats")
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Directory for histogram CSVs.")
def cmd_stats(dataset_dir, out_dir):
    """Corpus statistics from an annotation directory."""
    try:
        corpus = load_corpus(dataset_dir)
        stats = compute_stats(corpus)
    except BeewatchError as exc:
        _fail(exc)
    click.echo(format_stats_table(stats), nl=False)
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "boxes_per_image.csv").write_text(histogram_csv(stats.boxes_per_image), encoding="utf-8")
        (out / "annotation_area.csv").write_text(histogram_csv(stats.area_histogram), encoding="utf-8")
        (out / "aspect_ratio.csv").write_text(histogram_csv(stats.aspect_ratio_histogram), encoding="utf-8")
        click.echo(f"histograms written to {out}", err=True)


@main.command("detect")
@click.option("--video", "video_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--backend", "backend_spec", required=True, help="replay:DIR[,...] | model:PATH | mock:...")
@click.option("--stride", default=2, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--gallery/--no-gallery", default=True, show_default=True)
def cmd_detect(video_path, backend_spec, stride, seed, out_dir, gallery):
    """Run detection over a video and write report artifacts."""
    try:
        backend = parse_backend_spec(backend_spec, seed=seed)
        result, frames = run_detection_job(
            video_path, backend, out_dir,
            policy=KeyframePolicy(stride=stride), write_gallery=gallery,
        )
    except BeewatchError as exc:
        _fail(exc)
    click.echo(f"events: {len(result.events)}  gallery frames: {frames}", err=True)
    click.echo(f"artifacts written to {out_dir}", err=True)
    if result.truncated:
        click.echo(f"TRUNCATED: {result.truncation_reason} (partial artifacts)", err=True)
        sys.exit(1)


@main.command("bench")
@click.option("--video", "video_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--backend", "backend_spec", required=True)
@click.option("--repeat", default=1, show_default=True)
@click.option("--stride", default=2, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "csv"]), default="text")
def cmd_bench(video_path, backend_spec, repeat, stride, seed, fmt):
    """Mean per-frame stage timings over N repeats."""
    from .pipeline import process_video
    from .video import open_video

    try:
        backend = parse_backend_spec(backend_spec, seed=seed)
        timings = []
        for _ in range(repeat):
            with open_video(video_path) as source:
                result = process_video(source, backend, KeyframePolicy(stride=stride))
            timings.extend(event.timing for event in result.events)
        if not timings:
            raise click.ClickException("no keyframes produced no timings")
        mean = aggregate_timings(timings)
    except BeewatchError as exc:
        _fail(exc)

    flagged = not mean.is_additive()
    headers = ["Pre-process", "Inference", "NMS", "Total"]
    values = [
        f"{mean.pre_process_ms:.1f}",
        f"{mean.inference_ms:.1f}",
        f"{mean.nms_ms:.1f}",
        f"{mean.total_ms:.1f}" + ("*" if flagged else ""),
    ]
    if fmt == "csv":
        click.echo(",".join(headers))
        click.echo(",".join(values))
    else:
        widths = [max(len(h), len(v)) for h, v in zip(headers, values)]
        click.echo("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
        click.echo("  ".join(v.ljust(w) for v, w in zip(values, widths)))
    if flagged:
        click.echo(
            f"warning: total deviates from stage sum by more than {ADDITIVITY_TOLERANCE_MS} ms",
            err=True,
        )


@main.command("serve")
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", envvar="HIVE_DATA_DIR", default="./beewatch-data", show_default=True)
@click.option("--backend", "backend_spec", required=True)
@click.option("--workers", default=2, show_default=True)
@click.option("--stride", default=2, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--upload-limit-mb", default=512, show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(file_okay=False), default=None,
              help="Static frontend directory to serve at /.")
def cmd_serve(port, host, data_dir, backend_spec, workers, stride, seed, upload_limit_mb, ui_dir):
    """Serve the upload/report HTTP API (and optionally the web UI)."""
    import socket

    import uvicorn

    from .service import create_app

    probe = socket.socket()
    try:
        probe.bind((host, port))
    except OSError as exc:
        raise click.ClickException(f"cannot bind {host}:{port}: {exc}")
    finally:
        probe.close()

    try:
        app = create_app(
            data_dir, backend_spec, workers=workers, stride=stride, seed=seed,
            upload_limit=upload_limit_mb * 1024 * 1024, ui_dir=ui_dir,
        )
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except BeewatchError as exc:
        _fail(exc)
    except OSError as exc:
        raise click.ClickException(f"cannot bind {host}:{port}: {exc}")


if __name__ == "__main__":
    main()
