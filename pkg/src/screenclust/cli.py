"""Command-line pipeline driver."""

import csv
import json
import math
import os
import sys
import threading
import time
from pathlib import Path

import click
import numpy as np

from . import clustering, corpus, features as features_mod, matrixio, text as text_mod
from .image import HogConfig
from .propagate import SimulatedOracle
from .session import SessionConfig, SessionStore

METRIC_COLUMNS = [
    "iteration", "labels_seen",
    "silhouette", "dunn", "davies_bouldin",
    "silhouette_aug", "dunn_aug", "davies_bouldin_aug",
]


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _default_out():
    return os.environ.get("SCREENCLUST_OUT", ".")


@click.group()
def main():
    """Semi-supervised screenshot clustering pipeline."""


@main.command("ingest")
@click.option("--manifest", required=True, type=click.Path())
@click.option("--reservoir-k", default=500, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=None, type=click.Path())
def cmd_ingest(manifest, reservoir_k, seed, out):
    """Stratified reservoir sample of a manifest, one reservoir per bucket."""
    out = Path(out or _default_out())
    try:
        items = corpus.load_manifest(manifest)
    except FileNotFoundError:
        _fail(2, f"manifest not found: {manifest}")
    except corpus.ManifestError as exc:
        _fail(2, f"{manifest}: {exc}")
    spec = corpus.SampleSpec(reservoir_k=reservoir_k, rng_seed=seed)
    sampled = corpus.stratified_sample(corpus.group_by_bucket(items), spec)
    out.mkdir(parents=True, exist_ok=True)
    target = out / "sampled_manifest.jsonl"
    corpus.save_manifest(sampled, target)
    click.echo(f"sampled {len(sampled)} of {len(items)} items -> {target}")


@main.command("features")
@click.option("--manifest", required=True, type=click.Path())
@click.option("--mode", type=click.Choice(["image", "joint"]), default="image",
              show_default=True)
@click.option("--embeddings", default=None, type=click.Path(),
              help="embedding table file; required for joint mode")
@click.option("--out", default=None, type=click.Path())
def cmd_features(manifest, mode, embeddings, out):
    """HOG (and optionally fused text-embedding) feature matrices."""
    out = Path(out or _default_out())
    try:
        items = corpus.load_manifest(manifest)
    except FileNotFoundError:
        _fail(2, f"manifest not found: {manifest}")
    except corpus.ManifestError as exc:
        _fail(2, f"{manifest}: {exc}")
    if mode == "joint" and not embeddings:
        raise click.UsageError("--embeddings is required for joint mode")

    rejects = []
    visual, kept = features_mod.featurize_visual(
        items, HogConfig(), on_error=lambda item, exc: rejects.append((item, exc)))
    if mode == "joint":
        try:
            table = text_mod.EmbeddingTable.load(embeddings)
        except FileNotFoundError:
            _fail(2, f"embeddings not found: {embeddings}")
        matrix = features_mod.fuse(visual, features_mod.featurize_text(kept, table))
        stage = "joint"
    else:
        matrix, stage = visual, "hog"

    out.mkdir(parents=True, exist_ok=True)
    matrixio.save_matrix(out / "features.scfm", matrix, stage)
    corpus.save_manifest(kept, out / "featurized_manifest.jsonl")
    with open(out / "rejects.txt", "w", encoding="utf-8") as fh:
        for item, exc in rejects:
            fh.write(f"{item.id}\t{exc}\n")
    if rejects:
        click.echo(f"warning: skipped {len(rejects)} undecodable item(s)", err=True)
    click.echo(f"features {matrix.shape[0]}x{matrix.shape[1]} ({stage}) -> {out}")


@main.command("elbow")
@click.option("--features", "features_path", required=True, type=click.Path())
@click.option("--k-min", default=10, show_default=True)
@click.option("--k-max", default=100, show_default=True)
@click.option("--step", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--n-seeds", default=3, show_default=True)
@click.option("--fraction", default=0.8, show_default=True)
@click.option("--out", default=None, type=click.Path())
def cmd_elbow(features_path, k_min, k_max, step, seed, n_seeds, fraction, out):
    """SSE curve over a K grid; pick K at the cumulative-drop break."""
    out = Path(out or _default_out())
    try:
        _, matrix = matrixio.load_matrix(features_path)
    except FileNotFoundError:
        _fail(2, f"features not found: {features_path}")
    curve = clustering.elbow_scan(matrix, k_min=k_min, k_max=k_max, step=step,
                                  seeds=tuple(seed + i for i in range(n_seeds)))
    out.mkdir(parents=True, exist_ok=True)
    curve.save_csv(out / "sse.csv")
    try:
        chosen = clustering.pick_k_at_break(curve, fraction=fraction)
    except ValueError as exc:
        _fail(1, f"K selection failed: {exc}")
    (out / "chosen_k.txt").write_text(f"{chosen}\n")
    click.echo(f"chosen K = {chosen} (curve -> {out / 'sse.csv'})")


@main.command("run")
@click.option("--manifest", required=True, type=click.Path())
@click.option("--taxonomy", required=True, type=click.Path())
@click.option("--embeddings", default=None, type=click.Path())
@click.option("--mode", type=click.Choice(["image", "joint"]), default="image",
              show_default=True)
@click.option("--classifier", type=click.Choice(["gbt", "svm"]), default="gbt",
              show_default=True)
@click.option("--k", default=190, show_default=True)
@click.option("--batch", default=200, show_default=True)
@click.option("--iterations", default=10, show_default=True)
@click.option("--weight", default=10.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--oracle", required=True,
              help="'simulated:TRANSCRIPT.json' or 'serve:PORT'")
@click.option("--out", default=None, type=click.Path())
def cmd_run(manifest, taxonomy, embeddings, mode, classifier, k, batch,
            iterations, weight, seed, oracle, out):
    """Full active-learning run: featurize, cluster, query, propagate."""
    out = Path(out or _default_out())
    out.mkdir(parents=True, exist_ok=True)

    # featurize into the out dir so the session references stable paths
    ctx = click.get_current_context()
    ctx.invoke(cmd_features, manifest=manifest, mode=mode,
               embeddings=embeddings, out=str(out))

    config = SessionConfig(
        manifest_path=str(out / "featurized_manifest.jsonl"),
        features_path=str(out / "features.scfm"),
        taxonomy_path=taxonomy,
        k=k, batch_size=batch, iterations=iterations, classifier=classifier,
        proba_weight=weight, feature_mode=mode, seed=seed)

    store = SessionStore(out / "sessions")
    if oracle.startswith("simulated:"):
        transcript_path = oracle.split(":", 1)[1]
        try:
            sim = SimulatedOracle.load(transcript_path)
        except FileNotFoundError:
            _fail(2, f"oracle transcript not found: {transcript_path}")
        session = store.create(config)
        _drive_simulated(session, sim)
    elif oracle.startswith("serve:"):
        port = int(oracle.split(":", 1)[1])
        session = store.create(config)
        click.echo(f"session {session.session_id} serving on port {port}")
        _serve_until_complete(store, session, port)
    else:
        raise click.UsageError(f"unknown oracle spec {oracle!r}")

    write_metrics_csv(session.get_metrics(), out / "metrics.csv")
    final = session.engine.current
    matrixio.save_matrix(out / "final_centroids.scfm", final.centroids, "reduced")
    with open(out / "final_assignments.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["item_id", "cluster"])
        for item, label in zip(session.items, final.assignments):
            writer.writerow([item.id, int(label)])
    click.echo(f"run complete: {session.engine.iteration} iterations, "
               f"{len(session.engine.labeled)} labels -> {out}")


def _drive_simulated(session, sim_oracle):
    from .session import LabelRecord

    while not session.complete:
        batch = session.get_batch()
        if batch["complete"]:
            break
        answers = sim_oracle([it["id"] for it in batch["items"]])
        records = [LabelRecord(item_id, label_id, "simulated", "1970-01-01T00:00:00Z")
                   for item_id, label_id in answers.items()]
        session.submit_labels(records)


def _serve_until_complete(store, session, port):
    import uvicorn

    from .service import create_app

    app = create_app(store.root)
    app.state.store = store
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port,
                                           log_level="warning"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    try:
        while not session.complete:
            time.sleep(0.5)
    finally:
        server.should_exit = True
        thread.join(timeout=10)


def write_metrics_csv(metrics: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRIC_COLUMNS)
        for row in metrics:
            writer.writerow([
                row["iteration"], row["labels_seen"],
                *[repr(float(row[c])) for c in METRIC_COLUMNS[2:]],
            ])


@main.command("report")
@click.option("--metrics", "metrics_path", required=True, type=click.Path())
@click.option("--out", default=None, type=click.Path())
def cmd_report(metrics_path, out):
    """Per-index validity curves as standalone SVG line charts."""
    out = Path(out or _default_out())
    try:
        with open(metrics_path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except FileNotFoundError:
        _fail(2, f"metrics file not found: {metrics_path}")
    if not rows:
        _fail(2, f"{metrics_path}: no data rows")
    for col in ("labels_seen", "silhouette", "dunn", "davies_bouldin"):
        if col not in rows[0]:
            _fail(2, f"{metrics_path}: missing column {col!r}")

    out.mkdir(parents=True, exist_ok=True)
    xs = [float(r["labels_seen"]) for r in rows]
    for index, goal in (("silhouette", "maximize"), ("dunn", "maximize"),
                        ("davies_bouldin", "minimize")):
        ys = [float(r[index]) for r in rows]
        target = out / f"{index}.svg"
        _svg_line_plot(xs, ys, f"{index} ({goal}) vs labels seen", target)
        click.echo(f"wrote {target}")


def _svg_line_plot(xs, ys, title, path, width=640, height=400, margin=50):
    finite = [(x, y) for x, y in zip(xs, ys) if math.isfinite(y)]
    if not finite:
        finite = [(x, 0.0) for x in xs]
    fx = [p[0] for p in finite]
    fy = [p[1] for p in finite]
    x_lo, x_hi = min(fx), max(fx)
    y_lo, y_hi = min(fy), max(fy)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def sx(x):
        return margin + (x - x_lo) / x_span * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y_lo) / y_span * (height - 2 * margin)

    pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in finite)
    circles = "".join(
        f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="#1f77b4"/>'
        for x, y in finite)
    svg = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
        f'<rect width="{width}" height="{height}" fill="white"/>'
        f'<text x="{width / 2:.0f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>'
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>'
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height - margin}" stroke="black"/>'
        f'<text x="{margin}" y="{height - margin + 20}" font-family="sans-serif" '
        f'font-size="11">{x_lo:g}</text>'
        f'<text x="{width - margin}" y="{height - margin + 20}" text-anchor="end" '
        f'font-family="sans-serif" font-size="11">{x_hi:g}</text>'
        f'<text x="{margin - 5}" y="{height - margin}" text-anchor="end" '
        f'font-family="sans-serif" font-size="11">{y_lo:g}</text>'
        f'<text x="{margin - 5}" y="{margin + 4}" text-anchor="end" '
        f'font-family="sans-serif" font-size="11">{y_hi:g}</text>'
        f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="2"/>'
        f"{circles}</svg>"
    )
    Path(path).write_text(svg, encoding="utf-8")


if __name__ == "__main__":
    main()
