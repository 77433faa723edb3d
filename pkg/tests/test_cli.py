import csv
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from click.testing import CliRunner
from PIL import Image

from screenclust import corpus, matrixio
from screenclust.cli import main, write_metrics_csv


@pytest.fixture
def runner():
    return CliRunner()


def _make_images(directory, n, seed=7):
    rng = np.random.default_rng(seed)
    paths = []
    directory.mkdir(parents=True, exist_ok=True)
    for i in range(n):
        arr = np.zeros((48, 80, 3), dtype=np.uint8)
        arr[:, (i % 4 + 1) * 16:, :] = 200
        arr += rng.integers(0, 30, arr.shape, dtype=np.uint8)
        path = directory / f"img{i}.png"
        Image.fromarray(arr).save(path)
        paths.append(path)
    return paths


def _image_manifest(tmp_path, n, texts=None):
    paths = _make_images(tmp_path / "img", n)
    items = [corpus.Item(id=f"i{i:02d}", image_path=str(p), bucket=f"b{i % 2}",
                         text=(texts[i] if texts else ""))
             for i, p in enumerate(paths)]
    manifest = tmp_path / "manifest.jsonl"
    corpus.save_manifest(items, manifest)
    return manifest, items


class TestIngest:
    def test_samples_per_bucket(self, runner, tmp_path):
        manifest, _ = _image_manifest(tmp_path, 12)
        out = tmp_path / "out"
        result = runner.invoke(main, ["ingest", "--manifest", str(manifest),
                                      "--reservoir-k", "3", "--out", str(out)])
        assert result.exit_code == 0, result.output
        sampled = corpus.load_manifest(out / "sampled_manifest.jsonl")
        assert len(sampled) == 6  # 3 per bucket, 2 buckets
        buckets = [it.bucket for it in sampled]
        assert buckets.count("b0") == buckets.count("b1") == 3

    def test_missing_manifest_exit_2(self, runner, tmp_path):
        result = runner.invoke(main, ["ingest", "--manifest",
                                      str(tmp_path / "nope.jsonl")])
        assert result.exit_code == 2
        assert "not found" in result.output

    def test_malformed_manifest_exit_2(self, runner, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("not json\n")
        result = runner.invoke(main, ["ingest", "--manifest", str(bad)])
        assert result.exit_code == 2


class TestFeatures:
    def test_image_mode_dimensions(self, runner, tmp_path):
        manifest, _ = _image_manifest(tmp_path, 5)
        out = tmp_path / "out"
        result = runner.invoke(main, ["features", "--manifest", str(manifest),
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        stage, matrix = matrixio.load_matrix(out / "features.scfm")
        assert stage == "hog"
        assert matrix.shape == (5, 34596)
        assert (out / "rejects.txt").read_text() == ""
        assert len(corpus.load_manifest(out / "featurized_manifest.jsonl")) == 5

    def test_joint_mode_appends_embedding_dims(self, runner, tmp_path):
        manifest, _ = _image_manifest(
            tmp_path, 5, texts=["login page", "video feed", "settings menu",
                                "login feed", "video menu"])
        emb = tmp_path / "emb.txt"
        tokens = ["login", "page", "video", "feed", "settings", "menu"]
        rng = np.random.default_rng(0)
        emb.write_text("".join(
            f"{t} {' '.join(f'{v:.4f}' for v in rng.standard_normal(3))}\n"
            for t in tokens))
        out = tmp_path / "out"
        result = runner.invoke(main, ["features", "--manifest", str(manifest),
                                      "--mode", "joint", "--embeddings", str(emb),
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        stage, matrix = matrixio.load_matrix(out / "features.scfm")
        assert stage == "joint"
        assert matrix.shape == (5, 34596 + 3)

    def test_joint_mode_requires_embeddings(self, runner, tmp_path):
        manifest, _ = _image_manifest(tmp_path, 2)
        result = runner.invoke(main, ["features", "--manifest", str(manifest),
                                      "--mode", "joint"])
        assert result.exit_code == 2
        assert "--embeddings" in result.output

    def test_corrupt_image_goes_to_rejects(self, runner, tmp_path):
        manifest, items = _image_manifest(tmp_path, 4)
        broken = tmp_path / "img" / "broken.png"
        broken.write_bytes(b"this is not a png")
        items = list(items) + [corpus.Item(id="ibad", image_path=str(broken),
                                           bucket="b0")]
        corpus.save_manifest(items, manifest)
        out = tmp_path / "out"
        result = runner.invoke(main, ["features", "--manifest", str(manifest),
                                      "--out", str(out)])
        assert result.exit_code == 0
        assert "skipped 1" in result.output
        _, matrix = matrixio.load_matrix(out / "features.scfm")
        assert matrix.shape[0] == 4
        assert (out / "rejects.txt").read_text().startswith("ibad\t")
        kept = corpus.load_manifest(out / "featurized_manifest.jsonl")
        assert "ibad" not in {it.id for it in kept}


def _cluster_features(tmp_path, seed=0):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
    pts = np.vstack([rng.normal(c, 0.4, (30, 2)) for c in centers])
    path = tmp_path / "clustered.scfm"
    matrixio.save_matrix(path, pts, "reduced")
    return path


class TestElbow:
    def test_curve_and_choice(self, runner, tmp_path):
        feats = _cluster_features(tmp_path)
        out = tmp_path / "out"
        result = runner.invoke(main, ["elbow", "--features", str(feats),
                                      "--k-min", "1", "--k-max", "6",
                                      "--step", "1", "--out", str(out)])
        assert result.exit_code == 0, result.output
        with open(out / "sse.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["k", "sse"]
        assert [r[0] for r in rows[1:]] == ["1", "2", "3", "4", "5", "6"]
        # chosen K is the smallest K whose cumulative SSE drop crosses 80%
        sse = [float(r[1]) for r in rows[1:]]
        drops = np.cumsum(-np.diff(sse))
        expected = 1 + int(np.argmax(drops >= 0.8 * drops[-1])) + 1
        chosen = int((out / "chosen_k.txt").read_text())
        assert chosen == expected
        assert chosen in (2, 3)  # three blobs, two dominant gaps

    def test_flat_curve_exit_1(self, runner, tmp_path):
        feats = _cluster_features(tmp_path)
        result = runner.invoke(main, ["elbow", "--features", str(feats),
                                      "--k-min", "2", "--k-max", "2",
                                      "--out", str(tmp_path / "out")])
        assert result.exit_code == 1
        assert "K selection failed" in result.output

    def test_missing_features_exit_2(self, runner, tmp_path):
        result = runner.invoke(main, ["elbow", "--features",
                                      str(tmp_path / "nope.scfm")])
        assert result.exit_code == 2


class TestRun:
    def _setup(self, tmp_path):
        manifest, items = _image_manifest(tmp_path, 12)
        taxonomy = tmp_path / "taxonomy.txt"
        taxonomy.write_text("Facebook\nYoutube\nSettings\n")
        transcript = tmp_path / "oracle.json"
        transcript.write_text(json.dumps(
            {it.id: i % 3 for i, it in enumerate(items)}))
        return manifest, taxonomy, transcript

    def _run(self, runner, manifest, taxonomy, transcript, out):
        return runner.invoke(main, [
            "run", "--manifest", str(manifest), "--taxonomy", str(taxonomy),
            "--k", "2", "--batch", "3", "--iterations", "1", "--seed", "0",
            "--oracle", f"simulated:{transcript}", "--out", str(out)])

    def test_simulated_run_outputs(self, runner, tmp_path):
        manifest, taxonomy, transcript = self._setup(tmp_path)
        out = tmp_path / "out"
        result = self._run(runner, manifest, taxonomy, transcript, out)
        assert result.exit_code == 0, result.output

        with open(out / "metrics.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert [r["iteration"] for r in rows] == ["0", "1"]
        assert rows[1]["labels_seen"] == "3"
        assert "silhouette_aug" in rows[0]

        _, centroids = matrixio.load_matrix(out / "final_centroids.scfm")
        assert centroids.shape[0] == 2
        with open(out / "final_assignments.csv", newline="") as fh:
            assignments = list(csv.DictReader(fh))
        assert len(assignments) == 12
        assert {r["cluster"] for r in assignments} <= {"0", "1"}

    def test_rerun_metrics_bit_identical(self, runner, tmp_path):
        manifest, taxonomy, transcript = self._setup(tmp_path)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert self._run(runner, manifest, taxonomy, transcript, out_a).exit_code == 0
        assert self._run(runner, manifest, taxonomy, transcript, out_b).exit_code == 0
        assert (out_a / "metrics.csv").read_bytes() == (out_b / "metrics.csv").read_bytes()
        assert (out_a / "final_assignments.csv").read_bytes() == \
            (out_b / "final_assignments.csv").read_bytes()

    def test_missing_transcript_exit_2(self, runner, tmp_path):
        manifest, taxonomy, _ = self._setup(tmp_path)
        result = runner.invoke(main, [
            "run", "--manifest", str(manifest), "--taxonomy", str(taxonomy),
            "--k", "2", "--batch", "3", "--iterations", "1",
            "--oracle", f"simulated:{tmp_path / 'nope.json'}",
            "--out", str(tmp_path / "out")])
        assert result.exit_code == 2

    def test_unknown_oracle_spec_exit_2(self, runner, tmp_path):
        manifest, taxonomy, transcript = self._setup(tmp_path)
        result = runner.invoke(main, [
            "run", "--manifest", str(manifest), "--taxonomy", str(taxonomy),
            "--oracle", "psychic", "--out", str(tmp_path / "out")])
        assert result.exit_code == 2


class TestReport:
    def _metrics_file(self, tmp_path):
        metrics = []
        for i in range(4):
            metrics.append({
                "iteration": i, "labels_seen": i * 5,
                "silhouette": 0.2 + 0.1 * i, "dunn": 0.5 + 0.2 * i,
                "davies_bouldin": 2.0 - 0.3 * i,
                "silhouette_aug": 0.25 + 0.1 * i, "dunn_aug": 0.6 + 0.2 * i,
                "davies_bouldin_aug": 1.9 - 0.3 * i,
            })
        path = tmp_path / "metrics.csv"
        write_metrics_csv(metrics, path)
        return path

    def test_writes_three_svgs(self, runner, tmp_path):
        path = self._metrics_file(tmp_path)
        out = tmp_path / "plots"
        result = runner.invoke(main, ["report", "--metrics", str(path),
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        for name in ("silhouette", "dunn", "davies_bouldin"):
            svg = out / f"{name}.svg"
            root = ET.parse(svg).getroot()
            assert root.tag.endswith("svg")
            assert any(child.tag.endswith("polyline") for child in root)

    def test_svg_bytes_stable(self, runner, tmp_path):
        path = self._metrics_file(tmp_path)
        out_a, out_b = tmp_path / "pa", tmp_path / "pb"
        runner.invoke(main, ["report", "--metrics", str(path), "--out", str(out_a)])
        runner.invoke(main, ["report", "--metrics", str(path), "--out", str(out_b)])
        assert (out_a / "dunn.svg").read_bytes() == (out_b / "dunn.svg").read_bytes()

    def test_missing_file_exit_2(self, runner, tmp_path):
        result = runner.invoke(main, ["report", "--metrics",
                                      str(tmp_path / "nope.csv")])
        assert result.exit_code == 2

    def test_missing_column_exit_2(self, runner, tmp_path):
        path = tmp_path / "broken.csv"
        path.write_text("iteration,labels_seen\n0,0\n")
        result = runner.invoke(main, ["report", "--metrics", str(path),
                                      "--out", str(tmp_path / "out")])
        assert result.exit_code == 2
        assert "missing column" in result.output
