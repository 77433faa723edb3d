import subprocess
import sys

import numpy as np
import pytest

from screenclust import _kernels_py
from screenclust.backend import HAS_COMPILED
from screenclust.matrixio import (MatrixFormatError, load_matrix,
                                  load_sections, save_matrix, save_sections)

compiled = pytest.importorskip("screenclust._kernels",
                               reason="compiled kernels not built")


class TestKernelParity:
    def test_cell_histograms(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            mag = rng.random((32, 32))
            pos = rng.random((32, 32)) * 9
            bin_lo = (np.floor(pos).astype(np.int64) % 9).astype(np.int32)
            frac_hi = pos - np.floor(pos)
            a = compiled.cell_histograms(mag, bin_lo, frac_hi, 8, 9)
            b = _kernels_py.cell_histograms(mag, bin_lo, frac_hi, 8, 9)
            assert np.allclose(a, b, atol=1e-12)

    def test_assign_nearest(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            pts = rng.standard_normal((200, 5))
            cents = rng.standard_normal((7, 5))
            la, da = compiled.assign_nearest(pts, cents)
            lb, db = _kernels_py.assign_nearest(pts, cents)
            assert np.array_equal(la, lb)
            assert np.allclose(da, db, atol=1e-9)

    def test_assign_nearest_tie_to_lowest_index(self):
        pts = np.array([[0.0, 0.0]])
        cents = np.array([[1.0, 0.0], [-1.0, 0.0]])
        for mod in (compiled, _kernels_py):
            labels, _ = mod.assign_nearest(pts, cents)
            assert labels[0] == 0

    def test_best_split(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            x = rng.random((40, 3))
            g = rng.standard_normal(40)
            h = np.ones(40)
            a = compiled.best_split(x, g, h, 2, 0.0)
            b = _kernels_py.best_split(x, g, h, 2, 0.0)
            assert a[0] == b[0]
            assert a[1] == pytest.approx(b[1], abs=1e-12)
            assert a[2] == pytest.approx(b[2], abs=1e-9)

    def test_best_split_no_gain(self):
        x = np.zeros((6, 2))
        g = np.zeros(6)
        h = np.ones(6)
        for mod in (compiled, _kernels_py):
            feat, _, gain = mod.best_split(x, g, h, 2, 0.0)
            assert feat == -1
            assert gain == 0.0


class TestBackendSwitch:
    def test_compiled_is_default_here(self):
        assert HAS_COMPILED

    def test_env_forces_fallback(self):
        code = ("import screenclust.backend as b; "
                "print(b.kernels.IMPL, b.HAS_COMPILED)")
        out = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True, text=True, check=True,
            env={"SCREENCLUST_PURE": "1", "PATH": "/usr/bin:/bin"},
        )
        assert out.stdout.split() == ["python", "False"]


class TestMatrixIO:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        m = rng.standard_normal((5, 7)).astype(np.float32).astype(np.float64)
        path = tmp_path / "m.scfm"
        save_matrix(path, m, "hog")
        tag, loaded = load_matrix(path)
        assert tag == "hog"
        assert loaded.dtype == np.float64
        assert np.array_equal(loaded, m)

    def test_sections_round_trip(self, tmp_path):
        rng = np.random.default_rng(4)
        sections = {
            "pca_mean": rng.standard_normal((1, 4)).astype(np.float32).astype(float),
            "pca_basis": rng.standard_normal((4, 3)).astype(np.float32).astype(float),
        }
        path = tmp_path / "model.scfm"
        save_sections(path, sections)
        loaded = load_sections(path)
        assert set(loaded) == set(sections)
        for tag in sections:
            assert np.array_equal(loaded[tag], sections[tag])

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.scfm"
        path.write_bytes(b"NOPE" + b"\x00" * 20)
        with pytest.raises(MatrixFormatError, match="magic"):
            load_matrix(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "trunc.scfm"
        save_matrix(path, np.ones((3, 3)), "raw")
        data = path.read_bytes()
        path.write_bytes(data[:-5])
        with pytest.raises(MatrixFormatError, match="truncated"):
            load_matrix(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.scfm"
        path.write_bytes(b"")
        with pytest.raises(MatrixFormatError, match="empty"):
            load_matrix(path)
