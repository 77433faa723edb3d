import json
import sys
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def write_manifest(tmp_path):
    def _write(records, name="manifest.jsonl"):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec) + "\n")
        return path
    return _write


@pytest.fixture
def tiny_images(tmp_path):
    """A handful of structured PNGs so HOG has gradients to chew on."""
    rng = np.random.default_rng(7)
    paths = []
    for i in range(5):
        arr = np.zeros((72, 128, 3), dtype=np.uint8)
        arr[:, (i + 1) * 16:, :] = 200
        arr += rng.integers(0, 30, arr.shape, dtype=np.uint8)
        path = tmp_path / f"img{i}.png"
        Image.fromarray(arr).save(path)
        paths.append(path)
    return paths


@pytest.fixture
def taxonomy_file(tmp_path):
    path = tmp_path / "taxonomy.txt"
    path.write_text("# app-level labels\nFacebook\nYoutube\nSettings\n")
    return path
