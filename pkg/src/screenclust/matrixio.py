"""On-disk container for feature matrices.

Format, per record: magic ``SCFM``, uint32 rows, uint32 cols, uint16 tag
length, UTF-8 tag, then rows*cols little-endian float32 values. A file may
hold several consecutive records (used for PCA model sections).
"""

import struct

import numpy as np

MAGIC = b"SCFM"
_HEADER = struct.Struct("<4sIIH")


class MatrixFormatError(ValueError):
    pass


def _write_record(fh, matrix: np.ndarray, tag: str) -> None:
    m = np.ascontiguousarray(np.atleast_2d(matrix), dtype="<f4")
    tag_b = tag.encode("utf-8")
    fh.write(_HEADER.pack(MAGIC, m.shape[0], m.shape[1], len(tag_b)))
    fh.write(tag_b)
    fh.write(m.tobytes())


def _read_record(fh):
    head = fh.read(_HEADER.size)
    if not head:
        return None
    if len(head) < _HEADER.size:
        raise MatrixFormatError("truncated header")
    magic, rows, cols, tag_len = _HEADER.unpack(head)
    if magic != MAGIC:
        raise MatrixFormatError(f"bad magic {magic!r}")
    tag = fh.read(tag_len).decode("utf-8")
    data = fh.read(rows * cols * 4)
    if len(data) != rows * cols * 4:
        raise MatrixFormatError("truncated matrix payload")
    m = np.frombuffer(data, dtype="<f4").reshape(rows, cols)
    return tag, m.astype(np.float64)


def save_matrix(path, matrix: np.ndarray, stage: str) -> None:
    with open(path, "wb") as fh:
        _write_record(fh, matrix, stage)


def load_matrix(path):
    """Returns (stage_tag, matrix as float64)."""
    with open(path, "rb") as fh:
        rec = _read_record(fh)
    if rec is None:
        raise MatrixFormatError(f"{path}: empty file")
    return rec


def save_sections(path, sections: dict[str, np.ndarray]) -> None:
    with open(path, "wb") as fh:
        for tag, m in sections.items():
            _write_record(fh, m, tag)


def load_sections(path) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {}
    with open(path, "rb") as fh:
        while True:
            rec = _read_record(fh)
            if rec is None:
                break
            tag, m = rec
            out[tag] = m
    return out
