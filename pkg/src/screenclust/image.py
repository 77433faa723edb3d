"""Visual pipeline: grayscale normalization, resizing, and HOG descriptors."""

from dataclasses import dataclass

import numpy as np

from .backend import cell_histograms

CANONICAL_SIZE = (720, 1280)  # (height, width) normalization pass
FINAL_SIZE = (256, 256)

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


class ImageError(ValueError):
    pass


@dataclass(frozen=True)
class HogConfig:
    cell: int = 8
    bins: int = 9
    block: int = 2
    block_stride: int = 1
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.bins < 2:
            raise ValueError("bins must be >= 2")
        if min(self.cell, self.block, self.block_stride) < 1:
            raise ValueError("cell, block and block_stride must be positive")


def hog_length(cfg: HogConfig, height: int = 256, width: int = 256) -> int:
    cy, cx = height // cfg.cell, width // cfg.cell
    by = (cy - cfg.block) // cfg.block_stride + 1
    bx = (cx - cfg.block) // cfg.block_stride + 1
    return by * bx * cfg.block * cfg.block * cfg.bins


def to_gray(raw: np.ndarray) -> np.ndarray:
    """Luminance conversion to float64 in [0,1]; accepts HxW, HxWx3 or HxWx4."""
    arr = np.asarray(raw)
    if arr.ndim not in (2, 3) or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ImageError(f"not a decodable image array: shape {arr.shape}")
    if np.issubdtype(arr.dtype, np.integer):
        arr = arr.astype(np.float64) / 255.0
    else:
        arr = arr.astype(np.float64)
    if arr.ndim == 3:
        if arr.shape[2] == 1:
            arr = arr[:, :, 0]
        else:
            arr = arr[:, :, :3] @ LUMA_WEIGHTS
    return np.clip(arr, 0.0, 1.0)


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resampling with pixel-center alignment."""
    in_h, in_w = img.shape
    if in_h == out_h and in_w == out_w:
        return img.copy()
    ys = (np.arange(out_h) + 0.5) * in_h / out_h - 0.5
    xs = (np.arange(out_w) + 0.5) * in_w / out_w - 0.5
    ys = np.clip(ys, 0.0, in_h - 1.0)
    xs = np.clip(xs, 0.0, in_w - 1.0)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    top = img[np.ix_(y0, x0)] * (1 - wx) + img[np.ix_(y0, x1)] * wx
    bot = img[np.ix_(y1, x0)] * (1 - wx) + img[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bot * wy


def preprocess_image(raw: np.ndarray) -> np.ndarray:
    """Raw decoded image -> 256x256 grayscale in [0,1].

    Normalizes through the 1280x720 canonical resolution first so that
    inputs of arbitrary aspect ratio land in the same space.
    """
    gray = to_gray(raw)
    gray = resize_bilinear(gray, *CANONICAL_SIZE)
    gray = resize_bilinear(gray, *FINAL_SIZE)
    return np.clip(gray, 0.0, 1.0)


def hog(img: np.ndarray, cfg: HogConfig = HogConfig()) -> np.ndarray:
    """Histogram-of-oriented-gradients descriptor.

    Central-difference gradients, unsigned orientation (0-180 degrees) with
    linear votes split between adjacent bins, per-cell histograms, and
    overlapping block L2 normalization guarded by cfg.epsilon. Flattened in
    row-major block order; default config on 256x256 gives 34,596 values.
    """
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    if h % cfg.cell or w % cfg.cell:
        raise ValueError(f"image sides {h}x{w} not divisible by cell={cfg.cell}")

    gy, gx = np.gradient(img)
    mag = np.hypot(gx, gy)
    ang = np.degrees(np.arctan2(gy, gx)) % 180.0

    bin_width = 180.0 / cfg.bins
    pos = ang / bin_width
    lo = np.floor(pos).astype(np.int32) % cfg.bins
    frac = (pos - np.floor(pos)).astype(np.float64)

    hist = cell_histograms(np.ascontiguousarray(mag), np.ascontiguousarray(lo),
                           np.ascontiguousarray(frac), cfg.cell, cfg.bins)

    cy, cx, _ = hist.shape
    if cy < cfg.block or cx < cfg.block:
        raise ValueError("block larger than cell grid")
    by = (cy - cfg.block) // cfg.block_stride + 1
    bx = (cx - cfg.block) // cfg.block_stride + 1

    out = np.empty((by, bx, cfg.block * cfg.block * cfg.bins))
    for i in range(by):
        r = i * cfg.block_stride
        for j in range(bx):
            c = j * cfg.block_stride
            block = hist[r:r + cfg.block, c:c + cfg.block, :].ravel()
            out[i, j, :] = block / np.sqrt(block @ block + cfg.epsilon ** 2)
    return out.ravel()
