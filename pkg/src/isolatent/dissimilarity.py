"""Data ingestion, synthetic dataset generators, and distance measures.

Everything downstream consumes a DissimilarityMatrix: a symmetric
nonnegative matrix of observed pairwise distances with zero diagonal.  The
invariants are asserted on construction so later stages can rely on them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import rotate as _ndimage_rotate
from scipy.spatial.distance import cdist, pdist, squareform

from isolatent.errors import ValidationError

T_MIN_SWISS = 1.5 * math.pi
T_MAX_SWISS = 4.5 * math.pi
SWISS_HEIGHT = 21.0


def _stream(seed: int, tag: int) -> np.random.Generator:
    """Counter-based random stream; distinct tags give independent streams."""
    return np.random.Generator(np.random.Philox(key=(int(seed) << 16) + tag))


@dataclass(frozen=True)
class PointSet:
    """N points in R^D, optionally labeled."""

    points: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 2:
            raise ValidationError(f"points must be an N x D array with N >= 2, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("points contain non-finite coordinates")
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=int)
            if lab.shape != (pts.shape[0],):
                raise ValidationError("labels must be one integer per point")
            object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Symmetric nonnegative N x N matrix of observed distances, zero diagonal."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 2:
            raise ValidationError(f"distance matrix must be square with N >= 2, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("distance matrix contains non-finite entries")
        if not np.array_equal(v, v.T):
            raise ValidationError("distance matrix is not symmetric")
        if np.any(np.diag(v) != 0.0):
            raise ValidationError("distance matrix diagonal is not zero")
        if np.any(v < 0.0):
            raise ValidationError("distance matrix contains negative entries")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class ImageStack:
    """N grayscale images of identical size, pixel values in [0, 1]."""

    images: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        imgs = np.asarray(self.images, dtype=float)
        if imgs.ndim != 3 or imgs.shape[0] < 1:
            raise ValidationError(f"images must be an N x H x W array, got shape {imgs.shape}")
        if not np.all(np.isfinite(imgs)) or imgs.min() < 0.0 or imgs.max() > 1.0:
            raise ValidationError("pixel values must be finite and in [0, 1]")
        object.__setattr__(self, "images", imgs)
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=int)
            if lab.shape != (imgs.shape[0],):
                raise ValidationError("labels must be one integer per image")
            object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.images.shape[0]

    @property
    def height(self) -> int:
        return self.images.shape[1]

    @property
    def width(self) -> int:
        return self.images.shape[2]

    def flattened(self) -> np.ndarray:
        return self.images.reshape(self.n, -1)


# ---------------------------------------------------------------------------
# Distance measures.


def euclidean_distances(ps: PointSet | ImageStack) -> DissimilarityMatrix:
    """Plain Euclidean distances; images are flattened row-major."""
    data = ps.flattened() if isinstance(ps, ImageStack) else ps.points
    return DissimilarityMatrix(squareform(pdist(data, metric="euclidean"), checks=False))


def rotation_invariant_distances(imgs: ImageStack, n_angles: int = 36) -> DissimilarityMatrix:
    """min over a discrete grid of rotation angles of ||R_theta(x_i) - x_j||.

    Rotations are bilinear about the image center; pixels leaving the frame
    are zero.  Discrete rotation plus interpolation breaks exact symmetry,
    so the result is symmetrized by the pairwise minimum of both directions.
    """
    if n_angles < 1:
        raise ValidationError("n_angles must be >= 1")
    if imgs.n < 2:
        raise ValidationError("need at least two images")
    flat = imgs.flattened()
    best = np.full((imgs.n, imgs.n), np.inf)
    for k in range(n_angles):
        angle_deg = 360.0 * k / n_angles
        if k == 0:
            rotated = flat
        else:
            rotated = np.stack(
                [
                    _ndimage_rotate(
                        im, angle_deg, reshape=False, order=1, mode="constant", cval=0.0,
                        prefilter=False,
                    )
                    for im in imgs.images
                ]
            ).reshape(imgs.n, -1)
        np.minimum(best, cdist(rotated, flat), out=best)
    sym = np.minimum(best, best.T)
    np.fill_diagonal(sym, 0.0)
    return DissimilarityMatrix(sym)


def lexicographic_distances(
    data: PointSet | ImageStack, labels=None, *, eps: float, r: float | None = None
) -> DissimilarityMatrix:
    """Label-aware metric: eps across classes, min(2r, Euclidean) within.

    In the censoring phase this forces differently-labeled items to repel
    (their distance is exactly at the threshold) while same-label items keep
    their local geometry up to the cap 2r.  Defaults r to eps / 4.
    """
    if labels is None:
        labels = data.labels
    if labels is None:
        raise ValidationError("lexicographic distances require labels")
    labels = np.asarray(labels, dtype=int)
    if eps <= 0:
        raise ValidationError("eps must be positive")
    if r is None:
        r = eps / 4.0
    if not (0.0 < 2.0 * r < eps):
        raise ValidationError(f"need 0 < 2r < eps, got r={r}, eps={eps}")
    flat = data.flattened() if isinstance(data, ImageStack) else data.points
    if labels.shape != (flat.shape[0],):
        raise ValidationError("labels must be one integer per item")
    base = squareform(pdist(flat, metric="euclidean"), checks=False)
    differ = labels[:, None] != labels[None, :]
    values = np.where(differ, float(eps), np.minimum(2.0 * r, base))
    np.fill_diagonal(values, 0.0)
    return DissimilarityMatrix(values)


# ---------------------------------------------------------------------------
# Synthetic datasets.


def swiss_roll_arc_length(t):
    """Arc length of the spiral (t cos t, t sin t) from parameter 0 to t."""
    t = np.asarray(t, dtype=float)
    return 0.5 * (t * np.sqrt(1.0 + t**2) + np.arcsinh(t))


def gen_swiss_roll(n: int, noise_sd: float = 0.0, seed: int = 0):
    """Classic rolled 2D sheet in R^3.

    Returns the point set and the N x 2 unrolled ground-truth coordinates
    (arc length along the spiral, height).
    """
    if n < 10:
        raise ValidationError("swiss roll needs n >= 10")
    rng = _stream(seed, 1)
    t = rng.uniform(T_MIN_SWISS, T_MAX_SWISS, size=n)
    h = rng.uniform(0.0, SWISS_HEIGHT, size=n)
    pts = np.column_stack([t * np.cos(t), h, t * np.sin(t)])
    if noise_sd > 0:
        pts = pts + noise_sd * rng.standard_normal((n, 3))
    truth = np.column_stack([swiss_roll_arc_length(t), h])
    return PointSet(pts), truth


def gen_plane(n: int, noise_sd: float = 0.0, seed: int = 0, extent: float = 10.0):
    """Flat 2D sheet embedded in R^3 under a random rotation.

    Returns the point set and the N x 2 planar ground-truth coordinates.
    """
    if n < 4:
        raise ValidationError("plane needs n >= 4")
    rng = _stream(seed, 2)
    uv = rng.uniform(0.0, extent, size=(n, 2))
    basis, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    pts = uv @ basis[:, :2].T
    if noise_sd > 0:
        pts = pts + noise_sd * rng.standard_normal((n, 3))
    return PointSet(pts), uv.copy()


def gen_two_clusters(n: int, separation: float = 12.0, spread: float = 1.0, seed: int = 0):
    """Two Gaussian blobs in R^3, labeled 0 and 1, centers `separation` apart."""
    if n < 4:
        raise ValidationError("two-cluster dataset needs n >= 4")
    rng = _stream(seed, 3)
    n0 = n // 2
    centers = np.array([[0.0, 0.0, 0.0], [separation, 0.0, 0.0]])
    pts = spread * rng.standard_normal((n, 3))
    labels = np.array([0] * n0 + [1] * (n - n0))
    pts += centers[labels]
    return PointSet(pts, labels=labels)


_GLYPH_BLOBS = [
    # (radius, angle, weight, width): an asymmetric constellation of bumps
    (0.00, 0.0, 1.0, 0.22),
    (0.45, 0.0, 0.9, 0.16),
    (0.55, 2.2, 0.7, 0.13),
    (0.30, 3.9, 0.5, 0.10),
    (0.62, 5.1, 0.35, 0.09),
]


def _render_glyph(angle: float, size: int, blobs) -> np.ndarray:
    """Evaluate the glyph intensity on the pixel grid, rotated analytically."""
    half = (size - 1) / 2.0
    coords = (np.arange(size) - half) / half
    gx, gy = np.meshgrid(coords, coords, indexing="xy")
    img = np.zeros((size, size))
    for radius, theta, weight, width in blobs:
        cx = radius * math.cos(theta + angle)
        cy = radius * math.sin(theta + angle)
        img += weight * np.exp(-((gx - cx) ** 2 + (gy - cy) ** 2) / (2.0 * width**2))
    return img


def gen_rotated_glyph(n_frames: int, size: int = 32, seed: int = 0) -> ImageStack:
    """Renderings of one asymmetric glyph under a full turn of rotations.

    Frame k shows the glyph rotated by 2 pi k / n_frames, so the frame
    sequence has circular topology.  The seed perturbs the blob layout
    slightly; the base shape stays asymmetric.
    """
    if n_frames < 8:
        raise ValidationError("need n_frames >= 8")
    rng = _stream(seed, 4)
    blobs = [
        (r + 0.02 * rng.uniform(-1, 1), th + 0.05 * rng.uniform(-1, 1), w, wd)
        for r, th, w, wd in _GLYPH_BLOBS
    ]
    frames = np.stack(
        [_render_glyph(2.0 * math.pi * k / n_frames, size, blobs) for k in range(n_frames)]
    )
    frames /= frames.max()
    return ImageStack(np.clip(frames, 0.0, 1.0))


# ---------------------------------------------------------------------------
# CSV / sidecar I/O.
#
# Format: comma separated, '.' decimal point, optional single header row.
# Floats are written with %.17g so save -> load round-trips exactly.


def _read_csv_array(path) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValidationError(f"{path}: empty file")
    start = 0
    try:
        [float(tok) for tok in lines[0].split(",")]
    except ValueError:
        start = 1  # header row
    width = None
    for ln_no, line in enumerate(lines[start:], start=start + 1):
        toks = line.split(",")
        try:
            row = [float(tok) for tok in toks]
        except ValueError as exc:
            raise ValidationError(f"{path}: malformed row {ln_no}: {line!r}") from exc
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ValidationError(f"{path}: row {ln_no} has {len(row)} fields, expected {width}")
        rows.append(row)
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def _write_csv_array(arr: np.ndarray, path, header: str | None = None) -> None:
    arr = np.atleast_2d(np.asarray(arr, dtype=float))
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(header + "\n")
        for row in arr:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def save_csv_matrix(matrix, path) -> None:
    """Write a distance matrix (or plain array) as CSV."""
    values = getattr(matrix, "values", matrix)
    _write_csv_array(values, path)


def load_csv_distances(path) -> DissimilarityMatrix:
    """Load a distance matrix; validates shape, symmetry (1e-9), diagonal, sign."""
    v = _read_csv_array(path)
    if v.shape[0] != v.shape[1]:
        raise ValidationError(f"{path}: distance matrix must be square, got {v.shape}")
    asym = np.abs(v - v.T).max()
    if asym > 1e-9:
        raise ValidationError(f"{path}: asymmetric distance matrix (max deviation {asym:g})")
    if np.abs(np.diag(v)).max() > 1e-9:
        raise ValidationError(f"{path}: nonzero diagonal")
    if v.min() < 0:
        raise ValidationError(f"{path}: negative distance entries")
    sym = np.triu(v, 1)
    sym = sym + sym.T
    return DissimilarityMatrix(sym)


def save_csv_points(ps: PointSet, path) -> None:
    """Write point coordinates as CSV; labels go to a JSON sidecar."""
    _write_csv_array(ps.points, path)
    meta = {"kind": "points", "labels": None if ps.labels is None else ps.labels.tolist()}
    _sidecar_path(path).write_text(json.dumps(meta), encoding="utf-8")


def load_csv_points(path) -> PointSet:
    """Load a point set; picks up labels from the JSON sidecar when present."""
    pts = _read_csv_array(path)
    labels = None
    sidecar = _sidecar_path(path)
    if sidecar.exists():
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
        if meta.get("labels") is not None:
            labels = np.asarray(meta["labels"], dtype=int)
    return PointSet(pts, labels=labels)


def save_image_stack(imgs: ImageStack, path) -> None:
    """Row-major flattened CSV plus a {height, width, labels} JSON sidecar."""
    _write_csv_array(imgs.flattened(), path)
    meta = {
        "kind": "images",
        "height": imgs.height,
        "width": imgs.width,
        "labels": None if imgs.labels is None else imgs.labels.tolist(),
    }
    _sidecar_path(path).write_text(json.dumps(meta), encoding="utf-8")


def load_image_stack(path) -> ImageStack:
    flat = _read_csv_array(path)
    sidecar = _sidecar_path(path)
    if not sidecar.exists():
        raise ValidationError(f"{path}: missing image sidecar {sidecar}")
    meta = json.loads(sidecar.read_text(encoding="utf-8"))
    h, w = int(meta["height"]), int(meta["width"])
    if flat.shape[1] != h * w:
        raise ValidationError(f"{path}: {flat.shape[1]} pixels per row, expected {h}x{w}")
    labels = None if meta.get("labels") is None else np.asarray(meta["labels"], dtype=int)
    return ImageStack(flat.reshape(-1, h, w), labels=labels)
