"""Point-dataset ingestion and SPSD kernel matrix construction.

Datasets are plain CSV, one point per row, optional header. Matrices can
also be read directly from Matrix Market files. Kernels: linear
(x . y), RBF (exp(-||x - y||^2 / 2w^2)) and polynomial ((x . y + c)^d
with c >= 0), all of which are symmetric positive semidefinite by
construction.
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.io

from .linalg import as_dense, thin_svd

__all__ = [
    "KERNEL_KINDS",
    "PointDataset",
    "KernelSpec",
    "load_csv",
    "save_csv",
    "load_matrix_market",
    "build_kernel",
    "standardize",
    "median_pairwise_distance",
    "default_rbf_width",
    "energy_rank",
]

KERNEL_KINDS = ("linear", "rbf", "polynomial")


@dataclass(frozen=True)
class PointDataset:
    """n points with d features each, one point per row."""

    points: np.ndarray
    name: str

    def __post_init__(self):
        pts = self.points
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"need an n x d point array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("dataset contains non-finite values")
        pts.setflags(write=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice plus exactly the parameters that kind requires."""

    kind: str
    rbf_width: float | None = None
    poly_degree: int | None = None
    poly_offset: float | None = None

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf":
            if self.rbf_width is None or self.rbf_width <= 0:
                raise ValueError("rbf kernel needs a positive rbf_width")
            if self.poly_degree is not None or self.poly_offset is not None:
                raise ValueError("rbf kernel takes no polynomial parameters")
        elif self.kind == "polynomial":
            if self.poly_degree is None or self.poly_degree < 1:
                raise ValueError("polynomial kernel needs poly_degree >= 1")
            if self.poly_offset is None or self.poly_offset < 0:
                raise ValueError("polynomial kernel needs poly_offset >= 0")
            if self.rbf_width is not None:
                raise ValueError("polynomial kernel takes no rbf_width")
        else:
            if (self.rbf_width, self.poly_degree, self.poly_offset) != (None,) * 3:
                raise ValueError("linear kernel takes no parameters")


def _parse_row(tokens, path, lineno):
    values = []
    for tok in tokens:
        try:
            v = float(tok)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: not a number: {tok!r}") from None
        if not math.isfinite(v):
            raise ValueError(f"{path}:{lineno}: non-finite value: {tok!r}")
        values.append(v)
    return values


def load_csv(path, name=None) -> PointDataset:
    """Read a comma-separated point dataset, one point per row.

    A first row with any non-numeric token is treated as a header and
    skipped. Malformed data rows raise ValueError with the line number.
    """
    path = Path(path)
    rows = []
    first_row_seen = False
    with open(path, newline="") as fh:
        for lineno, tokens in enumerate(csv.reader(fh), start=1):
            tokens = [t.strip() for t in tokens]
            if not tokens or tokens == [""]:
                continue
            if not first_row_seen:
                first_row_seen = True
                try:
                    rows.append(_parse_row(tokens, path, lineno))
                except ValueError:
                    continue  # header row
                continue
            if rows and len(tokens) != len(rows[0]):
                raise ValueError(
                    f"{path}:{lineno}: expected {len(rows[0])} fields, got {len(tokens)}"
                )
            rows.append(_parse_row(tokens, path, lineno))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    points = np.array(rows, dtype=np.float64)
    return PointDataset(points=points, name=name or path.stem)


def save_csv(dataset: PointDataset, path):
    """Write a dataset as plain CSV (no header); round-trips exactly."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in dataset.points:
            writer.writerow([repr(float(v)) for v in row])


def load_matrix_market(path) -> np.ndarray:
    """Read a dense or coordinate real Matrix Market file as a matrix."""
    try:
        m = scipy.io.mmread(str(path))
    except Exception as exc:
        raise ValueError(f"{path}: cannot parse Matrix Market file: {exc}") from exc
    if hasattr(m, "toarray"):
        m = m.toarray()
    return as_dense(m)


def standardize(dataset: PointDataset) -> PointDataset:
    """Per-feature zero-mean unit-variance rescaling (constant features kept)."""
    pts = dataset.points
    mean = pts.mean(axis=0)
    std = pts.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return PointDataset(points=(pts - mean) / std, name=dataset.name)


def median_pairwise_distance(points, max_points: int = 1000) -> float:
    """Median Euclidean pairwise distance, on an evenly spaced subsample.

    The deterministic subsample keeps the value reproducible without
    touching any random stream.
    """
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    if n > max_points:
        idx = np.unique(np.linspace(0, n - 1, max_points).round().astype(int))
        pts = pts[idx]
    sq = np.einsum("ij,ij->i", pts, pts)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (pts @ pts.T)
    iu = np.triu_indices(pts.shape[0], k=1)
    if iu[0].size == 0:
        raise ValueError("need at least two points for a pairwise distance")
    med = float(np.median(np.sqrt(np.maximum(d2[iu], 0.0))))
    if med <= 0.0:
        raise ValueError("median pairwise distance is zero (duplicate points)")
    return med


def default_rbf_width(dataset: PointDataset) -> float:
    """Default RBF width: median pairwise distance of the dataset."""
    return median_pairwise_distance(dataset.points)


def build_kernel(dataset: PointDataset, spec: KernelSpec) -> np.ndarray:
    """SPSD kernel matrix K with K_ij = k(x_i, x_j)."""
    P = dataset.points
    gram = P @ P.T
    if spec.kind == "linear":
        K = gram
    elif spec.kind == "rbf":
        sq = np.einsum("ij,ij->i", P, P)
        d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * gram, 0.0)
        K = np.exp(-d2 / (2.0 * spec.rbf_width**2))
    else:
        K = (gram + spec.poly_offset) ** spec.poly_degree
    return np.asfortranarray((K + K.T) / 2.0)


def energy_rank(K, fraction: float) -> int:
    """Smallest r whose top-r singular values hold `fraction` of the energy.

    Energy is the cumulative sum of squared singular values (Frobenius
    mass). A zero matrix has energy rank 0.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    s = thin_svd(K).singular_values
    energies = np.cumsum(s * s)
    total = float(energies[-1])
    if total == 0.0:
        return 0
    return int(np.argmax(energies >= fraction * total)) + 1
