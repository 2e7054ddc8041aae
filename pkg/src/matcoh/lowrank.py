"""Column-sampled low-rank approximation of dense and SPSD matrices.

Two sampling-based approximations are provided. Column projection works
for any rectangular X: project X onto the span of the sampled columns
using the left singular vectors of the subsample. The Nystrom
reconstruction works for symmetric positive semidefinite K: with K1 the
sampled columns and W their row/column intersection block, approximate
K by K1 pinv(W) K1^T. Both cost O(l^2 n) for l sampled columns.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import as_dense, pseudoinverse, thin_svd
from .sampling import ColumnSample

__all__ = [
    "SYMMETRY_TOL",
    "ApproximationResult",
    "approximation_errors",
    "column_projection",
    "nystrom",
]

# Entrywise tolerance for accepting an input as symmetric.
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class ApproximationResult:
    """A low-rank approximation plus its error measured three ways.

    `normalized_error` is the Frobenius error divided by the Frobenius
    norm of the input (0/0 defined as 0), the scale-free quality metric
    used throughout the experiment suite.
    """

    approx: np.ndarray
    method: str
    l: int
    frobenius_error: float
    spectral_error: float
    normalized_error: float

    def __post_init__(self):
        self.approx.setflags(write=False)


def approximation_errors(X, approx):
    """(frobenius, spectral, normalized) distance between X and approx.

    The spectral error is the largest singular value of the difference,
    computed by a full SVD; fine at desk scale, no iterative shortcut.
    """
    X = as_dense(X)
    approx = as_dense(approx)
    if X.shape != approx.shape:
        raise ValueError(f"shape mismatch: {X.shape} vs {approx.shape}")
    diff = X - approx
    frob = float(np.linalg.norm(diff))
    spectral = 0.0 if frob == 0.0 else float(thin_svd(diff).singular_values[0])
    norm_x = float(np.linalg.norm(X))
    if norm_x > 0.0:
        normalized = frob / norm_x
    else:
        normalized = 0.0 if frob == 0.0 else float("inf")
    return frob, spectral, normalized


def _check_sample(X, sample: ColumnSample):
    if sample.submatrix.shape[0] != X.shape[0]:
        raise ValueError(
            f"sample has {sample.submatrix.shape[0]} rows, matrix has {X.shape[0]}"
        )
    idx = list(sample.indices)
    if idx and (min(idx) < 0 or max(idx) >= X.shape[1]):
        raise ValueError("sample indices out of range for this matrix")
    if not np.array_equal(X[:, idx], sample.submatrix):
        raise ValueError("sample columns do not match the given matrix")
    return idx


def column_projection(X, sample: ColumnSample) -> ApproximationResult:
    """Project X onto the span of its sampled columns.

    The result is U U^T X for the rank-truncated left singular vectors U
    of the subsample, so the residual is orthogonal to every sampled
    column. If the sample spans the full column space the projection
    reproduces X exactly.
    """
    X = as_dense(X)
    _check_sample(X, sample)
    U = thin_svd(sample.submatrix).left_basis()
    approx = U @ (U.T @ X) if U.shape[1] > 0 else np.zeros_like(X)
    frob, spectral, normalized = approximation_errors(X, approx)
    return ApproximationResult(
        approx=approx,
        method="column_projection",
        l=sample.size,
        frobenius_error=frob,
        spectral_error=spectral,
        normalized_error=normalized,
    )


def nystrom(K, sample: ColumnSample) -> ApproximationResult:
    """Nystrom reconstruction K1 pinv(W) K1^T of an SPSD matrix.

    K must be symmetric within SYMMETRY_TOL entrywise. W is the block of
    K at sampled rows x sampled columns (no physical permutation of K is
    performed) and its pseudoinverse uses the shared rank threshold, so
    linearly dependent sampled columns are handled.
    """
    K = as_dense(K)
    if K.shape[0] != K.shape[1]:
        raise ValueError(f"matrix must be square, got {K.shape}")
    asym = float(np.max(np.abs(K - K.T)))
    if asym > SYMMETRY_TOL:
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    idx = _check_sample(K, sample)
    W = K[np.ix_(idx, idx)]
    W_pinv = pseudoinverse(W)
    W_pinv = (W_pinv + W_pinv.T) / 2.0
    K1 = sample.submatrix
    approx = K1 @ W_pinv @ K1.T
    frob, spectral, normalized = approximation_errors(K, approx)
    return ApproximationResult(
        approx=approx,
        method="nystrom",
        l=sample.size,
        frobenius_error=frob,
        spectral_error=spectral,
        normalized_error=normalized,
    )
