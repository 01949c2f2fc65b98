"""Column-subspace estimation from the sounded block and its diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numkit import as_complex_matrix, spectral_norm, svd, truncate_rank

__all__ = [
    "SubspaceEstimate",
    "estimate_stage1",
    "column_basis",
    "subspace_distance",
    "perturbation_bound",
    "interlacing_check",
]


@dataclass(frozen=True)
class SubspaceEstimate:
    """Dominant left subspace of the recovered column block."""

    basis: np.ndarray = field(repr=False)  # n_rx x rank, orthonormal columns
    singular_values: np.ndarray = field(repr=False)  # leading values, descending
    denoised: np.ndarray = field(repr=False)  # best rank-`rank` fit of the input


def estimate_stage1(y_tilde, rank):
    """PCA denoising: keep the ``rank`` dominant left singular directions."""
    y = as_complex_matrix(y_tilde, "recovered block")
    if not 1 <= rank <= min(y.shape):
        raise ValueError(f"rank must be in [1, {min(y.shape)}], got {rank}")
    res = svd(y)
    return SubspaceEstimate(
        basis=res.left_vectors[:, :rank].copy(),
        singular_values=res.singular_values[:rank].copy(),
        denoised=truncate_rank(res, rank),
    )


def column_basis(a, rank):
    """Orthonormal basis for the dominant rank-dimensional column subspace."""
    a = as_complex_matrix(a)
    if not 1 <= rank <= min(a.shape):
        raise ValueError(f"rank must be in [1, {min(a.shape)}], got {rank}")
    return svd(a).left_vectors[:, :rank].copy()


def _require_orthonormal(u, name):
    gram = u.conj().T @ u
    dev = float(np.max(np.abs(gram - np.eye(u.shape[1]))))
    if dev > 1e-8:
        raise ValueError(f"{name} columns are not orthonormal (Gram deviation {dev:.3e})")


def subspace_distance(u, u_hat):
    """Squared spectral norm of the projector difference between two subspaces.

    For equal-dimension orthonormal bases this is sin^2 of the largest
    principal angle, so it lies in [0, 1]: 0 for identical spans, 1 for
    orthogonal ones.
    """
    u = as_complex_matrix(u, "reference basis")
    u_hat = as_complex_matrix(u_hat, "estimated basis")
    if u.shape != u_hat.shape:
        raise ValueError(f"basis shapes differ: {u.shape} vs {u_hat.shape}")
    _require_orthonormal(u, "reference basis")
    _require_orthonormal(u_hat, "estimated basis")
    gap = spectral_norm(u @ u.conj().T - u_hat @ u_hat.conj().T)
    return min(1.0, gap * gap)


def perturbation_bound(sigma_l, sigma2, n_r, m, c=1.0):
    """Order-wise cap on the subspace distance after rank-limited PCA.

    ``sigma_l`` is the smallest retained singular value of the clean block,
    ``sigma2`` the per-entry noise variance, ``m`` the sounded column count.
    The leading constant ``c`` is exposed; the bound saturates at 1 because
    the distance itself cannot exceed 1.
    """
    if sigma_l <= 0:
        raise ValueError("smallest retained singular value must be positive")
    if sigma2 < 0:
        raise ValueError("noise variance must be non-negative")
    if n_r < 1 or m < 1:
        raise ValueError("dimensions must be positive")
    if c <= 0:
        raise ValueError("leading constant must be positive")
    raw = c * n_r * (sigma_l**2 * sigma2 + m * sigma2**2) / sigma_l**4
    return min(1.0, float(raw))


def _numerical_rank(s):
    if s[0] <= 0:
        raise ValueError("block has no positive singular value")
    return int(np.count_nonzero(s > 1e-8 * s[0]))


def interlacing_check(h_s, h_new, rank=None):
    """Shift of the rank-th squared singular value when a column is appended.

    Returns ``(delta, upper)`` where delta is
    sigma_rank^2([H_S, h_new]) - sigma_rank^2(H_S) and upper is |a_rank|^2
    with ``a`` the coefficients of h_new on the dominant left basis of H_S.
    For columns inside the span of that basis, 0 <= delta <= upper; for a
    general column only delta >= 0 is guaranteed. ``rank`` defaults to the
    numerical rank of H_S.
    """
    h_s = as_complex_matrix(h_s, "column block")
    h_new = np.asarray(h_new, dtype=np.complex128).reshape(-1)
    if h_new.shape[0] != h_s.shape[0]:
        raise ValueError("appended column length must match the block rows")
    res = svd(h_s)
    s = res.singular_values
    if rank is None:
        rank = _numerical_rank(s)
    if not 1 <= rank <= len(s):
        raise ValueError(f"rank must be in [1, {len(s)}], got {rank}")
    if s[rank - 1] <= 0:
        raise ValueError("retained singular values must be positive")
    u = res.left_vectors[:, :rank]
    coeffs = u.conj().T @ h_new
    upper = float(abs(coeffs[rank - 1]) ** 2)
    grown = svd(np.hstack([h_s, h_new[:, None]]))
    delta = float(grown.singular_values[rank - 1] ** 2 - s[rank - 1] ** 2)
    return delta, upper
