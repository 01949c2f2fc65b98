"""Complex dense linear-algebra kernel shared by every estimator stage.

All matrices are plain numpy complex128 arrays, validated at operation
boundaries. The only stateful object is RngState, a seeded counter-based
stream (Philox) with keyed sub-streams, so Monte Carlo trials stay
reproducible and independent of execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RngState",
    "SvdResult",
    "as_complex_matrix",
    "svd",
    "truncate_rank",
    "min_norm_solve",
    "spectral_norm",
    "sample_complex_gaussian",
    "random_unitary",
]


def as_complex_matrix(a, name="matrix"):
    """Coerce to a 2-D complex128 array, rejecting empty or non-finite input."""
    out = np.asarray(a, dtype=np.complex128)
    if out.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {out.shape}")
    if out.shape[0] < 1 or out.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(out)):
        bad = int(np.count_nonzero(~np.isfinite(out.real) | ~np.isfinite(out.imag)))
        raise ValueError(f"{name} contains {bad} non-finite entries")
    return out


class RngState:
    """Seeded random stream with keyed, independent sub-streams.

    Backed by numpy's counter-based Philox generator through a SeedSequence,
    so a given (seed, key) pair always yields the same sample sequence,
    bit for bit. ``split`` derives a child stream without consuming from
    the parent, which keeps parallel Monte Carlo trials schedule-independent.
    """

    def __init__(self, seed, key=()):
        seed = int(seed)
        if seed < 0:
            raise ValueError("seed must be non-negative")
        key = tuple(int(k) for k in key)
        if any(k < 0 for k in key):
            raise ValueError("stream keys must be non-negative integers")
        self.seed = seed
        self.key = key
        self._sequence = np.random.SeedSequence(seed, spawn_key=key)
        self.generator = np.random.Generator(np.random.Philox(self._sequence))

    def split(self, *key):
        """Child stream keyed by extra integers, independent of the parent position."""
        return RngState(self.seed, self.key + key)

    def state_id(self):
        """Stable 32-bit identifier of this stream, used for report bookkeeping."""
        return int(self._sequence.generate_state(1, dtype=np.uint32)[0])

    def __repr__(self):
        return f"RngState(seed={self.seed}, key={self.key})"


@dataclass(frozen=True)
class SvdResult:
    """Economy SVD ``a = left_vectors @ diag(singular_values) @ right_vectors.conj().T``."""

    left_vectors: np.ndarray
    singular_values: np.ndarray
    right_vectors: np.ndarray


def svd(a):
    """Economy SVD with a fixed phase convention.

    Singular values come back in non-increasing order. Each left singular
    vector is rotated so that its first non-negligible component is real and
    non-negative, and the matching right vector gets the same rotation, so the
    product is unchanged. This makes repeated factorizations comparable vector
    by vector; subspace comparisons should still go through projectors because
    ties between equal singular values keep the backend ordering.
    """
    a = as_complex_matrix(a)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    v = vh.conj().T.copy()
    u = u.copy()
    for j in range(u.shape[1]):
        nz = np.flatnonzero(np.abs(u[:, j]) > 1e-12)
        if nz.size:
            phase = u[nz[0], j] / abs(u[nz[0], j])
            u[:, j] *= np.conj(phase)
            v[:, j] *= np.conj(phase)
    return SvdResult(u, s, v)


def truncate_rank(res, rank):
    """Best Frobenius-norm rank-``rank`` reconstruction from an SVD."""
    k = len(res.singular_values)
    if not 1 <= rank <= k:
        raise ValueError(f"rank must be in [1, {k}], got {rank}")
    u = res.left_vectors[:, :rank]
    s = res.singular_values[:rank]
    v = res.right_vectors[:, :rank]
    return (u * s) @ v.conj().T


def min_norm_solve(a, b):
    """Minimum-2-norm least-squares solution of ``a @ x ~ b``.

    ``b`` may be a vector or a matrix of stacked right-hand sides; the
    minimum-norm property holds column by column when ``a`` is rank deficient.
    """
    a = as_complex_matrix(a)
    b = np.asarray(b, dtype=np.complex128)
    if b.ndim not in (1, 2):
        raise ValueError(f"right-hand side must be 1-D or 2-D, got shape {b.shape}")
    if b.shape[0] != a.shape[0]:
        raise ValueError(
            f"dimension mismatch: a has {a.shape[0]} rows, b has {b.shape[0]}"
        )
    if not np.all(np.isfinite(b.real) & np.isfinite(b.imag)):
        raise ValueError("right-hand side contains non-finite entries")
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    return x


def spectral_norm(a):
    """Largest singular value; 0 only for the zero matrix."""
    a = as_complex_matrix(a)
    return float(np.linalg.norm(a, 2))


def sample_complex_gaussian(rng, rows, cols, variance):
    """i.i.d. circularly-symmetric complex Gaussian entries.

    Each entry has total variance ``variance``, split evenly between real and
    imaginary parts. The real block is drawn before the imaginary block, so a
    given stream state always produces the same matrix.
    """
    if rows < 1 or cols < 1:
        raise ValueError("matrix dimensions must be positive")
    if variance < 0:
        raise ValueError("variance must be non-negative")
    scale = math.sqrt(variance / 2.0)
    re = rng.generator.standard_normal((rows, cols))
    im = rng.generator.standard_normal((rows, cols))
    return scale * (re + 1j * im)


def random_unitary(rng, n):
    """Haar-distributed n x n unitary: QR of a complex Gaussian with phase-fixed R."""
    z = sample_complex_gaussian(rng, n, n, 1.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
