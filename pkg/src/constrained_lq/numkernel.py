"""Dense numerical kernel: SPD solves, eigenvalue bounds, block assembly.

Everything here works on plain ``numpy`` arrays. Solves go through a cached
Cholesky factorization (``scipy.linalg.cho_factor``); explicit inverses are
never formed.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, EmptyInput, NotPositiveDefinite, NotSymmetric

SYMMETRY_RTOL = 1e-10


def as_matrix(m, name="matrix"):
    """Return ``m`` as a finite 2-D float array."""
    arr = np.asarray(m, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_vector(v, name="vector"):
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _require_square(m, name="matrix"):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {m.shape}")


def symmetrize(m):
    m = np.asarray(m, dtype=float)
    _require_square(m)
    return 0.5 * (m + m.T)


def symmetry_defect(m):
    """Relative asymmetry ``max|m - m^T| / max|m|`` (0 for the zero matrix)."""
    if m.size == 0:
        return 0.0
    scale = float(np.max(np.abs(m)))
    return float(np.max(np.abs(m - m.T))) / scale if scale > 0 else 0.0


class SPDFactor:
    """Cholesky factorization of a symmetric positive definite matrix.

    Inputs whose asymmetry is below ``SYMMETRY_RTOL`` (relative) are
    symmetrized silently; larger asymmetry raises :class:`NotSymmetric`.
    """

    def __init__(self, m):
        m = np.asarray(m, dtype=float)
        _require_square(m)
        if symmetry_defect(m) > SYMMETRY_RTOL:
            raise NotSymmetric(
                f"matrix asymmetry {symmetry_defect(m):.3e} exceeds {SYMMETRY_RTOL:g}"
            )
        m = 0.5 * (m + m.T)
        self.n = m.shape[0]
        try:
            self._cf = scipy.linalg.cho_factor(m, lower=True, check_finite=True)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite(str(exc)) from None
        # cho_factor only fails on pivots <= 0; tiny positive pivots pass through
        if np.min(np.diag(self._cf[0])) <= 0.0:
            raise NotPositiveDefinite("non-positive Cholesky pivot")

    def solve(self, rhs):
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape[0] != self.n:
            raise DimensionMismatch(
                f"rhs has {rhs.shape[0]} rows, factor is {self.n}x{self.n}"
            )
        return scipy.linalg.cho_solve(self._cf, rhs, check_finite=False)

    def inverse(self):
        """Materialize the inverse through ``n`` solves against the identity."""
        inv = self.solve(np.eye(self.n))
        return 0.5 * (inv + inv.T)


def spd_solve(m, rhs):
    """Solve ``m @ X = rhs`` for symmetric positive definite ``m``.

    >>> spd_solve(np.diag([2.0, 4.0]), np.ones(2))
    array([0.5 , 0.25])
    """
    return SPDFactor(m).solve(rhs)


def min_eigenvalue_symmetric(m):
    m = np.asarray(m, dtype=float)
    _require_square(m)
    if m.size == 0:
        raise EmptyInput("empty matrix has no eigenvalues")
    return float(np.linalg.eigvalsh(m)[0])


def block_diag(blocks):
    """Assemble a block-diagonal matrix; output dims are the sums of block dims."""
    blocks = [as_matrix(b, "block") for b in blocks]
    if not blocks:
        raise EmptyInput("block_diag needs at least one block")
    return scipy.linalg.block_diag(*blocks)
