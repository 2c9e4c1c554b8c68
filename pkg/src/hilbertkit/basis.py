"""Orthonormal bases: Gram-Schmidt, expansion, reconstruction and the
shift to Cartesian coefficient vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import SpaceHandle, as_vector, norm, require_valid

# remainder/input norm ratio at or below which an input counts as dependent
DEPENDENCY_RTOL = 1e-10
# DGKS criterion for an extra orthogonalization pass
_DGKS_ETA = np.sqrt(0.5)


@dataclass(frozen=True, eq=False)
class BasisSet:
    """Orthonormal vectors of ``space``, stored as the columns of ``vectors``."""

    space: SpaceHandle
    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.complex128)
        if v.ndim == 1 and v.size == 0:
            v = v.reshape(self.space.dim, 0)
        if v.ndim != 2 or v.shape[0] != self.space.dim:
            raise ValueError(f"basis vectors of shape {v.shape} do not fit dimension {self.space.dim}")
        if v.shape[1] > self.space.dim:
            raise ValueError("more basis vectors than the space dimension")
        if not np.all(np.isfinite(v)):
            raise ValueError("basis vectors have non-finite entries")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    def __len__(self):
        return self.vectors.shape[1]

    def __getitem__(self, j):
        return self.vectors[:, j]

    def __iter__(self):
        return iter(self.vectors.T)

    @property
    def is_full(self) -> bool:
        return len(self) == self.space.dim

    def gram_matrix(self) -> np.ndarray:
        """Matrix of pairwise inner products ``(v_j, v_k)``."""
        return self.vectors.conj().T @ self.space.ip.gram(self.space.dim) @ self.vectors


@dataclass(frozen=True)
class ExpansionResult:
    coefficients: np.ndarray
    residual_norm: float


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Scale ``v`` so its largest-magnitude entry is real and positive."""
    j = int(np.argmax(np.abs(v)))
    if v[j] == 0:
        return v
    out = v * (abs(v[j]) / v[j])
    out[j] = abs(v[j])
    return out


def _project_out(space, q, w):
    """Subtract from ``w`` its components along the orthonormal columns of ``q``."""
    if q.shape[1] == 0:
        return w
    g = space.ip.gram(space.dim)
    return w - q @ (q.conj().T @ (g @ w))


def gram_schmidt(space: SpaceHandle, inputs) -> tuple[BasisSet, list[int]]:
    """Orthonormalize ``inputs`` in order under ``space``'s inner product.

    Classical Gram-Schmidt with one unconditional reorthogonalization pass,
    plus a third pass when the second still cancels heavily (DGKS).

    Returns
    -------
    basis : BasisSet
        Orthonormal vectors spanning the inputs.
    dependent : list of int
        Indices of inputs skipped as linear combinations of earlier ones.
    """
    require_valid(space)
    q = np.zeros((space.dim, 0), dtype=np.complex128)
    dependent = []
    for idx, x in enumerate(inputs):
        x = as_vector(x, space.dim, f"input {idx}")
        before = norm(space, x)
        if before == 0.0 or q.shape[1] == space.dim:
            dependent.append(idx)
            continue
        w = _project_out(space, q, x)
        w_prev = norm(space, w)
        w = _project_out(space, q, w)
        after = norm(space, w)
        if after < _DGKS_ETA * w_prev:
            w = _project_out(space, q, w)
            after = norm(space, w)
        if after <= DEPENDENCY_RTOL * before:
            dependent.append(idx)
            continue
        q = np.column_stack([q, fix_phase(w / after)])
    return BasisSet(space, q), dependent


def canonical_completion(space: SpaceHandle, partial: np.ndarray) -> np.ndarray:
    """Extend the orthonormal columns of ``partial`` to a full basis by
    Gram-Schmidt over canonical unit vectors."""
    existing = list(np.asarray(partial).T)
    basis, _ = gram_schmidt(space, existing + list(np.eye(space.dim, dtype=np.complex128)))
    full = basis.vectors
    # keep the given columns exactly; only append new ones
    return np.column_stack([np.asarray(partial, dtype=np.complex128).reshape(space.dim, -1),
                            full[:, len(existing):]])


def expand(space: SpaceHandle, basis: BasisSet, v) -> ExpansionResult:
    """Expansion coefficients ``c_j = (basis_j, v)`` and the remainder norm."""
    if basis.space != space:
        raise ValueError("basis belongs to a different space")
    v = as_vector(v, space.dim, "v")
    g = space.ip.gram(space.dim)
    coeffs = basis.vectors.conj().T @ (g @ v)
    residual = v - basis.vectors @ coeffs
    return ExpansionResult(coeffs, norm(space, residual))


def reconstruct(basis: BasisSet, coefficients) -> np.ndarray:
    """``sum_j c_j basis_j``."""
    c = np.asarray(coefficients, dtype=np.complex128)
    if c.ndim != 1 or c.size != len(basis):
        raise ValueError(f"{c.size} coefficients for a basis of {len(basis)} vectors")
    if len(basis) == 0:
        return np.zeros(basis.space.dim, dtype=np.complex128)
    return basis.vectors @ c


def to_cartesian_coords(space: SpaceHandle, basis: BasisSet, v) -> np.ndarray:
    """Coefficient column of ``v`` on a full orthonormal basis.

    Inner products of such columns are plain Cartesian ones and agree with
    ``space``'s inner product of the original vectors.
    """
    if not basis.is_full:
        raise ValueError(f"basis has {len(basis)} vectors, a full basis needs {space.dim}")
    return expand(space, basis, v).coefficients
