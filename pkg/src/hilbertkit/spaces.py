"""Finite-dimensional Hilbert spaces with configurable inner products.

Four inner-product families are supported:

* :class:`Cartesian` -- ``(a, b) = sum_j conj(a_j) b_j``
* :class:`DiagonalWeighted` -- ``(a, b) = sum_j w_j conj(a_j) b_j``
* :class:`OperatorWeighted` -- ``(a, b) = (a, W b)`` Cartesian, ``W`` Hermitian positive
* :class:`Transformed` -- ``(a, b) = (B a, B b)`` Cartesian, ``B`` of full column rank

Every inner product is conjugate-linear in its first argument.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# absolute floor for relative tolerances
TINY = 1e-300
# smallest/largest eigenvalue ratio accepted for an operator-weighted gram
GRAM_POSITIVITY_RTOL = 1e-12


class InvalidSpaceError(ValueError):
    """Raised when an operation needs a space whose inner product is valid."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_vector(values, dim: int | None = None, name: str = "vector") -> np.ndarray:
    """Return ``values`` as a finite complex128 coefficient vector.

    Raises ``ValueError`` for empty, non-finite or wrongly sized input.
    """
    v = np.asarray(values, dtype=np.complex128)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    if dim is not None and v.size != dim:
        raise ValueError(f"{name} has length {v.size}, expected {dim}")
    return v


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    m = np.asarray(values, dtype=np.complex128)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def scale_of(*arrays) -> float:
    """Largest magnitude over ``arrays``, floored at ``TINY``."""
    s = TINY
    for a in arrays:
        a = np.asarray(a)
        if a.size:
            s = max(s, float(np.max(np.abs(a))))
    return s


class InnerProduct:
    """Base class of the four inner-product families."""

    kind: str = ""

    def inner(self, a: np.ndarray, b: np.ndarray) -> complex:
        raise NotImplementedError

    def gram(self, dim: int) -> np.ndarray:
        """Matrix ``W`` with ``inner(a, b) == a^H W b``."""
        raise NotImplementedError

    def check_dim(self, dim: int) -> None:
        pass

    def violations(self, dim: int) -> list[str]:
        return []


@dataclass(frozen=True, eq=False)
class Cartesian(InnerProduct):
    kind = "cartesian"

    def inner(self, a, b):
        return complex(np.vdot(a, b))

    def gram(self, dim):
        return np.eye(dim, dtype=np.complex128)

    def __eq__(self, other):
        return isinstance(other, Cartesian)

    def __hash__(self):
        return hash(self.kind)


@dataclass(frozen=True, eq=False)
class DiagonalWeighted(InnerProduct):
    weights: np.ndarray
    kind = "diagonal"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-D array")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights have non-finite entries")
        object.__setattr__(self, "weights", _readonly(w.copy()))

    def inner(self, a, b):
        return complex(np.sum(self.weights * np.conj(a) * b))

    def gram(self, dim):
        return np.diag(self.weights).astype(np.complex128)

    def check_dim(self, dim):
        if self.weights.size != dim:
            raise ValueError(f"{self.weights.size} weights for a space of dimension {dim}")

    def violations(self, dim):
        bad = np.flatnonzero(self.weights <= 0)
        if bad.size:
            return [f"nonpositive weight at index {int(bad[0])}"
                    + (f" (and {bad.size - 1} more)" if bad.size > 1 else "")]
        return []

    def __eq__(self, other):
        return isinstance(other, DiagonalWeighted) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash((self.kind, self.weights.tobytes()))


@dataclass(frozen=True, eq=False)
class OperatorWeighted(InnerProduct):
    gram_matrix: np.ndarray
    kind = "operator"

    def __post_init__(self):
        g = as_matrix(self.gram_matrix, "gram")
        if g.shape[0] != g.shape[1]:
            raise ValueError(f"gram must be square, got shape {g.shape}")
        object.__setattr__(self, "gram_matrix", _readonly(g.copy()))

    def inner(self, a, b):
        return complex(np.vdot(a, self.gram_matrix @ b))

    def gram(self, dim):
        return self.gram_matrix.copy()

    def check_dim(self, dim):
        if self.gram_matrix.shape != (dim, dim):
            raise ValueError(f"gram of shape {self.gram_matrix.shape} for a space of dimension {dim}")

    def violations(self, dim):
        g = self.gram_matrix
        out = []
        if np.max(np.abs(g - g.conj().T)) > 1e-12 * scale_of(g):
            out.append("gram is not Hermitian")
        evals = np.linalg.eigvalsh((g + g.conj().T) / 2)
        if evals[0] <= GRAM_POSITIVITY_RTOL * max(abs(evals[-1]), TINY):
            if evals[0] < -GRAM_POSITIVITY_RTOL * max(abs(evals[-1]), TINY):
                out.append(f"gram is indefinite (eigenvalues {evals[0]:.3g} to {evals[-1]:.3g})")
            else:
                out.append(f"gram is not strictly positive (smallest eigenvalue {evals[0]:.3g})")
        return out

    def __eq__(self, other):
        return isinstance(other, OperatorWeighted) and np.array_equal(self.gram_matrix, other.gram_matrix)

    def __hash__(self):
        return hash((self.kind, self.gram_matrix.tobytes()))


@dataclass(frozen=True, eq=False)
class Transformed(InnerProduct):
    transform: np.ndarray
    kind = "transformed"

    def __post_init__(self):
        object.__setattr__(self, "transform", _readonly(as_matrix(self.transform, "transform").copy()))

    def inner(self, a, b):
        return complex(np.vdot(self.transform @ a, self.transform @ b))

    def gram(self, dim):
        return self.transform.conj().T @ self.transform

    def check_dim(self, dim):
        if self.transform.shape[1] != dim:
            raise ValueError(f"transform with {self.transform.shape[1]} columns "
                             f"for a space of dimension {dim}")

    def violations(self, dim):
        rank = np.linalg.matrix_rank(self.transform)
        if rank < dim:
            return [f"transform is rank deficient (rank {rank} < {dim})"]
        return []

    def __eq__(self, other):
        return isinstance(other, Transformed) and np.array_equal(self.transform, other.transform)

    def __hash__(self):
        return hash((self.kind, self.transform.tobytes()))


@dataclass(frozen=True)
class SpaceHandle:
    """A finite-dimensional Hilbert space: a dimension plus an inner product."""

    dim: int
    ip: InnerProduct = field(default_factory=Cartesian)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        self.ip.check_dim(self.dim)

    @classmethod
    def cartesian(cls, dim: int) -> SpaceHandle:
        return cls(dim, Cartesian())

    @classmethod
    def weighted(cls, weights) -> SpaceHandle:
        w = DiagonalWeighted(weights)
        return cls(w.weights.size, w)

    @classmethod
    def operator_weighted(cls, gram) -> SpaceHandle:
        ip = OperatorWeighted(gram)
        return cls(ip.gram_matrix.shape[0], ip)

    @classmethod
    def transformed(cls, transform) -> SpaceHandle:
        ip = Transformed(transform)
        return cls(ip.transform.shape[1], ip)


def inner(space: SpaceHandle, a, b) -> complex:
    """Inner product ``(a, b)`` under ``space``'s inner product."""
    a = as_vector(a, space.dim, "a")
    b = as_vector(b, space.dim, "b")
    return space.ip.inner(a, b)


def norm(space: SpaceHandle, a) -> float:
    a = as_vector(a, space.dim, "a")
    # the real part can dip below zero by rounding for valid spaces
    return float(np.sqrt(max(space.ip.inner(a, a).real, 0.0)))


def metric(space: SpaceHandle, a, b) -> float:
    a = as_vector(a, space.dim, "a")
    b = as_vector(b, space.dim, "b")
    return norm(space, a - b)


def validate_space(space: SpaceHandle) -> list[str]:
    """List every violated inner-product invariant; an empty list means valid."""
    return space.ip.violations(space.dim)


def require_valid(space: SpaceHandle) -> None:
    problems = validate_space(space)
    if problems:
        raise InvalidSpaceError("; ".join(problems))


def describe_space(space: SpaceHandle) -> dict:
    """JSON-friendly summary of a space (kind and dimension)."""
    return {"dim": space.dim, "inner_product": space.ip.kind}
