"""Operators between finite-dimensional Hilbert spaces as matrices.

Matrix elements are stored in shifted coordinates: ``a_jk = (beta_j, A alpha_k)``
for orthonormal bases ``alpha`` of the domain and ``beta`` of the range, so all
algebra here is plain Cartesian matrix algebra. The ``domain``/``range``
handles record which spaces the operator connects.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .basis import BasisSet
from .spaces import TINY, SpaceHandle, as_matrix, as_vector

HS_METHODS = ("column-sums", "entry-squares", "trace-AdA", "trace-AAd")
HERMITIAN_RTOL = 1e-10
# power-iteration iterate considered collapsed below this norm
_COLLAPSE = 1e-14


class ConvergenceWarning(UserWarning):
    """An iterative method stopped at its iteration cap before converging."""


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    domain: SpaceHandle
    range: SpaceHandle
    elements: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.elements, "elements").copy()
        if m.shape != (self.range.dim, self.domain.dim):
            raise ValueError(f"elements of shape {m.shape} do not map dimension "
                             f"{self.domain.dim} to dimension {self.range.dim}")
        m.setflags(write=False)
        object.__setattr__(self, "elements", m)

    @property
    def shape(self):
        return self.elements.shape

    @classmethod
    def cartesian(cls, elements) -> OperatorMatrix:
        """Operator between Cartesian spaces sized to fit ``elements``."""
        m = as_matrix(elements)
        return cls(SpaceHandle.cartesian(m.shape[1]), SpaceHandle.cartesian(m.shape[0]), m)


@dataclass(frozen=True)
class TruncationCertificate:
    kept_rows: int
    kept_cols: int
    tail_hs_norm: float


def assemble(domain: SpaceHandle, range: SpaceHandle, action, domain_basis: BasisSet,
             range_basis: BasisSet) -> OperatorMatrix:
    """Matrix of a linear map given in native coordinates.

    ``action`` maps native domain coefficient vectors to native range ones
    (a callable or a matrix). Entry ``(j, k)`` is ``(range_basis_j, action(domain_basis_k))``
    under the range inner product.
    """
    if not (domain_basis.is_full and range_basis.is_full):
        raise ValueError("assembly needs full bases of both spaces")
    if callable(action):
        images = np.column_stack([as_vector(action(a), range.dim) for a in domain_basis])
    else:
        images = as_matrix(action) @ domain_basis.vectors
    g = range.ip.gram(range.dim)
    return OperatorMatrix(domain, range, range_basis.vectors.conj().T @ g @ images)


def apply(A: OperatorMatrix, v) -> np.ndarray:
    v = as_vector(v, A.domain.dim, "v")
    return A.elements @ v


def adjoint(A: OperatorMatrix) -> OperatorMatrix:
    return OperatorMatrix(A.range, A.domain, A.elements.conj().T)


def compose(A: OperatorMatrix, B: OperatorMatrix) -> OperatorMatrix:
    """The product ``A B`` (apply ``B`` first)."""
    if B.range.dim != A.domain.dim:
        raise ValueError(f"cannot compose: B maps into dimension {B.range.dim}, "
                         f"A expects dimension {A.domain.dim}")
    return OperatorMatrix(B.domain, A.range, A.elements @ B.elements)


def identity_op(space: SpaceHandle) -> OperatorMatrix:
    return OperatorMatrix(space, space, np.eye(space.dim, dtype=np.complex128))


def outer(ket, bra, range: SpaceHandle, domain: SpaceHandle) -> OperatorMatrix:
    """The operator ``|ket><bra|``."""
    ket = as_vector(ket, range.dim, "ket")
    bra = as_vector(bra, domain.dim, "bra")
    return OperatorMatrix(domain, range, np.outer(ket, bra.conj()))


def hs_norm(A: OperatorMatrix, method: str = "entry-squares") -> float:
    """Hilbert-Schmidt norm, by any of the equivalent sum-rule expressions.

    ``column-sums`` adds ``||A e_k||^2`` over the domain basis, ``entry-squares``
    adds ``|a_jk|^2``, and the ``trace-*`` methods take the trace of ``A^H A``
    or ``A A^H``.
    """
    a = A.elements
    if method == "column-sums":
        s = sum(float(np.vdot(col, col).real) for col in a.T)
    elif method == "entry-squares":
        s = float(np.sum(a.real ** 2 + a.imag ** 2))
    elif method == "trace-AdA":
        s = float(np.trace(a.conj().T @ a).real)
    elif method == "trace-AAd":
        s = float(np.trace(a @ a.conj().T).real)
    else:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(HS_METHODS)}")
    return float(np.sqrt(max(s, 0.0)))


def random_unit_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def power_sup_norm(a: np.ndarray, rel_tol: float = 1e-12, max_iters: int = 10_000,
                   seed: int = 0):
    """Largest singular value of the matrix ``a`` by power iteration on ``a^H a``.

    Returns ``(estimate, right_vector, iterations, converged)``. Convergence is
    declared when successive Rayleigh quotients of ``a^H a`` differ by at most
    ``rel_tol`` relative.
    """
    rng = np.random.default_rng(seed)
    n = a.shape[1]
    x = random_unit_vector(n, rng)
    if not np.any(a):
        return 0.0, x, 0, True
    prev = None
    for it in range(1, max_iters + 1):
        y = a @ x
        rq = float(np.vdot(y, y).real)
        z = a.conj().T @ y
        nz = np.linalg.norm(z)
        if nz < _COLLAPSE * max(np.linalg.norm(a), TINY) ** 2:
            # start vector (nearly) in the null space; restart
            x = random_unit_vector(n, rng)
            prev = None
            continue
        x = z / nz
        if prev is not None and abs(rq - prev) <= rel_tol * rq:
            return float(np.sqrt(rq)), x, it, True
        prev = rq
    y = a @ x
    return float(np.linalg.norm(y)), x, max_iters, False


def sup_norm_estimate(A: OperatorMatrix, rel_tol: float = 1e-12, max_iters: int = 10_000,
                      seed: int = 0) -> float:
    """Estimate the supremum norm (largest singular value) of ``A``.

    Emits :class:`ConvergenceWarning` if ``max_iters`` is reached; the last
    estimate is still returned.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    value, _, _, converged = power_sup_norm(A.elements, rel_tol, max_iters, seed)
    if not converged:
        warnings.warn(f"sup-norm power iteration did not converge in {max_iters} iterations",
                      ConvergenceWarning, stacklevel=2)
    return value


def truncate(A: OperatorMatrix, m: int, n: int) -> tuple[OperatorMatrix, TruncationCertificate]:
    """Keep the leading ``m x n`` block (zero-padded to the original shape).

    The certificate's ``tail_hs_norm`` is the exact Hilbert-Schmidt norm of the
    dropped part, which bounds ``||(A - A_mn) v|| <= tail_hs_norm * ||v||``.
    """
    rows, cols = A.shape
    if not (1 <= m <= rows and 1 <= n <= cols):
        raise ValueError(f"truncation {m}x{n} outside 1..{rows} x 1..{cols}")
    kept = np.zeros_like(A.elements)
    kept[:m, :n] = A.elements[:m, :n]
    dropped = A.elements - kept
    tail = float(np.sqrt(np.sum(np.abs(dropped) ** 2)))
    return OperatorMatrix(A.domain, A.range, kept), TruncationCertificate(m, n, tail)


def is_hermitian(A: OperatorMatrix, tol: float = HERMITIAN_RTOL) -> bool:
    """Whether ``A`` equals its own adjoint within ``tol`` relative.

    Raises ``ValueError`` for rectangular input. An operator between two
    different spaces of equal dimension is never self-adjoint.
    """
    a = A.elements
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"rectangular operator of shape {a.shape} cannot be Hermitian")
    if A.domain != A.range:
        return False
    scale = float(np.max(np.abs(a)))
    return bool(np.max(np.abs(a - a.conj().T)) <= tol * scale)
