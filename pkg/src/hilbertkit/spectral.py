"""Hermitian eigendecomposition by successive extremal extraction and deflation.

Each stage estimates the supremum norm ``s`` of the current deflated operator
``B``, finds an eigenvalue equal to ``+s`` or ``-s`` (preferring ``+s`` on a
tie), and subtracts ``r |beta><beta|`` from ``B`` before the next stage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSet, canonical_completion, fix_phase
from .operators import (OperatorMatrix, is_hermitian, power_sup_norm, random_unit_vector,
                        sup_norm_estimate)
from .report import CheckReport
from .spaces import TINY, SpaceHandle

DEGENERACY_RTOL = 1e-8
# deflated operators below this many machine epsilons of |r_1| are treated as zero
_NULL_EPS_FACTOR = 64
# power-iteration residual (relative to the shift) handed over to Rayleigh-quotient iteration
_HANDOVER_RTOL = 1e-5
_RQI_STEPS = 12


class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenpairs ordered by descending ``|eigenvalue|``, positive first on ties.

    ``eigenvectors`` are orthonormal columns in shifted (Cartesian) coordinates.
    ``stage_norms`` holds the supremum norm of the deflated operator found at
    each extraction stage, and ``converged`` flags each pair.
    """

    eigenvalues: np.ndarray
    eigenvectors: BasisSet
    residuals: np.ndarray
    converged: tuple[bool, ...]
    stage_norms: tuple[float, ...] = ()

    def __len__(self):
        return len(self.eigenvalues)


def _project(q, w):
    if q.shape[1] == 0:
        return w
    return w - q @ (q.conj().T @ w)


def _dominant_shifted(b, shift, q, rng, max_iters):
    """Power iteration on ``b + shift*I`` restricted to the complement of ``q``.

    Returns the unit iterate and its Rayleigh quotient with respect to ``b``.
    """
    n = b.shape[0]
    c = b + shift * np.eye(n)
    x = _project(q, random_unit_vector(n, rng))
    x /= np.linalg.norm(x)
    scale = max(abs(shift), TINY)
    for _ in range(max_iters):
        y = _project(q, c @ x)
        mu = float(np.vdot(x, y).real)
        ny = np.linalg.norm(y)
        if ny < 1e-14 * scale:
            # c vanishes on the remaining subspace: x is already an eigenvector
            break
        if np.linalg.norm(y - mu * x) <= _HANDOVER_RTOL * scale:
            x = y / ny
            break
        x = y / ny
    return x, float(np.vdot(x, b @ x).real)


def _rayleigh_refine(b, x, q, abs_tol):
    """Polish an approximate eigenvector of Hermitian ``b`` by Rayleigh-quotient iteration."""
    n = b.shape[0]
    eye = np.eye(n)
    best_x, best_res = x, np.inf
    for _ in range(_RQI_STEPS):
        rho = float(np.vdot(x, b @ x).real)
        res = float(np.linalg.norm(b @ x - rho * x))
        if res < best_res:
            best_x, best_res = x, res
        if res <= 1e-3 * abs_tol or res == 0.0:
            break
        try:
            y = np.linalg.solve(b - rho * eye, x)
        except np.linalg.LinAlgError:
            break
        y = _project(q, y)
        ny = np.linalg.norm(y)
        if not np.isfinite(ny) or ny == 0:
            break
        x = y / ny
    return best_x, float(np.vdot(best_x, b @ best_x).real), best_res


def canonical_eigenspace_basis(vectors: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the span of orthonormal ``vectors``.

    Canonical unit vectors are projected onto the span and orthonormalized,
    always taking the candidate with the largest remaining norm (lowest index
    on ties), so the result does not depend on how the input basis was found.
    """
    n, c = vectors.shape
    proj = vectors @ vectors.conj().T
    chosen = np.zeros((n, 0), dtype=np.complex128)
    for _ in range(c):
        cand = proj - chosen @ (chosen.conj().T @ proj)
        cand = cand - chosen @ (chosen.conj().T @ cand)
        norms = np.linalg.norm(cand, axis=0)
        j = int(np.argmax(np.round(norms, 12)))
        chosen = np.column_stack([chosen, fix_phase(cand[:, j] / norms[j])])
    return chosen


def _clusters(values, tol):
    """Group indices whose values chain together within ``tol``."""
    order = np.argsort(values, kind="stable")
    groups, current = [], [int(order[0])]
    for prev, i in zip(order[:-1], order[1:]):
        if values[i] - values[prev] <= tol:
            current.append(int(i))
        else:
            groups.append(current)
            current = [int(i)]
    groups.append(current)
    return groups


def hermitian_eig(A: OperatorMatrix, k: int | None = None, rel_tol: float = 1e-10,
                  seed: int = 0, max_iters: int = 10_000) -> EigenDecomposition:
    """Leading ``k`` eigenpairs of a Hermitian operator, largest ``|r|`` first.

    A pair is flagged as converged when ``||A beta - r beta|| <= rel_tol * |r_1|``.
    Eigenvalues closer than ``1e-8 |r_1|`` share an eigenspace; its vectors are
    replaced by :func:`canonical_eigenspace_basis` of their span.
    """
    a = A.elements
    if a.shape[0] != a.shape[1]:
        raise NotHermitianError(f"rectangular operator of shape {a.shape}")
    if not is_hermitian(A):
        raise NotHermitianError("operator is not Hermitian")
    n = a.shape[0]
    k = n if k is None else int(k)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    m = (a + a.conj().T) / 2
    space = SpaceHandle.cartesian(n)
    rng = np.random.default_rng(seed)

    r1 = power_sup_norm(m, 1e-12, max_iters, seed)[0]
    if r1 == 0.0:
        eye = np.eye(n, dtype=np.complex128)[:, :k]
        return EigenDecomposition(np.zeros(k), BasisSet(space, eye), np.zeros(k),
                                  (True,) * k, (0.0,))
    abs_tol = rel_tol * r1
    null_floor = _NULL_EPS_FACTOR * np.finfo(float).eps * r1
    # one spare stage guards the k-th pair against near-tie misordering
    want = min(n, k + 1)

    q = np.zeros((n, 0), dtype=np.complex128)
    values, stage_norms = [], []
    b = m.copy()
    stage = 0
    while len(values) < want:
        s = power_sup_norm(b, 1e-12, max_iters, seed + 1 + stage)[0]
        stage_norms.append(s)
        stage += 1
        if s <= null_floor:
            q = canonical_completion(space, q)
            values.extend(float(np.vdot(x, m @ x).real) for x in q.T[len(values):])
            break
        xp, rp = _dominant_shifted(b, s, q, rng, max_iters)
        xm, rm = _dominant_shifted(b, -s, q, rng, max_iters)
        x = xp if abs(rp) >= abs(rm) * (1 - DEGENERACY_RTOL) else xm
        x, r, _ = _rayleigh_refine(b, x, q, abs_tol)
        x = _project(q, x)
        x = fix_phase(x / np.linalg.norm(x))
        q = np.column_stack([q, x])
        values.append(r)
        b = b - r * np.outer(x, x.conj())
        b = (b + b.conj().T) / 2

    values = np.array([float(np.vdot(x, m @ x).real) for x in q.T])
    for group in _clusters(values, DEGENERACY_RTOL * r1):
        if len(group) > 1:
            group = sorted(group)
            q[:, group] = canonical_eigenspace_basis(q[:, group])
    values = np.array([float(np.vdot(x, m @ x).real) for x in q.T])

    order = sorted(range(len(values)), key=lambda i: (-abs(values[i]), values[i] < 0, i))[:k]
    vecs = q[:, order]
    vals = values[order]
    residuals = np.linalg.norm(m @ vecs - vecs * vals, axis=0)
    converged = tuple(bool(r <= abs_tol) for r in residuals)
    return EigenDecomposition(vals, BasisSet(space, vecs), residuals, converged,
                              tuple(stage_norms))


def spectral_reconstruct(d: EigenDecomposition, space: SpaceHandle) -> OperatorMatrix:
    """``sum_j r_j |beta_j><beta_j|`` as an operator on ``space``."""
    v = d.eigenvectors.vectors
    if v.shape[0] != space.dim:
        raise ValueError("decomposition does not match the space dimension")
    return OperatorMatrix(space, space, (v * d.eigenvalues) @ v.conj().T)


def verify_eigen_properties(A: OperatorMatrix, d: EigenDecomposition, tol: float = 1e-8,
                            sup_tol: float = 1e-6, seed: int = 0) -> CheckReport:
    """Recheck a decomposition against ``A``.

    Checks reality of the Rayleigh quotients, descending ``|r|`` order,
    orthonormality, residuals ``||A beta - r beta||`` (all relative to
    ``|r_1|``), and ``|r_1|`` against the supremum-norm estimate of ``A``.
    """
    a = A.elements
    v = d.eigenvectors.vectors
    r = np.asarray(d.eigenvalues, dtype=float)
    if v.shape[0] != a.shape[1] or a.shape[0] != a.shape[1]:
        raise ValueError("decomposition does not match the operator shape")
    scale = max(float(np.max(np.abs(r))) if r.size else 0.0, TINY)
    report = CheckReport()

    rq = np.einsum("ij,ij->j", v.conj(), a @ v) if r.size else np.zeros(0)
    report.add("reality", float(np.max(np.abs(rq.imag), initial=0.0)) / scale, tol)
    drops = np.diff(np.abs(r))
    report.add("ordering", float(np.max(drops, initial=0.0)) / scale, tol)
    ortho = float(np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1])), initial=0.0))
    report.add("orthogonality", ortho, tol)
    res = np.linalg.norm(a @ v - v * r, axis=0) if r.size else np.zeros(0)
    report.add("residuals", float(np.max(res, initial=0.0)) / scale, tol)
    sup = sup_norm_estimate(A, seed=seed)
    lead = abs(r[0]) if r.size else 0.0
    report.add("sup_norm", abs(lead - sup) / max(sup, TINY), sup_tol)
    return report
