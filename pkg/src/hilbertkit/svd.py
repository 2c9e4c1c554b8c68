"""Singular-value decomposition ``A = sum_j s_j |phi_j><psi_j|`` built on the
Hermitian eigensolver applied to ``A^H A``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSet, fix_phase
from .operators import OperatorMatrix, adjoint, compose, hs_norm, sup_norm_estimate
from .report import CheckReport
from .spaces import TINY, SpaceHandle
from .spectral import hermitian_eig

SUM_RULE_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class SvdResult:
    """Kept singular triples, ``s`` nonincreasing.

    ``right_vectors`` (psi) live in the domain and ``left_vectors`` (phi) in the
    range, both as orthonormal columns in shifted coordinates. ``requested`` is
    the number of triples asked for and ``dropped`` how many of them fell at or
    below the cutoff ``rel_tol * s_1``.
    """

    singular_values: np.ndarray
    right_vectors: BasisSet
    left_vectors: BasisSet
    domain: SpaceHandle
    range: SpaceHandle
    requested: int = 0
    dropped: int = 0
    converged: bool = True

    def __len__(self):
        return len(self.singular_values)


def _jacobi_polish(b: np.ndarray, psi: np.ndarray, max_sweeps: int = 30) -> bool:
    """One-sided Jacobi rotations making the columns of ``b = A psi`` orthogonal.

    The same unitary rotations act on ``psi`` so ``b = A psi`` keeps holding.
    Starting from Gram eigenvectors the columns are nearly orthogonal already
    and a few sweeps suffice. Returns whether the sweeps converged.
    """
    n = b.shape[1]
    eps = np.finfo(float).eps
    for _ in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = float(np.vdot(b[:, i], b[:, i]).real)
                beta = float(np.vdot(b[:, j], b[:, j]).real)
                gamma = np.vdot(b[:, i], b[:, j])
                g = abs(gamma)
                if min(alpha, beta) <= TINY or g <= eps * np.sqrt(alpha) * np.sqrt(beta):
                    continue
                rotated = True
                phase = gamma / g
                zeta = (beta - alpha) / (2 * g)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1 / np.hypot(1.0, t)
                s = c * t
                for m in (b, psi):
                    x, y = m[:, i].copy(), m[:, j] / phase
                    m[:, i] = c * x - s * y
                    m[:, j] = s * x + c * y
        if not rotated:
            return True
    return False


def _tall_triples(A: OperatorMatrix, seed: int, eig_tol: float):
    """Unsorted triples of an operator with at least as many rows as columns."""
    d = hermitian_eig(compose(adjoint(A), A), None, eig_tol, seed)
    psi = np.array(d.eigenvectors.vectors)
    b = A.elements @ psi
    polished = _jacobi_polish(b, psi)
    return psi, b, all(d.converged) and polished


def svd(A: OperatorMatrix, k: int | None = None, rel_tol: float = 1e-12, seed: int = 0,
        eig_tol: float = 1e-10) -> SvdResult:
    """Leading ``k`` singular triples of ``A``.

    Right vectors start as the eigenvectors of ``A^H A``; one-sided Jacobi
    rotations then make the columns of ``A psi`` orthogonal to rounding, so
    ``s_n = ||A psi_n||`` and ``phi_n = A psi_n / s_n`` stay accurate for tiny
    ``s_n`` as well. A wide operator is handled through its adjoint. Triples with
    ``s_n <= rel_tol * s_1`` are dropped.
    """
    a = A.elements
    rows, cols = a.shape
    full = min(rows, cols)
    k = full if k is None else int(k)
    if not 1 <= k <= full:
        raise ValueError(f"k={k} outside 1..{full}")
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")

    if cols <= rows:
        psi, b, converged = _tall_triples(A, seed, eig_tol)
    else:
        phi, c, converged = _tall_triples(adjoint(A), seed, eig_tol)
        # A^H phi = c, so the columns of c are s psi
        norms = np.linalg.norm(c, axis=0)
        safe = np.where(norms > 0, norms, 1.0)
        psi = c / safe
        b = phi * norms
    s = np.linalg.norm(b, axis=0)

    order = sorted(range(s.size), key=lambda j: -s[j])[:k]
    psi, b, s = psi[:, order], b[:, order], s[order]
    s1 = s[0] if s.size else 0.0
    keep = s > rel_tol * s1 if s1 > 0 else np.zeros(s.size, dtype=bool)
    psi, b, s = psi[:, keep], b[:, keep], s[keep]
    for j in range(s.size):
        fixed = fix_phase(psi[:, j])
        idx = int(np.argmax(np.abs(psi[:, j])))
        b[:, j] *= fixed[idx] / psi[idx, j]
        psi[:, j] = fixed
    phi = b / s if s.size else np.zeros((rows, 0), dtype=np.complex128)
    return SvdResult(s, BasisSet(SpaceHandle.cartesian(cols), psi),
                     BasisSet(SpaceHandle.cartesian(rows), phi), A.domain, A.range,
                     requested=k, dropped=k - int(s.size), converged=converged)


def svd_reconstruct(r: SvdResult) -> OperatorMatrix:
    """``sum_j s_j |phi_j><psi_j|``."""
    phi = r.left_vectors.vectors
    psi = r.right_vectors.vectors
    return OperatorMatrix(r.domain, r.range, (phi * r.singular_values) @ psi.conj().T)


def to_factored_form(r: SvdResult) -> tuple[OperatorMatrix, OperatorMatrix, OperatorMatrix]:
    """``(V, D, U)`` with ``A = V D U^H``: columns of ``U`` are psi, of ``V`` are phi."""
    n = len(r)
    if n == 0:
        raise ValueError("no singular triples kept; factored form is empty")
    middle = SpaceHandle.cartesian(n)
    U = OperatorMatrix(middle, r.domain, r.right_vectors.vectors)
    V = OperatorMatrix(middle, r.range, r.left_vectors.vectors)
    D = OperatorMatrix(middle, middle, np.diag(r.singular_values).astype(np.complex128))
    return V, D, U


def sum_rule_check(r: SvdResult, A: OperatorMatrix, tol: float = SUM_RULE_RTOL) -> dict:
    """Compare ``sum s_j^2`` with ``||A||_HS^2``; meaningful for full-rank results."""
    total = float(np.sum(r.singular_values ** 2))
    hs2 = hs_norm(A) ** 2
    gap = abs(total - hs2) / hs2 if hs2 > 0 else (0.0 if total == 0 else float("inf"))
    return {"sum_s_squared": total, "hs_norm_squared": hs2, "gap": gap, "passed": gap <= tol}


def verify_svd_properties(A: OperatorMatrix, r: SvdResult, tol: float = 1e-8,
                          sup_tol: float = 1e-6, seed: int = 0) -> CheckReport:
    """Recheck singular triples against ``A``; tolerances relative to ``s_1``."""
    a = A.elements
    s = np.asarray(r.singular_values, dtype=float)
    psi = r.right_vectors.vectors
    phi = r.left_vectors.vectors
    s1 = max(float(s[0]) if s.size else 0.0, TINY)
    report = CheckReport()
    report.add("nonnegative", float(-np.min(s, initial=0.0)) / s1, 0.0)
    report.add("ordering", float(np.max(np.diff(s), initial=0.0)) / s1, tol)
    eye = np.eye(s.size)
    report.add("psi_orthonormal", float(np.max(np.abs(psi.conj().T @ psi - eye), initial=0.0)), tol)
    report.add("phi_orthonormal", float(np.max(np.abs(phi.conj().T @ phi - eye), initial=0.0)), tol)
    pair = np.linalg.norm(a @ psi - phi * s, axis=0) if s.size else np.zeros(0)
    report.add("pairing", float(np.max(pair, initial=0.0)) / s1, tol)
    back = np.linalg.norm(a.conj().T @ phi - psi * s, axis=0) if s.size else np.zeros(0)
    report.add("adjoint_pairing", float(np.max(back, initial=0.0)) / s1, tol)
    sup = sup_norm_estimate(A, seed=seed)
    lead = float(s[0]) if s.size else 0.0
    report.add("sup_norm", abs(lead - sup) / max(sup, TINY), sup_tol)
    return report

