"""Random spaces, vectors and operators shared by the test modules."""

import numpy as np

from hilbertkit.spaces import SpaceHandle

VARIANTS = ("cartesian", "diagonal", "operator", "transformed")


def cvec(rng, n, scale=1.0):
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def cmat(rng, m, n):
    return rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))


def hermitian(rng, n):
    x = cmat(rng, n, n)
    return (x + x.conj().T) / 2


def unitary(rng, n):
    q, r = np.linalg.qr(cmat(rng, n, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_space(rng, variant, n):
    if variant == "cartesian":
        return SpaceHandle.cartesian(n)
    if variant == "diagonal":
        return SpaceHandle.weighted(rng.uniform(0.1, 10.0, n))
    if variant == "operator":
        m = cmat(rng, n, n)
        return SpaceHandle.operator_weighted(m.conj().T @ m + 0.5 * np.eye(n))
    if variant == "transformed":
        return SpaceHandle.transformed(cmat(rng, n + 2, n))
    raise ValueError(variant)


def cholesky_factor(space):
    """``L^H`` with ``inner(a, b) == vdot(L^H a, L^H b)``; an independent route
    to the space's Cartesian picture."""
    g = space.ip.gram(space.dim)
    return np.linalg.cholesky((g + g.conj().T) / 2).conj().T
