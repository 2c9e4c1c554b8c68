import numpy as np
import pytest

from hilbertkit.basis import BasisSet, gram_schmidt
from hilbertkit.operators import (OperatorMatrix, adjoint, apply, assemble, compose, hs_norm,
                                  sup_norm_estimate)
from hilbertkit.spaces import SpaceHandle
from hilbertkit.svd import (SvdResult, sum_rule_check, svd, svd_reconstruct, to_factored_form,
                            verify_svd_properties)
from randgen import cmat, random_space

C = OperatorMatrix.cartesian


def subspace_angle(u, v):
    """Largest principal angle between the column spans of u and v."""
    qu, _ = np.linalg.qr(u)
    qv, _ = np.linalg.qr(v)
    cos = np.linalg.svd(qu.conj().T @ qv, compute_uv=False)
    return float(np.arccos(np.clip(cos.min(), -1, 1)))


def test_simple_examples():
    r = svd(C([[2, 0], [0, 0]]))
    np.testing.assert_allclose(r.singular_values, [2])
    np.testing.assert_allclose(np.abs(r.right_vectors[0]), [1, 0], atol=1e-15)
    np.testing.assert_allclose(np.abs(r.left_vectors[0]), [1, 0], atol=1e-15)
    assert r.dropped == 1

    r = svd(C([[0, 3], [0, 0]]))
    np.testing.assert_allclose(r.singular_values, [3])
    np.testing.assert_allclose(np.abs(r.right_vectors[0]), [0, 1], atol=1e-15)
    np.testing.assert_allclose(np.abs(r.left_vectors[0]), [1, 0], atol=1e-15)


@pytest.mark.parametrize("shape", [(6, 4), (4, 6), (5, 5)])
def test_against_dense_oracle(shape):
    rng = np.random.default_rng(sum(shape))
    a = cmat(rng, *shape)
    r = svd(C(a))
    u, s, vh = np.linalg.svd(a)
    np.testing.assert_allclose(r.singular_values, s, rtol=0, atol=1e-8 * s[0])
    for j in range(len(s)):
        assert subspace_angle(r.right_vectors.vectors[:, [j]], vh.conj().T[:, [j]]) <= 1e-6
        assert subspace_angle(r.left_vectors.vectors[:, [j]], u[:, [j]]) <= 1e-6


def test_invariants_on_random_operators():
    rng = np.random.default_rng(1)
    for seed in range(10):
        m, n = rng.integers(1, 9, 2)
        a = cmat(rng, m, n)
        A = C(a)
        r = svd(A, seed=seed)
        s1 = r.singular_values[0]
        assert np.all(np.diff(r.singular_values) <= 0)
        for j, (s, psi, phi) in enumerate(zip(r.singular_values, r.right_vectors, r.left_vectors)):
            assert np.linalg.norm(a @ (a.conj().T @ phi) - s ** 2 * phi) <= 1e-8 * s1 ** 2
            assert np.linalg.norm(apply(adjoint(A), phi) - s * psi) <= 1e-8 * s1
        assert sup_norm_estimate(A) == pytest.approx(s1, rel=1e-6)
        assert verify_svd_properties(A, r).passed


def test_reconstruct():
    A = C([[2, 0], [0, 0]])
    np.testing.assert_allclose(svd_reconstruct(svd(A)).elements, A.elements, atol=1e-15)
    sp = SpaceHandle.cartesian(2)
    empty = SvdResult(np.zeros(0), BasisSet(sp, np.zeros((2, 0))), BasisSet(sp, np.zeros((2, 0))),
                      sp, sp)
    np.testing.assert_array_equal(svd_reconstruct(empty).elements, 0)

    rng = np.random.default_rng(2)
    a = cmat(rng, 7, 5)
    full = svd_reconstruct(svd(C(a)))
    assert hs_norm(C(a - full.elements)) <= 1e-8 * hs_norm(C(a))
    oracle = np.linalg.svd(a, compute_uv=False)
    part = svd_reconstruct(svd(C(a), k=2))
    assert hs_norm(C(a - part.elements)) ** 2 == pytest.approx(np.sum(oracle[2:] ** 2), rel=1e-8)


def test_factored_form():
    V, D, U = to_factored_form(svd(C(np.eye(3))))
    np.testing.assert_allclose(np.abs(U.elements), np.eye(3), atol=1e-12)
    np.testing.assert_allclose(D.elements, np.eye(3), atol=1e-12)
    rng = np.random.default_rng(3)
    r = svd(C(cmat(rng, 6, 4)))
    V, D, U = to_factored_form(r)
    np.testing.assert_allclose(compose(adjoint(U), U).elements, np.eye(4), atol=1e-10)
    np.testing.assert_allclose(compose(adjoint(V), V).elements, np.eye(4), atol=1e-10)
    product = compose(V, compose(D, adjoint(U)))
    np.testing.assert_allclose(product.elements, svd_reconstruct(r).elements, atol=1e-12)


def test_sum_rule():
    A = C([[3, 4]])
    rule = sum_rule_check(svd(A), A)
    assert rule["sum_s_squared"] == pytest.approx(25, rel=1e-14)
    assert rule["hs_norm_squared"] == pytest.approx(25, rel=1e-14)
    assert rule["passed"]
    Z = C(np.zeros((2, 3)))
    rule = sum_rule_check(svd(Z), Z)
    assert rule["gap"] == 0 and rule["sum_s_squared"] == 0


def test_sum_rule_converges_for_helmholtz_kernel():
    from hilbertkit.kernels import GridSpec, Helmholtz1D, discretize

    def oracle(n=512):
        x = (np.arange(n) + 0.5) / n
        d = (2 + x)[:, None] - x[None, :]
        return float(np.sum(1 / d ** 2)) / n ** 2

    exact = oracle()
    gaps = []
    for n in (8, 16):
        op = discretize(Helmholtz1D(10.0), GridSpec(0, 1, n), GridSpec(2, 3, n)).op
        gaps.append(abs(np.sum(svd(op).singular_values ** 2) - exact))
    assert gaps[1] < gaps[0]


def test_singular_values_coordinate_free_between_spaces():
    rng = np.random.default_rng(4)
    dom = random_space(rng, "diagonal", 4)
    rsp = random_space(rng, "operator", 5)
    m = cmat(rng, 5, 4)
    dbasis, _ = gram_schmidt(dom, list(np.eye(4)))
    rbasis, _ = gram_schmidt(rsp, list(np.eye(5)))
    A = assemble(dom, rsp, m, dbasis, rbasis)
    r = svd(A)
    # independent route: Cholesky factors of both grams give the same Cartesian picture
    ld = np.linalg.cholesky(dom.ip.gram(4))
    lr = np.linalg.cholesky(rsp.ip.gram(5))
    oracle = np.linalg.svd(lr.conj().T @ m @ np.linalg.inv(ld.conj().T), compute_uv=False)
    np.testing.assert_allclose(r.singular_values, oracle, rtol=1e-8)


def test_verify_detects_corrupted_triple():
    rng = np.random.default_rng(5)
    A = C(cmat(rng, 5, 4))
    r = svd(A)
    phi = r.left_vectors.vectors.copy()
    phi[:, [0, 1]] = phi[:, [1, 0]]
    bad = SvdResult(r.singular_values, r.right_vectors, BasisSet(r.left_vectors.space, phi),
                    r.domain, r.range)
    assert "pairing" in verify_svd_properties(A, bad).failures()


def test_k_out_of_range():
    with pytest.raises(ValueError):
        svd(C(np.ones((2, 3))), k=3)
