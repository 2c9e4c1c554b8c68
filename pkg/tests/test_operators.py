import warnings

import numpy as np
import pytest

from hilbertkit.basis import gram_schmidt, reconstruct, to_cartesian_coords
from hilbertkit.operators import (HS_METHODS, ConvergenceWarning, OperatorMatrix, adjoint, apply,
                                  assemble, compose, hs_norm, identity_op, is_hermitian, outer,
                                  sup_norm_estimate, truncate)
from hilbertkit.spaces import SpaceHandle, inner, norm
from randgen import cmat, cvec, hermitian, random_space, unitary

C = OperatorMatrix.cartesian


def test_apply_examples():
    rng = np.random.default_rng(0)
    v = cvec(rng, 3)
    np.testing.assert_array_equal(apply(identity_op(SpaceHandle.cartesian(3)), v), v)
    np.testing.assert_array_equal(apply(C([[0, 1], [1, 0]]), [1, 0]), [0, 1])
    a = cmat(rng, 4, 3)
    oracle = [sum(a[j, k] * v[k] for k in range(3)) for j in range(4)]
    np.testing.assert_allclose(apply(C(a), v), oracle, rtol=1e-14)
    with pytest.raises(ValueError):
        apply(C(a), cvec(rng, 4))


def test_adjoint_examples():
    assert adjoint(C([[1j]])).elements[0, 0] == -1j
    rng = np.random.default_rng(1)
    A = C(cmat(rng, 3, 5))
    np.testing.assert_array_equal(adjoint(adjoint(A)).elements, A.elements)
    for _ in range(20):
        mu, eta = cvec(rng, 3), cvec(rng, 5)
        lhs = np.vdot(mu, apply(A, eta))
        rhs = np.vdot(apply(adjoint(A), mu), eta)
        assert abs(lhs - rhs) <= 1e-12 * np.linalg.norm(A.elements) * np.linalg.norm(mu) * np.linalg.norm(eta)


def test_adjoint_swaps_spaces():
    d, r = SpaceHandle.weighted([1, 2, 3]), SpaceHandle.cartesian(2)
    A = OperatorMatrix(d, r, np.ones((2, 3)))
    assert adjoint(A).domain == r and adjoint(A).range == d


def test_adjoint_relation_between_weighted_spaces():
    rng = np.random.default_rng(2)
    dom = random_space(rng, "diagonal", 4)
    rng_space = random_space(rng, "operator", 3)
    m = cmat(rng, 3, 4)  # native action: native domain coords -> native range coords
    dbasis, _ = gram_schmidt(dom, list(np.eye(4)))
    rbasis, _ = gram_schmidt(rng_space, list(np.eye(3)))
    A = assemble(dom, rng_space, m, dbasis, rbasis)
    for _ in range(20):
        mu, eta = cvec(rng, 3), cvec(rng, 4)
        lhs = inner(rng_space, mu, m @ eta)
        mu_s = to_cartesian_coords(rng_space, rbasis, mu)
        eta_s = to_cartesian_coords(dom, dbasis, eta)
        back = reconstruct(dbasis, apply(adjoint(A), mu_s))
        rhs = inner(dom, back, eta)
        assert abs(lhs - rhs) <= 1e-12 * norm(rng_space, mu) * norm(rng_space, m @ eta) * 10
        assert abs(lhs - np.vdot(mu_s, apply(A, eta_s))) <= 1e-10 * abs(lhs) + 1e-12


def test_compose_examples():
    rng = np.random.default_rng(3)
    B = C(cmat(rng, 3, 2))
    np.testing.assert_array_equal(compose(identity_op(SpaceHandle.cartesian(3)), B).elements, B.elements)
    A = C(cmat(rng, 4, 3))
    assert is_hermitian(compose(adjoint(A), A))
    a, b = [[1, 2j], [3, 4]], [[5, 6], [7j, 8]]
    oracle = [[sum(a[i][k] * b[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
    np.testing.assert_allclose(compose(C(a), C(b)).elements, oracle)
    with pytest.raises(ValueError):
        compose(B, B)


def test_identity_and_resolution_of_identity():
    np.testing.assert_array_equal(identity_op(SpaceHandle.cartesian(3)).elements, np.eye(3))
    rng = np.random.default_rng(4)
    sp = SpaceHandle.cartesian(4)
    basis, _ = gram_schmidt(sp, list(cmat(rng, 4, 4).T))
    total = sum(outer(b, b, sp, sp).elements for b in basis)
    np.testing.assert_allclose(total, np.eye(4), atol=1e-12)
    A = C(cmat(rng, 4, 4))
    np.testing.assert_array_equal(compose(identity_op(sp), A).elements, A.elements)


def test_outer_examples():
    sp = SpaceHandle.cartesian(2)
    np.testing.assert_array_equal(outer([1, 0], [0, 1], sp, sp).elements, [[0, 1], [0, 0]])
    v = np.array([0.6, 0.8j])
    np.testing.assert_allclose(apply(outer(v, v, sp, sp), v), v)
    rng = np.random.default_rng(5)
    o = outer(cvec(rng, 3), cvec(rng, 4), SpaceHandle.cartesian(3), SpaceHandle.cartesian(4))
    assert np.linalg.matrix_rank(o.elements) == 1


def test_hs_norm_examples():
    for m in HS_METHODS:
        assert hs_norm(C(np.eye(2)), m) == pytest.approx(np.sqrt(2), rel=1e-15)
        assert hs_norm(C([[3, 4]]), m) == pytest.approx(5, rel=1e-15)
    rng = np.random.default_rng(6)
    A = C(cmat(rng, 6, 6))
    oracle = np.sqrt(sum(abs(x) ** 2 for x in A.elements.ravel()))
    for m in HS_METHODS:
        assert hs_norm(A, m) == pytest.approx(oracle, rel=1e-10)
    with pytest.raises(ValueError):
        hs_norm(A, "frobenius")


def test_sup_norm_examples():
    assert sup_norm_estimate(identity_op(SpaceHandle.cartesian(4))) == pytest.approx(1, rel=1e-12)
    assert sup_norm_estimate(C(np.diag([3.0, 1.0]))) == pytest.approx(3, rel=1e-12)
    rng = np.random.default_rng(7)
    for seed in range(10):
        a = cmat(rng, 8, 8)
        oracle = np.linalg.svd(a, compute_uv=False)[0]
        assert sup_norm_estimate(C(a), seed=seed) == pytest.approx(oracle, rel=1e-6)
    assert sup_norm_estimate(C(np.zeros((2, 3)))) == 0


def test_sup_norm_is_deterministic_and_flags_nonconvergence():
    rng = np.random.default_rng(8)
    A = C(cmat(rng, 6, 6))
    assert sup_norm_estimate(A, seed=3) == sup_norm_estimate(A, seed=3)
    with pytest.warns(ConvergenceWarning):
        est = sup_norm_estimate(A, rel_tol=1e-300, max_iters=3)
    assert est > 0
    with pytest.raises(ValueError):
        sup_norm_estimate(A, rel_tol=0)


def test_truncate_examples():
    A = C([[1, 2], [3, 4]])
    kept, cert = truncate(A, 2, 2)
    assert cert.tail_hs_norm == 0
    np.testing.assert_array_equal(kept.elements, A.elements)
    kept, cert = truncate(A, 1, 1)
    np.testing.assert_array_equal(kept.elements, [[1, 0], [0, 0]])
    assert cert.tail_hs_norm == pytest.approx(np.sqrt(29), rel=1e-15)
    for m, n in ((0, 1), (1, 3)):
        with pytest.raises(ValueError):
            truncate(A, m, n)


def test_truncate_bound_and_pythagoras():
    rng = np.random.default_rng(9)
    for _ in range(50):
        r, c = rng.integers(1, 9, 2)
        A = C(cmat(rng, r, c))
        m, n = rng.integers(1, r + 1), rng.integers(1, c + 1)
        kept, cert = truncate(A, m, n)
        mu = cvec(rng, c)
        err = np.linalg.norm(apply(A, mu) - apply(kept, mu))
        assert err <= cert.tail_hs_norm * np.linalg.norm(mu) * (1 + 1e-12)
        total = hs_norm(A) ** 2
        assert cert.tail_hs_norm ** 2 + hs_norm(kept) ** 2 == pytest.approx(total, rel=1e-10)


def test_is_hermitian_examples():
    assert is_hermitian(C([[1, 1j], [-1j, 2]]))
    assert not is_hermitian(C([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        is_hermitian(C(np.ones((2, 3))))
    h = hermitian(np.random.default_rng(10), 3)
    assert not is_hermitian(OperatorMatrix(SpaceHandle.weighted([1, 2, 3]), SpaceHandle.cartesian(3), h))


def test_norm_inequalities():
    rng = np.random.default_rng(12)
    with warnings.catch_warnings():
        warnings.simplefilter("error", ConvergenceWarning)
        for seed in range(30):
            r, c = rng.integers(1, 9, 2)
            A = C(cmat(rng, r, c))
            sup = sup_norm_estimate(A, seed=seed)
            v = cvec(rng, c)
            assert np.linalg.norm(apply(A, v)) <= sup * np.linalg.norm(v) * (1 + 1e-6)
            assert sup <= hs_norm(A) * (1 + 1e-6)
            assert hs_norm(compose(adjoint(A), A)) <= hs_norm(A) ** 2 * (1 + 1e-9)


def test_trace_invariant_under_unitary_change_of_basis():
    rng = np.random.default_rng(13)
    A = C(cmat(rng, 5, 5))
    AdA = compose(adjoint(A), A)
    ref = hs_norm(A, "trace-AdA")
    for _ in range(20):
        u = C(unitary(rng, 5))
        rotated = compose(adjoint(u), compose(AdA, u))
        assert np.sqrt(np.trace(rotated.elements).real) == pytest.approx(ref, rel=1e-9)


def test_operator_rejects_bad_shapes():
    with pytest.raises(ValueError):
        OperatorMatrix(SpaceHandle.cartesian(2), SpaceHandle.cartesian(2), np.ones((2, 3)))
    with pytest.raises(ValueError):
        C([[np.nan]])
