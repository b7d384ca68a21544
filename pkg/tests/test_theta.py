import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import diag_pair, jordan, seeds, tuples
from quasinormal.core import OperatorTuple, circ_product, power_circ
from quasinormal.models import truncated_multishift
from quasinormal.theta import (moment_check, moment_thresholds, spectral_resolution,
                               theta_apply, theta_identity, theta_iterate)


def _normalized(T):
    return OperatorTuple(T.mats / np.sqrt(max(np.linalg.norm(theta_identity(T), 2), 1e-300)))


class TestApply:
    def test_identity_tuple_doubles(self):
        X = np.arange(9.0).reshape(3, 3)
        assert np.allclose(theta_apply(OperatorTuple([np.eye(3)] * 2), X), 2 * X)

    def test_jordan(self):
        assert np.array_equal(theta_apply(jordan(), np.eye(2)), np.diag([0, 1]))

    def test_diagonal_pair(self):
        assert np.allclose(theta_apply(diag_pair(), np.eye(2)), np.diag([10, 20]))

    def test_shape_check(self):
        with pytest.raises(ValueError):
            theta_apply(jordan(), np.eye(3))

    @given(tuples(max_dim=5))
    def test_identity_image_is_psd(self, T):
        G = theta_identity(T)
        assert np.allclose(G, G.conj().T)
        assert np.linalg.eigvalsh(G).min() >= -1e-12 * max(1, np.linalg.norm(G))


class TestIterate:
    def test_zero_iterations(self):
        X = np.array([[1, 2j], [3, 4]])
        assert np.array_equal(theta_iterate(jordan(), X, 0), X)

    def test_jordan_second_iterate(self):
        assert not theta_iterate(jordan(), np.eye(2), 2).any()

    def test_normal_second_iterate(self):
        assert np.allclose(theta_iterate(diag_pair(), np.eye(2), 2), np.diag([100, 400]))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            theta_iterate(jordan(), np.eye(2), -1)


class TestSpectralResolution:
    def test_identity(self):
        R = spectral_resolution(np.eye(3))
        assert len(R) == 1 and R.eigenvalues[0] == pytest.approx(1)
        assert np.allclose(R.projectors[0], np.eye(3))

    def test_diagonal(self):
        R = spectral_resolution(np.diag([0.0, 1.0]))
        assert np.allclose(R.eigenvalues, [0, 1])
        assert np.allclose(R.projectors[0], np.diag([1, 0]))
        assert np.allclose(R.projectors[1], np.diag([0, 1]))

    def test_theta_of_normal_pair(self):
        R = spectral_resolution(theta_identity(diag_pair()))
        assert np.allclose(R.eigenvalues, [10, 20])

    def test_rejects_non_hermitian_and_negative(self):
        with pytest.raises(ValueError):
            spectral_resolution(np.array([[0, 1], [0, 0]]))
        with pytest.raises(ValueError):
            spectral_resolution(np.diag([-1.0, 1.0]))
        R = spectral_resolution(np.diag([-1.0, 1.0]), psd=False)
        assert np.allclose(R.eigenvalues, [-1, 1])

    def test_clusters_merge_split_multiplicities(self):
        rng = np.random.default_rng(3)
        Q = np.linalg.qr(rng.standard_normal((4, 4)))[0]
        M = Q @ np.diag([1.0, 1.0 + 1e-14, 2.0, 2.0]) @ Q.T
        assert len(spectral_resolution(M)) == 2

    @given(tuples(max_dim=6))
    def test_reconstruction_and_projector_algebra(self, T):
        M = theta_identity(T)
        R = spectral_resolution(M)
        scale = max(1.0, np.linalg.norm(M))
        assert np.linalg.norm(M - R.power(1)) <= 1e-10 * scale
        assert np.linalg.norm(M @ M @ M - R.power(3)) <= 1e-10 * scale**3
        total = sum(R.projectors)
        assert np.allclose(total, np.eye(T.dim), atol=1e-10)
        for i, E in enumerate(R.projectors):
            assert np.allclose(E @ E, E, atol=1e-10)
            assert np.allclose(E, E.conj().T, atol=1e-12)
            for F in R.projectors[i + 1:]:
                assert np.linalg.norm(E @ F) <= 1e-10
        assert list(R.eigenvalues) == sorted(R.eigenvalues)


class TestMoments:
    def test_normal_pair(self):
        res = moment_check(diag_pair())
        assert set(res) == {2, 3, 4, 5}
        assert max(res.values()) <= 1e-12 * 20**5

    def test_jordan(self):
        assert moment_check(jordan(), 2)[2] == pytest.approx(1.0)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            moment_check(jordan(), 1)

    def test_hardy_interior(self):
        from quasinormal.models import interior_moment_residuals
        res = interior_moment_residuals(truncated_multishift("hardy", 2, 6))
        assert max(res.values()) <= 1e-12

    def test_thresholds_grow_with_power(self):
        th = moment_thresholds(diag_pair(), 4)
        assert th[2] < th[3] < th[4]

    @given(tuples(max_dim=5))
    def test_moments_agree_with_resolution(self, T):
        """Iterates equal the resolution's powers exactly when the moment check passes."""
        T = _normalized(T)
        R = spectral_resolution(theta_identity(T))
        res = moment_check(T, 4)
        thr = moment_thresholds(T, 4)
        for n in (2, 3, 4):
            via_resolution = np.linalg.norm(theta_iterate(T, np.eye(T.dim), n) - R.power(n))
            assert abs(via_resolution - res[n]) <= 10 * thr[n]


class TestLaws:
    @given(tuples(max_dim=6, max_d=3), tuples(max_dim=6, max_d=3), seeds)
    def test_composition_law(self, T, S, seed):
        n = min(T.dim, S.dim)
        T = OperatorTuple(T.mats[:, :n, :n])
        S = OperatorTuple(S.mats[:, :n, :n])
        X = np.random.default_rng(seed).standard_normal((n, n))
        lhs = theta_apply(circ_product(T, S), X)
        rhs = theta_apply(S, theta_apply(T, X))
        scale = np.linalg.norm(T.mats) ** 2 * np.linalg.norm(S.mats) ** 2 * np.linalg.norm(X)
        assert np.linalg.norm(lhs - rhs) <= 1e-9 * max(scale, 1e-300)

    @given(tuples(max_dim=4, max_d=2), st.integers(1, 3), st.integers(1, 3))
    def test_iterated_law(self, T, n, k):
        T = _normalized(T)
        I = np.eye(T.dim)
        a = theta_iterate(power_circ(T, n), I, k)
        b = theta_iterate(T, I, n * k)
        assert np.linalg.norm(a - b) <= 1e-9 * np.sqrt(T.dim)
