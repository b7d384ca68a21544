import numpy as np
import pytest
from hypothesis import given

from conftest import seeds
from quasinormal.classify import spherical_check
from quasinormal.core import OperatorTuple, SubspaceBasis
from quasinormal.extension import (ExtensionError, adjoint_split_residual, dual_tuple,
                                   extension_report, invertibility_equivalence_check,
                                   kernel_orthogonality_residual,
                                   minimal_reducing_closure, polar_inheritance_check,
                                   polar_inheritance_residuals, split_extension,
                                   theta_block_check)
from quasinormal.models import truncated_multishift
from quasinormal.suites import random_split_pair

E1 = SubspaceBasis.coordinate(2, [0])


def diag1(*v):
    return OperatorTuple([np.diag(v)])


class TestSplit:
    def test_single_diagonal(self):
        s = split_extension(diag1(1, 2), E1)
        assert s.T[0][0, 0] == 1 and s.A[0][0, 0] == 0 and s.Sstar[0][0, 0] == 2

    def test_pair(self):
        N = OperatorTuple([np.diag([1, 2]), np.diag([3, 4])])
        s = split_extension(N, E1)
        assert np.allclose(s.T.mats, [[[1]], [[3]]])
        assert np.allclose(s.S.mats, [[[2]], [[4]]])

    @given(seeds)
    def test_eigenvector_spans_reduce(self, seed):
        rng = np.random.default_rng(seed)
        N, H = random_split_pair(rng)
        s = split_extension(N, H)
        assert np.linalg.norm(s.A) <= 1e-10 * max(1, N.scale())
        assert s.block_residual() <= 1e-12 * max(1, N.scale())

    def test_rejects_non_invariant(self):
        H = SubspaceBasis.from_span(np.array([[1.0], [1.0]]))
        with pytest.raises(ExtensionError, match="invariant"):
            split_extension(diag1(1, 2), H)

    def test_rejects_non_normal(self):
        with pytest.raises(ExtensionError):
            split_extension(OperatorTuple([[[0, 1], [0, 0]]]), E1)

    def test_rejects_zero_and_mismatched(self):
        with pytest.raises(ExtensionError):
            split_extension(diag1(1, 2), SubspaceBasis.empty(2))
        with pytest.raises(ExtensionError):
            split_extension(diag1(1, 2), SubspaceBasis.coordinate(3, [0]))


class TestThetaBlocks:
    def test_reducing(self):
        s = split_extension(diag1(1, 2), E1)
        rep = theta_block_check(s)
        assert rep.off_diagonal == 0 and rep.block_diagonal

    def test_diagonal_theta(self):
        from quasinormal.theta import theta_identity
        s = split_extension(diag1(1, 2), E1)
        assert np.allclose(theta_identity(s.N), np.diag([1, 4]))
        assert theta_block_check(s).top_left_residual == 0

    @given(seeds)
    def test_verdict_matches_restricted_tuple(self, seed):
        N, H = random_split_pair(np.random.default_rng(seed))
        s = split_extension(N, H)
        rep = theta_block_check(s)
        sq = spherical_check(s.T)
        assert rep.block_diagonal == sq.flag
        assert rep.corner_identity <= 1e-10 * max(1, N.scale()) ** 2


class TestClosure:
    def test_reducing_is_itself(self):
        assert minimal_reducing_closure(diag1(1, 2), E1).same_as(E1)

    def test_rotation_fills_the_plane(self):
        N = OperatorTuple([[[0, -1], [1, 0]]])
        assert minimal_reducing_closure(N, E1).m == 2

    def test_adjoint_split_shape(self):
        for seed in range(20):
            N, H = random_split_pair(np.random.default_rng(seed))
            s = split_extension(N, H)
            if s.S is not None:
                assert adjoint_split_residual(s) <= 1e-12 * max(1, N.scale())


class TestPolarInheritance:
    def test_reducing_normal(self):
        for seed in range(10):
            N, H = random_split_pair(np.random.default_rng(seed))
            s = split_extension(N, H)
            p, v = polar_inheritance_check(s)
            assert p <= 1e-10 and v <= 1e-10

    def test_diagonal(self):
        s = split_extension(diag1(1, 2), E1)
        assert polar_inheritance_check(s) == pytest.approx((0.0, 0.0), abs=1e-15)

    def test_nested_hardy_surrogate(self):
        small = truncated_multishift("hardy", 2, 6)
        big = truncated_multishift("hardy", 2, 7)
        H = big.degree_subspace(6)
        T_int = small.degree_subspace(5)
        p, v = polar_inheritance_residuals(big.mats, H, T=small.mats, restrict=T_int)
        assert p <= 1e-10 and v <= 1e-10

    def test_requires_spherically_qn(self):
        N = OperatorTuple([np.diag([1, 2, 3])])
        H = SubspaceBasis.coordinate(3, [0, 1])
        s = split_extension(N, H)
        polar_inheritance_check(s)  # normal restriction is fine


class TestDual:
    def test_single_diagonal(self):
        rep = dual_tuple(split_extension(diag1(1, 2), E1))
        assert np.allclose(rep.S.mats, [[[2]]])
        assert rep.classification["flags"]["normal_tuple"]

    def test_reducing_gives_complement_block(self):
        N = OperatorTuple([np.diag([1, 2, 3]), np.diag([4, 5, 6])])
        s = split_extension(N, SubspaceBasis.coordinate(3, [0]))
        S = dual_tuple(s).S
        assert np.allclose(S.mats, [np.diag([2, 3]), np.diag([5, 6])])

    def test_proper_closure_is_rejected(self):
        J = np.zeros((3, 3)); J[0, 1] = 1
        N = OperatorTuple([J])
        s = split_extension(N, SubspaceBasis.coordinate(3, [0]), require_normal=False)
        assert minimal_reducing_closure(N, s.H).m == 2
        with pytest.raises(ExtensionError, match="minimal"):
            dual_tuple(s)

    def test_whole_space_is_rejected(self):
        s = split_extension(diag1(1, 2), SubspaceBasis.full(2))
        with pytest.raises(ExtensionError):
            dual_tuple(s)

    @given(seeds)
    def test_involution(self, seed):
        N, H = random_split_pair(np.random.default_rng(seed))
        s = split_extension(N, H)
        if s.S is None:
            return
        from quasinormal.core import adjoint_tuple
        back = split_extension(adjoint_tuple(N), s.Hperp)
        T2 = dual_tuple(back).S
        U = H.cols.conj().T @ back.Hperp.cols
        for a, b in zip(s.T, T2):
            assert np.allclose(U @ b @ U.conj().T, a, atol=1e-10 * max(1, N.scale()))


class TestInvertibility:
    def test_all_true(self):
        rep = invertibility_equivalence_check(split_extension(diag1(1, 2), E1))
        assert rep.agree and rep.N_taylor_invertible

    def test_all_false(self):
        rep = invertibility_equivalence_check(split_extension(diag1(0, 1), E1))
        assert rep.agree and not rep.N_taylor_invertible
        assert not rep.T_left_taylor_invertible

    def test_kernel_in_complement(self):
        rep = invertibility_equivalence_check(split_extension(diag1(1, 0), E1))
        assert not rep.N_taylor_invertible and not rep.theta_N_invertible
        assert rep.T_left_taylor_invertible is True
        assert rep.S_left_taylor_invertible is False
        assert not rep.T_and_S_left_taylor_invertible

    @given(seeds)
    def test_first_two_match_kernel(self, seed):
        from quasinormal.core import column_kernel
        N, H = random_split_pair(np.random.default_rng(seed))
        rep = invertibility_equivalence_check(split_extension(N, H))
        trivial = column_kernel(N).m == 0
        assert rep.N_taylor_invertible == rep.theta_N_invertible == trivial
        assert rep.agree


class TestKernelOrthogonality:
    @given(seeds)
    def test_random_splits(self, seed):
        N, H = random_split_pair(np.random.default_rng(seed))
        s = split_extension(N, H)
        if spherical_check(s.T).flag:
            assert kernel_orthogonality_residual(s) <= 1e-10 * max(1, N.scale()) ** 2


class TestReport:
    def test_diag_example(self):
        N = OperatorTuple([np.diag([1, 2]), np.diag([3, 4])])
        rep = extension_report(N, E1)
        assert rep["theta_block"]["block_diagonal"]
        assert rep["invertibility"]["agree"] and rep["invertibility"]["N_taylor_invertible"]
        assert rep["A_norm"] == 0 and rep["reducing"]
        import json
        json.dumps(rep, default=str)

    def test_non_invariant(self):
        H = SubspaceBasis.from_span(np.array([[1.0], [1.0]]))
        with pytest.raises(ExtensionError):
            extension_report(diag1(1, 2), H)
