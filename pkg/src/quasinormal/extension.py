"""Normal-extension workbench.

A normal tuple ``N`` on ``C^K`` and a jointly invariant subspace ``H`` give
the block form

    N_k = [[T_k, A_k],
           [0,   S_k^*]]      on  H ⊕ H^perp,

where ``T`` is the restricted tuple and ``S`` is the dual candidate.
Closed-range statements reduce to kernel statements in finite dimension and
are labelled that way in every report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import (InvariantViolation, classify, is_pure, normality_check,
                       spherical_check)
from .core import (DEFAULT_TOL, OperatorTuple, SubspaceBasis, Tolerance,
                   adjoint_tuple, column_kernel, is_commuting, numerical_rank)
from .koszul import left_taylor_invertible, taylor_invertible
from .polar import spherical_polar
from .theta import theta_identity


class ExtensionError(ValueError):
    """The (N, H) pair does not meet a precondition."""


@dataclass(frozen=True)
class ExtensionSplit:
    N: OperatorTuple
    H: SubspaceBasis
    Hperp: SubspaceBasis
    T: OperatorTuple
    A: np.ndarray        # (d, m, K - m)
    Sstar: np.ndarray    # (d, K - m, K - m)
    invariance_residual: float
    normal: bool

    @property
    def S(self) -> OperatorTuple | None:
        if self.Sstar.shape[1] == 0:
            return None
        return OperatorTuple(np.conj(np.swapaxes(self.Sstar, 1, 2)))

    @property
    def basis(self) -> np.ndarray:
        """Unitary ``[H | H^perp]``."""
        return np.hstack([self.H.cols, self.Hperp.cols])

    def block_residual(self) -> float:
        """Distance between ``[H|H^perp]^* N_k [H|H^perp]`` and the block form."""
        B = self.basis
        m = self.H.m
        res = 0.0
        for k, a in enumerate(self.N):
            M = B.conj().T @ a @ B
            R = np.zeros_like(M)
            R[:m, :m] = self.T[k]
            R[:m, m:] = self.A[k]
            R[m:, m:] = self.Sstar[k]
            res = max(res, float(np.linalg.norm(M - R)))
        return res


def invariance_residual(N: OperatorTuple, H: SubspaceBasis) -> float:
    """``max_k ||(I - P_H) N_k P_H||_F``."""
    Q = np.eye(N.dim) - H.projector()
    return max(float(np.linalg.norm(Q @ a @ H.cols)) for a in N)


def split_extension(N: OperatorTuple, H: SubspaceBasis, tol: Tolerance = DEFAULT_TOL,
                    require_normal: bool = True) -> ExtensionSplit:
    """Block decomposition of ``N`` over the invariant subspace ``H``.

    ``require_normal=False`` admits non-normal surrogates (for instance a
    truncated multishift standing in for an extension); the split records
    whether ``N`` was normal.
    """
    if H.n != N.dim:
        raise ExtensionError(f"subspace lives in C^{H.n}, tuple acts on C^{N.dim}")
    if H.m == 0:
        raise ExtensionError("H must be non-zero")
    scale = max(N.scale(), 1e-300)
    normal = (normality_check(N, tol).residual <= tol.threshold(scale ** 2) * 10
              and is_commuting(N, tol)[0])
    if require_normal and not normal:
        raise ExtensionError("N is not a normal tuple")
    inv = invariance_residual(N, H)
    if inv > tol.threshold(scale) * 10:
        raise ExtensionError(f"H is not invariant under N (residual {inv:.3e})")
    Hp = H.complement()
    Hc, Pc = H.cols, Hp.cols
    T = OperatorTuple([Hc.conj().T @ a @ Hc for a in N])
    A = np.array([Hc.conj().T @ a @ Pc for a in N]).reshape(N.d, H.m, Hp.m)
    Sstar = np.array([Pc.conj().T @ a @ Pc for a in N]).reshape(N.d, Hp.m, Hp.m)
    return ExtensionSplit(N, H, Hp, T, A, Sstar, inv, normal)


def theta_blocks(split: ExtensionSplit) -> dict[str, np.ndarray]:
    """``Theta_N(I)`` written in the ``[H | H^perp]`` basis, cut into blocks."""
    B = split.basis
    G = B.conj().T @ theta_identity(split.N) @ B
    m = split.H.m
    return {"HH": G[:m, :m], "HK": G[:m, m:], "KH": G[m:, :m], "KK": G[m:, m:]}


@dataclass(frozen=True)
class ThetaBlockReport:
    off_diagonal: float      # ||sum_k T_k^* A_k||_F
    threshold: float
    block_diagonal: bool
    corner_identity: float   # ||sum (A_k^* A_k + S_k S_k^*) - sum S_k^* S_k||_F
    top_left_residual: float # ||Theta_N(I)_HH - Theta_T(I)||_F

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def theta_block_check(split: ExtensionSplit, tol: Tolerance = DEFAULT_TOL
                      ) -> ThetaBlockReport:
    """Is ``Theta_N(I)`` block-diagonal over ``H ⊕ H^perp``?"""
    T, A, Ss = split.T, split.A, split.Sstar
    off = sum(T[k].conj().T @ A[k] for k in range(T.d))
    off_norm = float(np.linalg.norm(off))
    thr = tol.threshold(T.d * max(split.N.scale(), 1e-300) ** 2)
    if Ss.shape[1]:
        S = np.conj(np.swapaxes(Ss, 1, 2))
        lhs = sum(A[k].conj().T @ A[k] + S[k] @ S[k].conj().T for k in range(T.d))
        rhs = sum(S[k].conj().T @ S[k] for k in range(T.d))
        corner = float(np.linalg.norm(lhs - rhs))
    else:
        corner = 0.0
    top = float(np.linalg.norm(theta_blocks(split)["HH"] - theta_identity(T)))
    return ThetaBlockReport(off_norm, thr, off_norm <= thr, corner, top)


def minimal_reducing_closure(N: OperatorTuple, H: SubspaceBasis,
                             tol: Tolerance = DEFAULT_TOL) -> SubspaceBasis:
    """Smallest subspace containing ``H`` and invariant under every ``N_k`` and ``N_k^*``."""
    ops = list(N) + [a.conj().T for a in N]
    cur = H
    while True:
        vecs = np.hstack([cur.cols] + [a @ cur.cols for a in ops])
        nxt = SubspaceBasis.from_span(vecs, tol)
        if nxt.m == cur.m:
            return nxt
        cur = nxt


def adjoint_split_residual(split: ExtensionSplit) -> float:
    """``N_k^*`` in the ``[H^perp | H]`` basis must equal ``[[S_k, A_k^*], [0, T_k^*]]``."""
    B = np.hstack([split.Hperp.cols, split.H.cols])
    r = split.Hperp.m
    res = 0.0
    for k, a in enumerate(split.N):
        M = B.conj().T @ a.conj().T @ B
        R = np.zeros_like(M)
        R[:r, :r] = split.Sstar[k].conj().T
        R[:r, r:] = split.A[k].conj().T
        R[r:, r:] = split.T[k].conj().T
        res = max(res, float(np.linalg.norm(M - R)))
    return res


def polar_inheritance_residuals(N: OperatorTuple, H: SubspaceBasis,
                                tol: Tolerance = DEFAULT_TOL,
                                T: OperatorTuple | None = None,
                                restrict: SubspaceBasis | None = None
                                ) -> tuple[float, float]:
    """Compare the polar parts of ``T`` with compressions of those of ``N``.

    Returns ``(||P - H^* R H||, max_k ||V_k - H^* W_k H||)``, both measured on
    ``restrict`` (coordinates inside ``H``; default ``N(P)^perp``). ``T``
    defaults to the compression of ``N`` to ``H``.
    """
    if T is None:
        T = H.compress_tuple(N)
    big = spherical_polar(N, tol)
    small = spherical_polar(T, tol)
    R = H.compress(big.P)
    Wc = [H.compress(w) for w in big.V]
    E = small.initial_projector if restrict is None else restrict.projector()
    p_res = float(np.linalg.norm((small.P - R) @ E))
    v_res = max(float(np.linalg.norm((v - w) @ E)) for v, w in zip(small.V, Wc))
    return p_res, v_res


def polar_inheritance_check(split: ExtensionSplit, tol: Tolerance = DEFAULT_TOL
                            ) -> tuple[float, float]:
    if not spherical_check(split.T, tol).flag:
        raise ExtensionError("the restricted tuple is not spherically quasinormal")
    return polar_inheritance_residuals(split.N, split.H, tol, split.T)


@dataclass
class DualReport:
    S: OperatorTuple
    classification: dict
    adjoint_split_residual: float
    T_pure: bool
    S_pure: bool

    def to_dict(self) -> dict:
        return {"classification": self.classification,
                "adjoint_split_residual": self.adjoint_split_residual,
                "T_pure": self.T_pure, "S_pure": self.S_pure}


def dual_tuple(split: ExtensionSplit, tol: Tolerance = DEFAULT_TOL) -> DualReport:
    """The tuple ``S`` read off the lower-right blocks, with its report.

    Refuses splits whose reducing closure lies strictly between ``H`` and the
    whole space: there ``N`` is not a minimal extension of ``T`` and the
    caller should shrink the space to the closure first. A reducing ``H``
    (closure equal to ``H``) is accepted and its dual is the complementary
    block.
    """
    S = split.S
    if S is None:
        raise ExtensionError("H is the whole space; the dual is empty")
    closure = minimal_reducing_closure(split.N, split.H, tol)
    if closure.m != split.N.dim and closure.m != split.H.m:
        raise ExtensionError(
            f"N is not minimal over H: reducing closure has dimension "
            f"{closure.m} of {split.N.dim}")
    return DualReport(
        S=S,
        classification=classify(S, tol).to_dict(),
        adjoint_split_residual=adjoint_split_residual(split),
        T_pure=_pure(split.T, tol),
        S_pure=_pure(S, tol),
    )


def _pure(T: OperatorTuple, tol: Tolerance) -> bool | None:
    try:
        return is_pure(T, tol)
    except (ValueError, InvariantViolation):
        return None


@dataclass(frozen=True)
class InvertibilityReport:
    N_taylor_invertible: bool
    theta_N_invertible: bool
    T_and_S_injective: bool
    T_and_S_left_taylor_invertible: bool
    T_left_taylor_invertible: bool
    S_left_taylor_invertible: bool | None

    @property
    def agree(self) -> bool:
        return len({self.N_taylor_invertible, self.theta_N_invertible,
                    self.T_and_S_injective, self.T_and_S_left_taylor_invertible}) == 1

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["agree"] = self.agree
        out["note"] = ("closed-range clauses are checked as kernel/rank statements "
                       "(all subspaces are closed in finite dimension)")
        return out


def invertibility_equivalence_check(split: ExtensionSplit, tol: Tolerance = DEFAULT_TOL
                                    ) -> InvertibilityReport:
    G = theta_identity(split.N)
    theta_inv = numerical_rank(G, tol) == split.N.dim
    T_inj = column_kernel(split.T, tol).m == 0
    S = split.S
    S_inj = True if S is None else column_kernel(S, tol).m == 0
    T_lti = left_taylor_invertible(split.T, tol)
    S_lti = None if S is None else left_taylor_invertible(S, tol)
    return InvertibilityReport(
        N_taylor_invertible=taylor_invertible(split.N, tol),
        theta_N_invertible=theta_inv,
        T_and_S_injective=T_inj and S_inj,
        T_and_S_left_taylor_invertible=T_lti and (S_lti is not False),
        T_left_taylor_invertible=T_lti,
        S_left_taylor_invertible=S_lti,
    )


def kernel_orthogonality_residual(split: ExtensionSplit, tol: Tolerance = DEFAULT_TOL) -> float:
    """``max |<x, Theta_T(I) h ⊕ 0>|`` over unit ``x`` in ``N(N)`` and ``h`` in ``H``.

    Computed as the spectral norm of ``K^* H Theta_T(I)`` with ``K`` an
    orthonormal basis of the joint kernel of ``N``.
    """
    K = column_kernel(split.N, tol).cols
    if K.shape[1] == 0:
        return 0.0
    M = K.conj().T @ split.H.cols @ theta_identity(split.T)
    return float(np.linalg.norm(M, 2))


def extension_report(N: OperatorTuple, H: SubspaceBasis, tol: Tolerance = DEFAULT_TOL
                     ) -> dict:
    """Every workbench check on one (N, H) pair, as a JSON-ready dict."""
    split = split_extension(N, H, tol)
    closure = minimal_reducing_closure(N, H, tol)
    tb = theta_block_check(split, tol)
    T_sqn = spherical_check(split.T, tol)
    report = {
        "dims": {"K": N.dim, "H": H.m, "H_perp": split.Hperp.m, "d": N.d},
        "invariance_residual": split.invariance_residual,
        "block_residual": split.block_residual(),
        "A_norm": float(np.linalg.norm(split.A)),
        "reducing": bool(np.linalg.norm(split.A) <= tb.threshold),
        "minimal_closure_dim": closure.m,
        "minimal": closure.m == N.dim,
        "theta_block": tb.to_dict(),
        "T_spherically_qn": T_sqn.flag,
        "T_spherically_qn_residual": T_sqn.residual,
        "T_classification": classify(split.T, tol).to_dict(),
        "invertibility": invertibility_equivalence_check(split, tol).to_dict(),
        "kernel_orthogonality_residual": kernel_orthogonality_residual(split, tol),
    }
    if T_sqn.flag:
        p, v = polar_inheritance_check(split, tol)
        report["polar_inheritance"] = {"P_residual": p, "V_residual": v}
    try:
        report["dual"] = dual_tuple(split, tol).to_dict()
    except ExtensionError as exc:
        report["dual"] = {"error": str(exc)}
    return report
