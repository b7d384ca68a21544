"""Spherical polar decomposition ``T_k = V_k P`` with ``P = sqrt(sum T_k^* T_k)``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOL, OperatorTuple, Tolerance, rank_threshold


@dataclass(frozen=True)
class PolarParts:
    V: OperatorTuple
    P: np.ndarray
    initial_projector: np.ndarray

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.initial_projector).real))


def spherical_polar(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL) -> PolarParts:
    """Canonical spherical polar decomposition of ``T``.

    ``P`` and the pseudo-inverse are taken from the SVD of the stacked column
    operator ``U S W^*``: then ``P = W S W^*`` is the principal square root of
    ``Theta_T(I) = W S^2 W^*`` and ``V = U_r W_r^*`` vanishes on ``N(P)``.
    Working from the SVD avoids squaring the condition number.
    """
    A = T.stacked()
    U, s, Wh = np.linalg.svd(A, full_matrices=False)
    r = int(np.sum(s > rank_threshold(s, A.shape, tol)))
    W = Wh.conj().T
    P = (W * s) @ Wh
    P = (P + P.conj().T) / 2
    Vstack = U[:, :r] @ Wh[:r]
    proj = W[:, :r] @ Wh[:r]
    V = OperatorTuple(Vstack.reshape(T.d, T.dim, T.dim))
    return PolarParts(V=V, P=P, initial_projector=(proj + proj.conj().T) / 2)


def polar_residuals(T: OperatorTuple, parts: PolarParts) -> dict[str, float]:
    """Invariant residuals of a decomposition (all Frobenius norms)."""
    E = parts.initial_projector
    VV = parts.V.gram()
    return {
        "reconstruction": max(float(np.linalg.norm(t - v @ parts.P))
                              for t, v in zip(T, parts.V)),
        "partial_isometry": float(np.linalg.norm(VV - E)),
        "projector_idempotent": float(np.linalg.norm(E @ E - E)),
        "projector_hermitian": float(np.linalg.norm(E - E.conj().T)),
        "p_squared": float(np.linalg.norm(parts.P @ parts.P - T.gram())),
        "v_on_kernel": max(float(np.linalg.norm(v @ (np.eye(T.dim) - E)))
                           for v in parts.V),
    }


def condition_vi_residual(parts: PolarParts) -> float:
    P = parts.P
    return max(float(np.linalg.norm(v @ P - P @ v)) for v in parts.V)


def condition_vi_threshold(parts: PolarParts, tol: Tolerance = DEFAULT_TOL) -> float:
    return tol.threshold(max(1, parts.rank) * float(np.linalg.norm(parts.P, 2)))


def check_condition_vi(parts: PolarParts, tol: Tolerance = DEFAULT_TOL
                       ) -> tuple[bool, float]:
    """``V P = P V``; returns (verdict, ``max_k ||V_k P - P V_k||_F``)."""
    res = condition_vi_residual(parts)
    return res <= condition_vi_threshold(parts, tol), res
