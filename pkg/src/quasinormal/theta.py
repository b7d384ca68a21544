"""The elementary operator ``X -> sum_k T_k^* X T_k`` and its moments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOL, OperatorTuple, Tolerance


def theta_apply(T: OperatorTuple, X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    if X.shape != (T.dim, T.dim):
        raise ValueError(f"X has shape {X.shape}, expected {(T.dim, T.dim)}")
    # sum_k T_k^* X T_k
    A = T.mats
    return (A.conj().transpose(0, 2, 1) @ (X @ A)).sum(axis=0)


def theta_iterate(T: OperatorTuple, X, n: int) -> np.ndarray:
    if n < 0:
        raise ValueError(f"iteration count must be >= 0, got {n}")
    out = np.array(X, dtype=complex)
    for _ in range(n):
        out = theta_apply(T, out)
    return out


def theta_identity(T: OperatorTuple) -> np.ndarray:
    """``Theta_T(I) = sum_k T_k^* T_k``, symmetrized against round-off."""
    g = T.gram()
    return (g + g.conj().T) / 2


@dataclass(frozen=True)
class SpectralResolution:
    """Finite spectral measure: distinct eigenvalues with orthogonal projectors."""

    eigenvalues: np.ndarray
    projectors: tuple

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def apply(self, f) -> np.ndarray:
        """``sum_i f(lambda_i) E_i``."""
        n = self.projectors[0].shape[0]
        out = np.zeros((n, n), dtype=complex)
        for lam, e in zip(self.eigenvalues, self.projectors):
            out += f(lam) * e
        return out

    def power(self, n: int) -> np.ndarray:
        return self.apply(lambda x: x ** n)


def spectral_resolution(M, tol: Tolerance = DEFAULT_TOL,
                        psd: bool = True) -> SpectralResolution:
    """Eigen-resolution of a Hermitian (by default PSD) matrix.

    Eigenvalues closer than ``tol.rel * max(1, sigma_max)`` are merged into
    one cluster whose projector spans all of their eigenvectors.
    """
    M = np.asarray(M, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(M, 2))) if M.size else 1.0
    herm_res = float(np.linalg.norm(M - M.conj().T))
    # Hermitian-ness tolerance is loose: inputs are usually sums of products
    if herm_res > max(tol.abs, 1e3 * tol.rel * scale):
        raise ValueError(f"matrix is not Hermitian (residual {herm_res:.3e})")
    w, U = np.linalg.eigh((M + M.conj().T) / 2)
    if psd and len(w) and w[0] < -max(tol.abs, 1e3 * tol.rel * scale):
        raise ValueError(f"matrix has a negative eigenvalue {w[0]:.3e}")
    gap = tol.rel * scale
    groups: list[list[int]] = []
    for i, lam in enumerate(w):
        if groups and lam - w[groups[-1][-1]] < gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    eigs, projs = [], []
    for g in groups:
        lam = float(np.mean(w[g]))
        if psd:
            lam = max(lam, 0.0)
        V = U[:, g]
        eigs.append(lam)
        projs.append(V @ V.conj().T)
    return SpectralResolution(np.array(eigs), tuple(projs))


def moment_check(T: OperatorTuple, n_max: int = 5) -> dict[int, float]:
    """Residuals ``||Theta_T^n(I) - Theta_T(I)^n||_F`` for ``n = 2..n_max``."""
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    G = theta_identity(T)
    iterate = G
    power = G
    out = {}
    for n in range(2, n_max + 1):
        iterate = theta_apply(T, iterate)
        power = power @ G
        out[n] = float(np.linalg.norm(iterate - power))
    return out


def moment_thresholds(T: OperatorTuple, n_max: int = 5,
                      tol: Tolerance = DEFAULT_TOL) -> dict[int, float]:
    """Per-n thresholds matching :func:`moment_check` (scale ``||Theta(I)||^n``)."""
    g = max(float(np.linalg.norm(theta_identity(T), 2)), 1e-300)
    return {n: tol.threshold(T.dim * g ** n) for n in range(2, n_max + 1)}
