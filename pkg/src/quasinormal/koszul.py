"""Koszul complex, Taylor invertibility and the Taylor spectrum.

Stage ``p`` of the complex is ``Lambda^p(C^d) ⊗ C^n`` with the basis
``e_S ⊗ e_i``: subsets ``S`` of ``{0..d-1}`` of size ``p`` in lexicographic
order, each carrying an ``n``-block. The boundary is

    delta_p(e_S ⊗ x) = sum_{k not in S} (-1)^{#{s in S: s < k}} e_{S ∪ {k}} ⊗ T_k x.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.linalg

from .core import (DEFAULT_TOL, OperatorTuple, Tolerance, column_kernel,
                   is_commuting, numerical_rank)

CLUSTER_TOL = 1e-8


def exterior_basis(d: int, p: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(d), p))


@dataclass(frozen=True)
class KoszulComplex:
    d: int
    dim: int
    boundaries: tuple  # delta_0 .. delta_d

    def stage_dims(self) -> list[int]:
        return [comb(self.d, p) * self.dim for p in range(self.d + 1)]

    def chain_residual(self) -> float:
        """``max_p ||delta_{p+1} delta_p||_F``."""
        res = 0.0
        for a, b in zip(self.boundaries, self.boundaries[1:]):
            if b.size and a.size:
                res = max(res, float(np.linalg.norm(b @ a)))
        return res


def build_koszul(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL,
                 check: bool = True) -> KoszulComplex:
    if check and not is_commuting(T, tol)[0]:
        raise ValueError("the Koszul complex needs a commuting tuple")
    d, n = T.d, T.dim
    maps = []
    for p in range(d + 1):
        src = exterior_basis(d, p)
        dst = exterior_basis(d, p + 1)
        row = {S: i for i, S in enumerate(dst)}
        D = np.zeros((len(dst) * n, len(src) * n), dtype=complex)
        for j, S in enumerate(src):
            for k in range(d):
                if k in S:
                    continue
                sign = -1.0 if sum(s < k for s in S) % 2 else 1.0
                i = row[tuple(sorted(S + (k,)))]
                D[i * n:(i + 1) * n, j * n:(j + 1) * n] = sign * T[k]
        maps.append(D)
    K = KoszulComplex(d, n, tuple(maps))
    if check:
        res = K.chain_residual()
        if res > tol.threshold(max(T.scale(), 1e-300) ** 2) * 10:
            raise ValueError(f"boundary maps do not compose to zero ({res:.3e})")
    return K


@dataclass(frozen=True)
class HomologyProfile:
    betti: tuple

    @property
    def exact(self) -> bool:
        return all(h == 0 for h in self.betti)


def homology(K: KoszulComplex, tol: Tolerance = DEFAULT_TOL) -> HomologyProfile:
    dims = K.stage_dims()
    ranks = [numerical_rank(D, tol) for D in K.boundaries]
    betti = []
    for p in range(K.d + 1):
        kernel = dims[p] - ranks[p]
        incoming = ranks[p - 1] if p > 0 else 0
        betti.append(kernel - incoming)
    return HomologyProfile(tuple(betti))


def shifted(T: OperatorTuple, lam) -> OperatorTuple:
    lam = np.asarray(lam, dtype=complex)
    if lam.shape != (T.d,):
        raise ValueError(f"point has {lam.shape} coordinates, expected {T.d}")
    eye = np.eye(T.dim)
    return OperatorTuple([a - l * eye for a, l in zip(T, lam)])


def taylor_invertible(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL) -> bool:
    return homology(build_koszul(T, tol), tol).exact


def left_taylor_invertible(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Trivial joint kernel; the range is automatically closed in finite dimension."""
    return column_kernel(T, tol).m == 0


# --------------------------------------------------------------------------
# joint eigenvalues

def _dedupe(points: np.ndarray, radius: float) -> np.ndarray:
    out: list[np.ndarray] = []
    for p in points:
        if not any(np.linalg.norm(p - q) <= radius for q in out):
            out.append(p)
    return np.array(out).reshape(len(out), points.shape[1])


def _triangular_residual(T: OperatorTuple, Z: np.ndarray) -> float:
    return max(float(np.linalg.norm(np.tril(Z.conj().T @ a @ Z, -1))) for a in T)


def _cluster(values: np.ndarray, radius: float) -> list[list[int]]:
    """Single-linkage clusters of complex numbers."""
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        hits = [g for g in groups if any(abs(v - values[j]) <= radius for j in g)]
        merged = [i] + [j for g in hits for j in g]
        groups = [g for g in groups if g not in hits] + [sorted(merged)]
    return sorted(groups, key=lambda g: g[0])


def joint_eigenvalues(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL,
                      seed: int = 0, cluster_tol: float = CLUSTER_TOL,
                      attempts: int = 3) -> np.ndarray:
    """Joint eigenvalues of a commuting tuple, one row per distinct point.

    A random combination ``M = sum c_k T_k`` is Schur-triangularized and the
    basis is checked to triangularize every ``T_k``. When that fails (for
    example inside a derogatory nilpotent block) the eigenvalues of ``M`` are
    grouped and each group's invariant subspace is split off with a sorted
    Schur form; the joint eigenvalue is then read from block traces.
    """
    if not is_commuting(T, tol)[0]:
        raise ValueError("joint eigenvalues need a commuting tuple")
    scale = max(1.0, T.scale())
    thr = tol.threshold(scale * T.dim) * 100
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        c = rng.standard_normal(T.d) + 1j * rng.standard_normal(T.d)
        M = np.tensordot(c, T.mats, axes=1)
        R, Z = scipy.linalg.schur(M, output="complex")
        if _triangular_residual(T, Z) <= thr:
            pts = np.array([[np.vdot(Z[:, i], a @ Z[:, i]) for a in T]
                            for i in range(T.dim)])
            return _dedupe(pts, cluster_tol * scale)
    return _joint_eigenvalues_by_blocks(T, M, thr, cluster_tol * scale)


def _joint_eigenvalues_by_blocks(T: OperatorTuple, M: np.ndarray, thr: float,
                                 radius: float) -> np.ndarray:
    ev = np.linalg.eigvals(M)
    spread = 1e-5 * max(1.0, float(np.abs(ev).max()))
    pts = []
    for g in _cluster(ev, spread):
        mu = ev[g].mean()
        r = max(abs(ev[j] - mu) for j in g) + spread / 2
        _, Z, m = scipy.linalg.schur(M, output="complex",
                                     sort=lambda x, mu=mu, r=r: abs(x - mu) <= r)
        Z1 = Z[:, :m]
        Q = np.eye(T.dim) - Z1 @ Z1.conj().T
        inv = max(float(np.linalg.norm(Q @ a @ Z1)) for a in T)
        if inv > thr * 1e3:
            raise ValueError(f"simultaneous triangularization failed ({inv:.3e}); "
                             "input is probably not commuting")
        pts.append([np.trace(Z1.conj().T @ a @ Z1) / m for a in T])
    return _dedupe(np.array(pts), radius)


# --------------------------------------------------------------------------
# grid scan

@dataclass(frozen=True)
class GridPoint:
    lam: tuple
    exact: bool
    betti: tuple


def taylor_spectrum_grid(T: OperatorTuple, grid, tol: Tolerance = DEFAULT_TOL
                         ) -> list[GridPoint]:
    """Exactness of the Koszul complex of ``T - lambda`` for each grid point, in order."""
    if not is_commuting(T, tol)[0]:
        raise ValueError("the Taylor spectrum needs a commuting tuple")
    out = []
    for lam in grid:
        lam = np.asarray(lam, dtype=complex)
        prof = homology(build_koszul(shifted(T, lam), tol, check=False), tol)
        out.append(GridPoint(tuple(complex(z) for z in lam), prof.exact, prof.betti))
    return out


def auto_grid(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL,
              ring_points: int = 4) -> np.ndarray:
    """Joint eigenvalues followed by a ring of points around each of them.

    The ring radius is a quarter of the smallest distance between distinct
    joint eigenvalues, so no ring point is itself a joint eigenvalue.
    """
    eigs = joint_eigenvalues(T, tol)
    if len(eigs) > 1:
        dists = [np.linalg.norm(a - b) for a, b in itertools.combinations(eigs, 2)]
        delta = 0.25 * min(dists)
    else:
        delta = 0.25 * max(1.0, T.scale())
    direction = np.ones(T.d) / np.sqrt(T.d)
    ring = [mu + delta * np.exp(2j * np.pi * j / ring_points) * direction
            for mu in eigs for j in range(ring_points)]
    return np.vstack([eigs, np.array(ring)])
