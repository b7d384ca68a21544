"""Operator tuples, tolerances and subspace bases.

Everything here works on dense complex double-precision matrices. A tuple
``T = (T_1, ..., T_d)`` of ``n x n`` matrices is also viewed as the column
operator ``H -> H^d`` obtained by stacking the ``T_k`` vertically.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

MAX_TUPLE_LENGTH = 4096


@dataclass(frozen=True)
class Tolerance:
    """Relative tolerance with an absolute floor.

    The effective threshold for a comparison at scale ``s`` is
    ``max(abs, rel * s)``.
    """

    rel: float = 1e-10
    abs: float = 1e-12

    def __post_init__(self):
        if not self.rel > 0:
            raise ValueError(f"rel must be positive, got {self.rel}")
        if not self.abs >= 0:
            raise ValueError(f"abs must be non-negative, got {self.abs}")

    def threshold(self, scale: float = 1.0) -> float:
        return max(self.abs, self.rel * float(scale))


DEFAULT_TOL = Tolerance()


def _as_matrix(a) -> np.ndarray:
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


class OperatorTuple:
    """An ordered d-tuple of n x n complex matrices.

    The matrices are copied on construction and frozen; the commutativity
    flag is cached on first use.
    """

    def __init__(self, mats: Iterable, commuting: bool | None = None):
        arrs = [_as_matrix(m) for m in mats]
        if not arrs:
            raise ValueError("an operator tuple needs at least one matrix")
        n = arrs[0].shape[0]
        if n < 1:
            raise ValueError("matrices must be at least 1 x 1")
        for k, a in enumerate(arrs):
            if a.shape != (n, n):
                raise ValueError(
                    f"matrix {k} has shape {a.shape}, expected {(n, n)}")
        stack = np.stack(arrs)
        stack.flags.writeable = False
        self._mats = stack
        if commuting is not None:
            self.__dict__["_commuting"] = bool(commuting)

    @classmethod
    def single(cls, a) -> "OperatorTuple":
        return cls([a])

    @property
    def mats(self) -> np.ndarray:
        """Read-only array of shape ``(d, n, n)``."""
        return self._mats

    @property
    def d(self) -> int:
        return self._mats.shape[0]

    @property
    def dim(self) -> int:
        return self._mats.shape[1]

    def __len__(self) -> int:
        return self.d

    def __getitem__(self, k: int) -> np.ndarray:
        return self._mats[k]

    def __iter__(self):
        return iter(self._mats)

    def __repr__(self) -> str:
        return f"OperatorTuple(d={self.d}, dim={self.dim})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperatorTuple):
            return NotImplemented
        return self._mats.shape == other._mats.shape and bool(
            np.array_equal(self._mats, other._mats))

    __hash__ = None

    def norms(self) -> np.ndarray:
        """Frobenius norms of the entries."""
        return np.linalg.norm(self._mats, axis=(1, 2))

    def scale(self) -> float:
        """``max_k ||T_k||_F``; the reference scale for residuals."""
        return float(self.norms().max())

    def stacked(self) -> np.ndarray:
        """The column operator as a ``(d*n) x n`` matrix."""
        return self._mats.reshape(self.d * self.dim, self.dim)

    def gram(self) -> np.ndarray:
        """``sum_k T_k^* T_k``."""
        return np.einsum("kji,kjl->il", self._mats.conj(), self._mats)

    @cached_property
    def _commuting(self) -> bool:
        return is_commuting(self)[0]

    @property
    def commuting(self) -> bool:
        return self._commuting


def adjoint_tuple(T: OperatorTuple) -> OperatorTuple:
    return OperatorTuple(np.conj(np.swapaxes(T.mats, 1, 2)))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def is_commuting(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL
                 ) -> tuple[bool, float]:
    """Check ``[T_i, T_j] = 0`` for all pairs; returns (verdict, max residual)."""
    res = 0.0
    for i in range(T.d):
        for j in range(i + 1, T.d):
            res = max(res, float(np.linalg.norm(commutator(T[i], T[j]))))
    thr = tol.threshold(T.scale() ** 2)
    return res <= thr, res


def _check_dims(T: OperatorTuple, S: OperatorTuple):
    if T.dim != S.dim:
        raise ValueError(f"dimension mismatch: {T.dim} vs {S.dim}")


def circ_product(T: OperatorTuple, S: OperatorTuple,
                 max_length: int = MAX_TUPLE_LENGTH) -> OperatorTuple:
    """``(T_1S_1, ..., T_1S_n, ..., T_mS_1, ..., T_mS_n)``, row-major in (i, j)."""
    _check_dims(T, S)
    if T.d * S.d > max_length:
        raise ValueError(
            f"product length {T.d * S.d} exceeds the limit {max_length}")
    prods = np.einsum("iab,jbc->ijac", T.mats, S.mats)
    return OperatorTuple(prods.reshape(T.d * S.d, T.dim, T.dim))


def pointwise_product(T: OperatorTuple, S: OperatorTuple) -> OperatorTuple:
    _check_dims(T, S)
    if T.d != S.d:
        raise ValueError(f"tuple length mismatch: {T.d} vs {S.d}")
    return OperatorTuple(T.mats @ S.mats)


def power_circ(T: OperatorTuple, n: int,
               max_length: int = MAX_TUPLE_LENGTH) -> OperatorTuple:
    """``T^1 = T`` and ``T^(n+1) = T o T^n``; a tuple of length ``d**n``."""
    if n < 1:
        raise ValueError(f"power must be >= 1, got {n}")
    if T.d ** n > max_length:
        raise ValueError(
            f"power tuple length {T.d}**{n} exceeds the limit {max_length}")
    out = T
    for _ in range(n - 1):
        out = circ_product(T, out, max_length)
    return out


def power_pointwise(T: OperatorTuple, n: int) -> OperatorTuple:
    """``(T_1^n, ..., T_d^n)``."""
    if n < 1:
        raise ValueError(f"power must be >= 1, got {n}")
    return OperatorTuple([np.linalg.matrix_power(a, n) for a in T])


def rank_threshold(svals: np.ndarray, shape: tuple[int, int],
                   tol: Tolerance = DEFAULT_TOL) -> float:
    smax = float(svals[0]) if len(svals) else 0.0
    return tol.threshold(smax * max(shape))


def numerical_rank(a: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> int:
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > rank_threshold(s, a.shape, tol)))


def null_space(a: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical null space of ``a``."""
    rows, cols = a.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=complex)
    if rows == 0:
        return np.eye(cols, dtype=complex)
    _, s, vh = np.linalg.svd(a)
    r = int(np.sum(s > rank_threshold(s, a.shape, tol)))
    return vh[r:].conj().T.copy()


class SubspaceBasis:
    """A subspace of C^n given by an n x m matrix with orthonormal columns."""

    def __init__(self, cols, check: bool = True, tol: Tolerance = DEFAULT_TOL):
        c = np.array(cols, dtype=complex)
        if c.ndim == 1:
            c = c[:, None]
        if c.ndim != 2:
            raise ValueError(f"basis must be 2-D, got shape {c.shape}")
        if c.shape[1] > c.shape[0]:
            raise ValueError(f"{c.shape[1]} columns cannot be orthonormal "
                             f"in dimension {c.shape[0]}")
        if check and c.shape[1]:
            err = np.linalg.norm(c.conj().T @ c - np.eye(c.shape[1]))
            if err > tol.threshold(c.shape[1]) * 100:
                raise ValueError(f"columns are not orthonormal (residual {err:.3e})")
        c.flags.writeable = False
        self.cols = c

    @classmethod
    def from_span(cls, vectors, tol: Tolerance = DEFAULT_TOL) -> "SubspaceBasis":
        """Orthonormal basis of the column span of ``vectors``."""
        v = np.array(vectors, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[1] == 0:
            return cls.empty(v.shape[0])
        u, s, _ = np.linalg.svd(v, full_matrices=False)
        r = int(np.sum(s > rank_threshold(s, v.shape, tol)))
        return cls(u[:, :r], check=False)

    @classmethod
    def empty(cls, n: int) -> "SubspaceBasis":
        return cls(np.zeros((n, 0), dtype=complex), check=False)

    @classmethod
    def full(cls, n: int) -> "SubspaceBasis":
        return cls(np.eye(n, dtype=complex), check=False)

    @classmethod
    def coordinate(cls, n: int, indices: Sequence[int]) -> "SubspaceBasis":
        return cls(np.eye(n, dtype=complex)[:, list(indices)], check=False)

    @property
    def n(self) -> int:
        return self.cols.shape[0]

    @property
    def m(self) -> int:
        return self.cols.shape[1]

    def __repr__(self) -> str:
        return f"SubspaceBasis(n={self.n}, m={self.m})"

    def projector(self) -> np.ndarray:
        return self.cols @ self.cols.conj().T

    def compress(self, a: np.ndarray) -> np.ndarray:
        """``P^cr A|_M`` written in this basis: ``cols^* A cols``."""
        return self.cols.conj().T @ a @ self.cols

    def compress_tuple(self, T: OperatorTuple) -> OperatorTuple:
        if self.m == 0:
            raise ValueError("cannot compress to the zero subspace")
        return OperatorTuple([self.compress(a) for a in T])

    def complement(self) -> "SubspaceBasis":
        """Deterministic orthonormal basis of the orthogonal complement.

        Gram-Schmidt (applied twice) over the standard basis vectors in
        index order, keeping every vector that survives projection.
        """
        n, m = self.cols.shape
        basis = [self.cols[:, j] for j in range(m)]
        out = []
        for i in range(n):
            if len(basis) == n:
                break
            v = np.zeros(n, dtype=complex)
            v[i] = 1.0
            for _ in range(2):
                for b in basis:
                    v = v - b * np.vdot(b, v)
            nv = np.linalg.norm(v)
            if nv > 1e-8:
                v = v / nv
                basis.append(v)
                out.append(v)
        if not out:
            return SubspaceBasis.empty(n)
        return SubspaceBasis(np.column_stack(out), check=False)

    def contains(self, other: "SubspaceBasis", tol: Tolerance = DEFAULT_TOL) -> bool:
        if other.m == 0:
            return True
        res = np.linalg.norm(other.cols - self.projector() @ other.cols)
        return res <= tol.threshold(other.m) * 100

    def same_as(self, other: "SubspaceBasis", tol: Tolerance = DEFAULT_TOL) -> bool:
        return self.m == other.m and self.contains(other, tol)


def column_kernel(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL) -> SubspaceBasis:
    """``N(T) = intersection of the N(T_k)`` via the stacked column operator."""
    return SubspaceBasis(null_space(T.stacked(), tol), check=False)


def is_hermitian(a: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    scale = max(1.0, float(np.linalg.norm(a)))
    return float(np.linalg.norm(a - a.conj().T)) <= tol.threshold(scale)
