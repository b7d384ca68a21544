"""Example tuples: a named gallery, seeded random generators and truncated
weighted multishifts on a graded multi-index basis.

All randomness goes through ``numpy.random.default_rng`` (PCG64), so a seed
fixes the output bits on every platform numpy supports.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .core import OperatorTuple, SubspaceBasis, commutator
from .theta import theta_identity, theta_iterate

SHIFT_KINDS = ("hardy", "drury_arveson", "bergman")


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def crandn(rng: np.random.Generator, *shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(crandn(rng, n, n))
    # fix column phases so the distribution is Haar
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_isometry(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    q, r = np.linalg.qr(crandn(rng, rows, cols))
    return q * (np.diag(r) / np.abs(np.diag(r)))


# --------------------------------------------------------------------------
# truncated multishifts

def multi_indices(d: int, N: int) -> list[tuple[int, ...]]:
    """All alpha in N^d with |alpha| <= N, graded, then lex-descending within a degree."""
    out = []
    for deg in range(N + 1):
        level = [a for a in itertools.product(range(deg + 1), repeat=d) if sum(a) == deg]
        level.sort(reverse=True)
        out.extend(level)
    return out


def shift_weight(kind: str, alpha: tuple[int, ...], k: int) -> float:
    d, deg = len(alpha), sum(alpha)
    if kind == "hardy":
        return np.sqrt((alpha[k] + 1) / (deg + d))
    if kind == "drury_arveson":
        return np.sqrt((alpha[k] + 1) / (deg + 1))
    if kind == "bergman":
        return np.sqrt((alpha[k] + 1) / (deg + d + 1))
    raise ValueError(f"unknown multishift kind {kind!r}; expected one of {SHIFT_KINDS}")


@dataclass(frozen=True)
class TruncatedMultishift:
    """Weighted multishift ``T_k e_alpha = w_k(alpha) e_{alpha + eps_k}`` cut at degree N."""

    kind: str
    d: int
    N: int
    basis: tuple
    weights: np.ndarray = field(repr=False)
    mats: OperatorTuple = field(repr=False)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([sum(a) for a in self.basis])

    @property
    def dim(self) -> int:
        return len(self.basis)

    def degree_subspace(self, max_degree: int) -> SubspaceBasis:
        idx = np.flatnonzero(self.degrees <= max_degree)
        return SubspaceBasis.coordinate(self.dim, idx)

    def degree_projector(self, max_degree: int) -> np.ndarray:
        return np.diag((self.degrees <= max_degree).astype(float)).astype(complex)

    @property
    def interior(self) -> SubspaceBasis:
        """Span of ``e_alpha`` with ``|alpha| <= N - 1``."""
        return self.degree_subspace(self.N - 1)

    def commuting_condition_residual(self) -> float:
        """``max |w_k(a) w_j(a+e_k) - w_j(a) w_k(a+e_j)|`` over valid a, j, k."""
        index = {a: i for i, a in enumerate(self.basis)}
        res = 0.0
        for a in self.basis:
            if sum(a) > self.N - 2:
                continue
            i = index[a]
            for j, k in itertools.combinations(range(self.d), 2):
                ak = index[_bump(a, k)]
                aj = index[_bump(a, j)]
                lhs = self.weights[k, i] * self.weights[j, ak]
                rhs = self.weights[j, i] * self.weights[k, aj]
                res = max(res, abs(lhs - rhs))
        return res


def _bump(a: tuple[int, ...], k: int) -> tuple[int, ...]:
    b = list(a)
    b[k] += 1
    return tuple(b)


def truncated_multishift(kind: str, d: int, N: int) -> TruncatedMultishift:
    if kind not in SHIFT_KINDS:
        raise ValueError(f"unknown multishift kind {kind!r}; expected one of {SHIFT_KINDS}")
    if d < 2 or N < 2:
        raise ValueError(f"need d >= 2 and N >= 2, got d={d}, N={N}")
    basis = multi_indices(d, N)
    index = {a: i for i, a in enumerate(basis)}
    n = len(basis)
    W = np.zeros((d, n))
    mats = np.zeros((d, n, n), dtype=complex)
    for i, a in enumerate(basis):
        if sum(a) == N:
            continue
        for k in range(d):
            w = shift_weight(kind, a, k)
            W[k, i] = w
            mats[k, index[_bump(a, k)], i] = w
    shift = TruncatedMultishift(kind, d, N, tuple(basis), W, OperatorTuple(mats))
    if shift.commuting_condition_residual() > 1e-14:
        raise AssertionError("multishift weights violate the commuting condition")
    return shift


def interior_identity_residual(shift: TruncatedMultishift) -> float:
    """``||(Theta(I) - I) P_interior||_F``."""
    G = theta_identity(shift.mats)
    P = shift.degree_projector(shift.N - 1)
    return float(np.linalg.norm((G - np.eye(shift.dim)) @ P))


def interior_commutator_residual(shift: TruncatedMultishift,
                                 T: OperatorTuple | None = None,
                                 reach: int = 1) -> float:
    """Spherical-quasinormality residual kept away from the truncation edge.

    ``T`` is a tuple of words of length ``reach`` in the shift (for example
    a power of it). Returns ``max_k ||P_left [T_k, Theta_T(I)] P_right||_F``
    where ``P_right`` keeps degrees ``<= N - reach`` and ``P_left`` degrees
    ``<= N - reach - 1``.
    """
    T = shift.mats if T is None else T
    G = theta_identity(T)
    L = shift.degree_projector(shift.N - reach - 1)
    R = shift.degree_projector(shift.N - reach)
    return max(float(np.linalg.norm(L @ commutator(t, G) @ R)) for t in T)


def interior_moment_residuals(shift: TruncatedMultishift, n_max: int = 5) -> dict[int, float]:
    """``||(Theta^n(I) - Theta(I)^n) P_{deg <= N-n}||_F`` for n = 2..n_max."""
    T = shift.mats
    G = theta_identity(T)
    out = {}
    for n in range(2, n_max + 1):
        P = shift.degree_projector(shift.N - n)
        D = theta_iterate(T, np.eye(shift.dim), n) - np.linalg.matrix_power(G, n)
        out[n] = float(np.linalg.norm(D @ P))
    return out


# --------------------------------------------------------------------------
# random generators

def random_commuting_normal(dim: int, d: int, seed=0) -> OperatorTuple:
    """``N_k = U D_k U^*`` with one Haar unitary and complex Gaussian diagonals."""
    if dim < 1 or d < 1:
        raise ValueError("dim and d must be positive")
    rng = _rng(seed)
    U = random_unitary(rng, dim)
    D = crandn(rng, d, dim)
    return OperatorTuple([(U * D[k]) @ U.conj().T for k in range(d)])


@dataclass(frozen=True)
class CommutingSample:
    T: OperatorTuple
    joint_eigenvalues: np.ndarray  # shape (dim, d)


def random_commuting(dim: int, d: int, seed=0, degree: int = 2) -> CommutingSample:
    """``T_k = S p_k(J) S^{-1}`` for a random upper-triangular ``J``.

    The ``p_k`` are random polynomials of the given degree and ``S`` is a
    well-conditioned random invertible matrix. The joint eigenvalues are
    ``(p_1(J_ii), ..., p_d(J_ii))``.
    """
    if dim < 1 or d < 1:
        raise ValueError("dim and d must be positive")
    rng = _rng(seed)
    J = np.triu(crandn(rng, dim, dim))
    S = np.eye(dim) + 0.5 * crandn(rng, dim, dim) / np.sqrt(dim)
    Sinv = np.linalg.inv(S)
    coeffs = crandn(rng, d, degree + 1)
    mats, eigs = [], np.zeros((dim, d), dtype=complex)
    diag = np.diag(J)
    for k in range(d):
        Uk = np.zeros((dim, dim), dtype=complex)
        Jp = np.eye(dim, dtype=complex)
        for c in coeffs[k]:
            Uk += c * Jp
            Jp = Jp @ J
        mats.append(S @ Uk @ Sinv)
        eigs[:, k] = np.polyval(coeffs[k][::-1], diag)
    return CommutingSample(OperatorTuple(mats), eigs)


def random_shared_unitary_normal(rng: np.random.Generator, dim: int, d: int) -> OperatorTuple:
    """Scalar multiples of one unitary plus a diagonal summand: ``c_k U ⊕ D_k``."""
    a = int(rng.integers(1, dim + 1)) if dim > 1 else 1
    U = random_unitary(rng, a)
    c = crandn(rng, d)
    D = crandn(rng, d, dim - a)
    mats = []
    for k in range(d):
        M = np.zeros((dim, dim), dtype=complex)
        M[:a, :a] = c[k] * U
        M[a:, a:] = np.diag(D[k])
        mats.append(M)
    W = random_unitary(rng, dim)
    return OperatorTuple([W @ M @ W.conj().T for M in mats])


def _block_positive(rng: np.random.Generator, sizes: list[int]) -> np.ndarray:
    p = 0.5 + rng.random(len(sizes))
    return np.concatenate([np.full(s, v) for s, v in zip(sizes, p)])


def _split_sizes(rng: np.random.Generator, dim: int) -> list[int]:
    if dim == 1:
        return [1]
    cut = int(rng.integers(1, dim))
    return [cut, dim - cut]


def random_jointly_qn(rng: np.random.Generator, dim: int, d: int) -> OperatorTuple:
    """``T_k = c_k W_k P`` with unitaries ``W_k`` and positive ``P`` block-scalar.

    ``W_k`` and ``P`` share the block structure, so ``T_j^* T_j = |c_j|^2 P^2``
    commutes with every ``T_i``; the ``W_k`` do not commute with each other.
    """
    sizes = _split_sizes(rng, dim)
    p = _block_positive(rng, sizes)
    c = crandn(rng, d)
    mats = []
    for k in range(d):
        W = np.zeros((dim, dim), dtype=complex)
        o = 0
        for s in sizes:
            W[o:o + s, o:o + s] = random_unitary(rng, s)
            o += s
        mats.append(c[k] * W * p)
    Q = random_unitary(rng, dim)
    return OperatorTuple([Q @ M @ Q.conj().T for M in mats])


def random_spherically_qn(rng: np.random.Generator, dim: int, d: int,
                          kernel: bool = False) -> OperatorTuple:
    """``T_k = V_k P``: ``(V_1; ...; V_d)`` a block-diagonal isometry, ``P`` block-scalar.

    ``Theta_T(I) = P^2`` is block-scalar, hence commutes with each ``T_k``.
    With ``kernel=True`` the last block of ``P`` is zero (needs ``dim >= 2``).
    """
    sizes = _split_sizes(rng, dim)
    p = _block_positive(rng, sizes)
    if kernel:
        p[dim - sizes[-1]:] = 0.0
    mats = [np.zeros((dim, dim), dtype=complex) for _ in range(d)]
    o = 0
    for s in sizes:
        V = random_isometry(rng, d * s, s)
        for k in range(d):
            mats[k][o:o + s, o:o + s] = V[k * s:(k + 1) * s]
        o += s
    Q = random_unitary(rng, dim)
    return OperatorTuple([Q @ (M * p) @ Q.conj().T for M in mats])


def random_generic(rng: np.random.Generator, dim: int, d: int) -> OperatorTuple:
    return OperatorTuple(crandn(rng, d, dim, dim))


CLASS_GENERATORS = {
    "normal": lambda rng, dim, d: random_commuting_normal(dim, d, rng),
    "matricially_qn": random_shared_unitary_normal,
    "jointly_qn": random_jointly_qn,
    "spherically_qn": random_spherically_qn,
    "commuting": lambda rng, dim, d: random_commuting(dim, d, rng).T,
    "generic": random_generic,
}

# the strongest class each generator is guaranteed to produce
CLASS_GUARANTEE = {
    "normal": "normal_tuple",
    "matricially_qn": "matricially_qn",
    "jointly_qn": "jointly_qn",
    "spherically_qn": "spherically_qn",
    "commuting": "commuting",
    "generic": None,
}


def random_conjecture_candidate(dim: int, d: int, rng: np.random.Generator
                                ) -> tuple[str, OperatorTuple]:
    """A random commuting tuple of size at most ``dim``, from a mix of families.

    Only some families are jointly hyponormal; the caller filters.
    """
    n = int(rng.integers(1, dim + 1))
    kind = str(rng.choice(["normal", "normal-shared", "triangular",
                           "jordan-sum", "perturbed-normal", "shift"]))
    if kind == "normal":
        return kind, random_commuting_normal(n, d, rng)
    if kind == "normal-shared":
        return kind, random_shared_unitary_normal(rng, n, d)
    if kind == "triangular":
        return kind, random_commuting(n, d, rng).T
    if kind == "jordan-sum":
        # a_k I + b_k J for a nilpotent Jordan block J
        J = np.eye(n, k=1)
        a, b = crandn(rng, d), crandn(rng, d)
        return kind, OperatorTuple([a[k] * np.eye(n) + b[k] * J for k in range(d)])
    if kind == "perturbed-normal":
        # multiples of one slightly non-normal matrix
        U = random_unitary(rng, n)
        base = (U * crandn(rng, n)) @ U.conj().T
        base = base + 10.0 ** rng.uniform(-6, -1) * U @ np.eye(n, k=1) @ U.conj().T
        c = crandn(rng, d)
        return kind, OperatorTuple([c[k] * base for k in range(d)])
    s = truncated_multishift("hardy", max(d, 2), 2)
    if d >= 2 and s.dim <= dim:
        return kind, s.mats
    return kind, random_commuting_normal(n, d, rng)


# --------------------------------------------------------------------------
# gallery

@dataclass(frozen=True)
class GalleryEntry:
    name: str
    T: OperatorTuple
    expected: dict
    tags: frozenset = frozenset()
    shift: TruncatedMultishift | None = None


def _flags(commuting=False, normal=False, mq=False, jq=False, sq=False, hypo=False):
    return {"commuting": commuting, "normal_tuple": normal, "matricially_qn": mq,
            "jointly_qn": jq, "spherically_qn": sq, "jointly_hyponormal": hypo}


ALL_TRUE = _flags(True, True, True, True, True, True)
COMMUTING_ONLY = _flags(commuting=True)

JORDAN2 = np.array([[0, 1], [0, 0]], dtype=complex)


def gallery() -> list[GalleryEntry]:
    """Named example tuples with their expected classification flags."""
    return list(_gallery())


@functools.lru_cache(maxsize=1)
def _gallery() -> tuple[GalleryEntry, ...]:
    out = [
        GalleryEntry("jordan2", OperatorTuple([JORDAN2]), COMMUTING_ONLY,
                     frozenset({"jordan"})),
        GalleryEntry("diag-normal-2",
                     OperatorTuple([np.diag([1, 2]), np.diag([3, 4])]),
                     ALL_TRUE, frozenset({"normal"})),
        GalleryEntry("diag-normal-3",
                     OperatorTuple([np.diag([1, 2, 3]), np.diag([0, 1j, -1]),
                                    np.diag([2, 2, 1 + 1j])]),
                     ALL_TRUE, frozenset({"normal"})),
        GalleryEntry("normal-d2-n4", random_commuting_normal(4, 2, seed=11),
                     ALL_TRUE, frozenset({"normal"})),
        GalleryEntry("normal-d3-n5", random_commuting_normal(5, 3, seed=3),
                     ALL_TRUE, frozenset({"normal"})),
        GalleryEntry("shared-unitary-d2-n4",
                     random_shared_unitary_normal(np.random.default_rng(5), 4, 2),
                     ALL_TRUE, frozenset({"normal"})),
        GalleryEntry("jq-unitary-block-d2-n4",
                     random_jointly_qn(np.random.default_rng(21), 4, 2),
                     _flags(jq=True, sq=True), frozenset({"jointly_qn"})),
        GalleryEntry("sqn-row-isometry-d2-n4",
                     random_spherically_qn(np.random.default_rng(8), 4, 2),
                     _flags(sq=True), frozenset({"spherically_qn"})),
        GalleryEntry("sqn-row-isometry-d3-n6",
                     random_spherically_qn(np.random.default_rng(9), 6, 3),
                     _flags(sq=True), frozenset({"spherically_qn"})),
        GalleryEntry("sqn-with-kernel-d2-n5",
                     random_spherically_qn(np.random.default_rng(4), 5, 2, kernel=True),
                     _flags(sq=True), frozenset({"spherically_qn", "kernel"})),
        GalleryEntry("normal-with-kernel",
                     OperatorTuple([np.diag([1, 0, 0]), np.diag([0, 0, 2j])]),
                     ALL_TRUE, frozenset({"normal", "kernel"})),
        GalleryEntry("jordan2-plus-diag5",
                     OperatorTuple([scipy.linalg.block_diag(JORDAN2, [[5]])]),
                     COMMUTING_ONLY, frozenset({"direct_sum"})),
        GalleryEntry("zero-cross-jordan",
                     OperatorTuple([np.kron(np.diag([1, 0]), JORDAN2),
                                    np.kron(np.diag([0, 1]), JORDAN2)]),
                     COMMUTING_ONLY, frozenset({"zero_cross"})),
        GalleryEntry("zero-cross-normal",
                     OperatorTuple([np.diag([2, 1j, 0, 0]), np.diag([0, 0, 3, -1])]),
                     ALL_TRUE, frozenset({"zero_cross", "normal"})),
    ]
    for kind in SHIFT_KINDS:
        for d in (2, 3):
            for N in (4, 6):
                s = truncated_multishift(kind, d, N)
                tags = {"multishift", kind}
                out.append(GalleryEntry(f"{kind}-d{d}-N{N}", s.mats,
                                        COMMUTING_ONLY, frozenset(tags), s))
    return tuple(out)


def gallery_entry(name: str) -> GalleryEntry:
    for e in gallery():
        if e.name == name:
            return e
    raise KeyError(name)
