"""Class predicates: normal, matricially/jointly/spherically quasinormal,
jointly hyponormal; normal part; conjecture search harness.

Every predicate is decided by a residual compared with a threshold. A
residual within a factor ``BAND`` of its threshold is *indeterminate*; the
boolean flag of an indeterminate check is ``False``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import (DEFAULT_TOL, OperatorTuple, SubspaceBasis, Tolerance,
                   adjoint_tuple, column_kernel, commutator, is_commuting,
                   null_space, power_circ)
from .polar import (condition_vi_residual, condition_vi_threshold,
                    spherical_polar)
from .theta import moment_check, moment_thresholds, theta_identity

BAND = 10.0

TRUE, FALSE, INDETERMINATE = "true", "false", "indeterminate"

FLAG_ORDER = ("commuting", "normal_tuple", "matricially_qn", "jointly_qn",
              "spherically_qn", "jointly_hyponormal")
# normal => matricially qn => jointly qn => spherically qn
HIERARCHY = ("normal_tuple", "matricially_qn", "jointly_qn", "spherically_qn")
SQN_METHODS = ("definition", "powers", "polar")


class InvariantViolation(RuntimeError):
    """A report contradicts an implication that holds for every input."""


class Check(NamedTuple):
    residual: float
    threshold: float

    @property
    def state(self) -> str:
        if self.residual <= self.threshold / BAND:
            return TRUE
        if self.residual >= self.threshold * BAND:
            return FALSE
        return INDETERMINATE

    @property
    def flag(self) -> bool:
        return self.state == TRUE


def _combine(*states: str) -> str:
    if FALSE in states:
        return FALSE
    if INDETERMINATE in states:
        return INDETERMINATE
    return TRUE


def _max_norm(mats) -> float:
    return max((float(np.linalg.norm(m)) for m in mats), default=0.0)


def _scale(T: OperatorTuple) -> float:
    return max(T.scale(), 1e-300)


def normality_check(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL) -> Check:
    """Each coordinate normal: ``max_k ||[T_k^*, T_k]||``."""
    res = _max_norm(commutator(a.conj().T, a) for a in T)
    return Check(res, tol.threshold(_scale(T) ** 2))


def commuting_check(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL) -> Check:
    _, res = is_commuting(T, tol)
    return Check(res, tol.threshold(_scale(T) ** 2))


def matricial_check(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL) -> Check:
    """``max ||[T_i, T_j^* T_k]||`` over all i, j, k."""
    res = 0.0
    for j, k in itertools.product(range(T.d), repeat=2):
        g = T[j].conj().T @ T[k]
        res = max(res, _max_norm(commutator(t, g) for t in T))
    return Check(res, tol.threshold(_scale(T) ** 3))


def joint_check(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL) -> Check:
    """``max ||[T_i, T_j^* T_j]||`` over all i, j."""
    res = 0.0
    for j in range(T.d):
        g = T[j].conj().T @ T[j]
        res = max(res, _max_norm(commutator(t, g) for t in T))
    return Check(res, tol.threshold(_scale(T) ** 3))


def spherical_check(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL) -> Check:
    """``max_i ||[T_i, Theta_T(I)]||``: the defining condition."""
    g = theta_identity(T)
    res = _max_norm(commutator(t, g) for t in T)
    return Check(res, tol.threshold(T.d * _scale(T) ** 3))


def powers_check(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL) -> Check:
    """``Theta^n(I) = Theta(I)^n`` for n in {2, 3}; reports the worse n."""
    res = moment_check(T, 3)
    thr = moment_thresholds(T, 3, tol)
    worst = max((2, 3), key=lambda n: res[n] / thr[n])
    return Check(res[worst], thr[worst])


def polar_check(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL) -> Check:
    """``V P = P V`` for the canonical spherical polar decomposition."""
    parts = spherical_polar(T, tol)
    return Check(condition_vi_residual(parts), condition_vi_threshold(parts, tol))


_SQN = {"definition": spherical_check, "powers": powers_check,
        "polar": polar_check}


def sqn_check(T: OperatorTuple, method: str = "definition",
              tol: Tolerance = DEFAULT_TOL) -> Check:
    try:
        fn = _SQN[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; "
                         f"expected one of {SQN_METHODS}") from None
    return fn(T, tol)


def spherically_quasinormal_via(T: OperatorTuple, method: str = "definition",
                                tol: Tolerance = DEFAULT_TOL) -> tuple[bool, float]:
    c = sqn_check(T, method, tol)
    return c.flag, c.residual


def is_spherically_qn(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL) -> bool:
    return spherical_check(T, tol).flag


def hyponormal_block(T: OperatorTuple) -> np.ndarray:
    """The ``dn x dn`` matrix with block (i, j) equal to ``[T_j^*, T_i]``."""
    n, d = T.dim, T.d
    B = np.zeros((d * n, d * n), dtype=complex)
    for i in range(d):
        for j in range(d):
            B[i * n:(i + 1) * n, j * n:(j + 1) * n] = commutator(T[j].conj().T, T[i])
    return B


def hyponormal_check(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL) -> Check:
    """Residual is the negative part of the smallest eigenvalue."""
    B = hyponormal_block(T)
    lam = float(np.linalg.eigvalsh((B + B.conj().T) / 2)[0])
    return Check(max(0.0, -lam), tol.threshold(T.d * _scale(T) ** 2))


@dataclass
class ClassificationReport:
    checks: dict[str, Check]
    method_checks: dict[str, Check]
    flags: dict[str, bool] = field(init=False)
    states: dict[str, str] = field(init=False)

    def __post_init__(self):
        c = self.checks
        self.states = {k: v.state for k, v in c.items() if k != "coordinate_normal"}
        self.states["normal_tuple"] = _combine(c["commuting"].state,
                                               c["coordinate_normal"].state)
        self.flags = {k: self.states[k] == TRUE for k in FLAG_ORDER}

    @property
    def residuals(self) -> dict[str, float]:
        out = {k: v.residual for k, v in self.checks.items()}
        out["normal_tuple"] = max(out["commuting"], out.pop("coordinate_normal"))
        return out

    @property
    def method_agreement(self) -> dict[str, str]:
        return {m: c.state for m, c in self.method_checks.items()}

    def methods_agree(self) -> bool | None:
        """None when some method lands in the ambiguity band."""
        states = set(self.method_agreement.values())
        if INDETERMINATE in states:
            return None
        return len(states) == 1

    def hierarchy_violations(self) -> list[tuple[str, str]]:
        out = []
        for strong, weak in zip(HIERARCHY, HIERARCHY[1:]):
            if self.flags[strong] and not self.flags[weak]:
                out.append((strong, weak))
        return out

    def to_dict(self) -> dict:
        return {
            "flags": {k: self.flags[k] for k in FLAG_ORDER},
            "verdicts": {k: self.states[k] for k in FLAG_ORDER},
            "residuals": {k: self.residuals[k] for k in FLAG_ORDER},
            "thresholds": {k: v.threshold for k, v in self.checks.items()},
            "method_agreement": self.method_agreement,
            "method_residuals": {m: c.residual for m, c in self.method_checks.items()},
        }


def classify(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL,
             strict: bool = False) -> ClassificationReport:
    """Run every class predicate on ``T``.

    With ``strict=True`` a broken implication chain raises
    :class:`InvariantViolation` instead of being left in the report.
    """
    checks = {
        "commuting": commuting_check(T, tol),
        "coordinate_normal": normality_check(T, tol),
        "matricially_qn": matricial_check(T, tol),
        "jointly_qn": joint_check(T, tol),
        "spherically_qn": spherical_check(T, tol),
        "jointly_hyponormal": hyponormal_check(T, tol),
    }
    methods = {"definition": checks["spherically_qn"],
               "powers": powers_check(T, tol),
               "polar": polar_check(T, tol)}
    report = ClassificationReport(checks, methods)
    if strict and report.hierarchy_violations():
        raise InvariantViolation(
            f"hierarchy violated: {report.hierarchy_violations()}")
    return report


def kernel_inclusion_residual(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL) -> float:
    """``max ||T_k^* x||`` over an orthonormal basis ``x`` of ``N(T)``.

    Zero (to round-off) means ``N(T)`` is contained in ``N(T^*)``.
    """
    K = column_kernel(T, tol).cols
    if K.shape[1] == 0:
        return 0.0
    Ts = adjoint_tuple(T)
    return max(float(np.linalg.norm(a @ K[:, j]))
               for a in Ts for j in range(K.shape[1]))


def normal_part_subspace(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL,
                         max_iter: int | None = None) -> SubspaceBasis:
    """Largest common reducing subspace on which ``T`` is a normal tuple.

    Starts from the joint kernel of all ``[T_k^*, T_k]`` and ``[T_i, T_j^*]``
    and repeatedly discards vectors that ``T_k`` or ``T_k^*`` move outside the
    current subspace. ``T`` is pure exactly when the result is ``{0}``.
    """
    if not is_commuting(T, tol)[0]:
        raise ValueError("normal part is only defined here for commuting tuples")
    n = T.dim
    blocks = [commutator(a.conj().T, a) for a in T]
    blocks += [commutator(T[i], T[j].conj().T)
               for i in range(T.d) for j in range(T.d) if i != j]
    K = null_space(np.vstack(blocks), tol)
    ops = list(T) + [a.conj().T for a in T]
    for _ in range(max_iter or n + 1):
        m = K.shape[1]
        if m == 0:
            break
        Q = np.eye(n) - K @ K.conj().T
        Y = null_space(np.vstack([Q @ a @ K for a in ops]), tol)
        if Y.shape[1] == m:
            break
        K = K @ Y
        # re-orthonormalize against drift
        if K.shape[1]:
            K, _ = np.linalg.qr(K)
    basis = SubspaceBasis(K, check=False)
    if basis.m:
        _validate_normal_part(T, basis, tol)
    return basis


def _validate_normal_part(T: OperatorTuple, M: SubspaceBasis, tol: Tolerance):
    P = M.projector()
    Q = np.eye(T.dim) - P
    s = _scale(T)
    inv = max(float(np.linalg.norm(Q @ a @ P)) for a in
              list(T) + [a.conj().T for a in T])
    C = M.compress_tuple(T)
    normal = normality_check(C, tol)
    comm = commuting_check(C, tol)
    if inv > 1e3 * tol.threshold(s) or not (normal.residual <= 1e3 * normal.threshold
                                           and comm.residual <= 1e3 * comm.threshold):
        raise InvariantViolation(
            f"normal part failed validation (invariance {inv:.3e}, "
            f"normality {normal.residual:.3e})")


def is_pure(T: OperatorTuple, tol: Tolerance = DEFAULT_TOL) -> bool:
    return normal_part_subspace(T, tol).m == 0


@dataclass
class ConjectureResult:
    candidates: list[dict]
    log: list[dict]
    trials: int
    hyponormal_trials: int


def conjecture_search(dim: int, d: int, n: int, trials: int, seed: int = 0,
                      tol: Tolerance = DEFAULT_TOL) -> ConjectureResult:
    """Look for commuting jointly hyponormal ``T`` with ``T^n`` spherically
    quasinormal but ``T`` not.

    Both verdicts must be clear of the ambiguity band. Hits are returned for
    manual audit; nothing is asserted about them.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if dim < 1 or d < 1 or n < 1:
        raise ValueError("dim, d and n must be positive")
    from .models import random_conjecture_candidate

    candidates, log = [], []
    hypo = 0
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        kind, T = random_conjecture_candidate(dim, d, rng)
        entry = {"trial": trial, "kind": kind, "dim": T.dim}
        h = hyponormal_check(T, tol)
        c = commuting_check(T, tol)
        entry["hyponormal_residual"] = h.residual
        entry["commuting_residual"] = c.residual
        if not (h.flag and c.flag):
            entry["status"] = "skipped"
            log.append(entry)
            continue
        hypo += 1
        base = spherical_check(T, tol)
        pw = spherical_check(power_circ(T, n), tol)
        entry.update(sqn_residual=base.residual, sqn_threshold=base.threshold,
                     power_sqn_residual=pw.residual,
                     power_sqn_threshold=pw.threshold)
        if pw.state == TRUE and base.state == FALSE:
            entry["status"] = "candidate"
            entry["matrices"] = [[[[z.real, z.imag] for z in row] for row in a]
                                 for a in T]
            candidates.append(entry)
        else:
            entry["status"] = "consistent"
        log.append(entry)
    return ConjectureResult(candidates, log, trials, hypo)
