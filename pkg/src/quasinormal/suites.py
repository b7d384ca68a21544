"""Seeded property suites that check the theorems on generated examples.

Each suite returns a :class:`SuiteResult`; a suite passes when its
``failures`` list is empty. Trials draw from independent RNG streams keyed
by ``(seed, trial)``, so results do not depend on evaluation order and the
trial loop may be spread over threads (``QUASINORMAL_THREADS``).
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .classify import (FALSE, HIERARCHY, TRUE, Check, classify,
                       conjecture_search, kernel_inclusion_residual, sqn_check,
                       spherical_check)
from .core import (DEFAULT_TOL, OperatorTuple, SubspaceBasis, Tolerance,
                   circ_product, column_kernel, power_circ, power_pointwise)
from .extension import (adjoint_split_residual, invertibility_equivalence_check,
                        kernel_orthogonality_residual, polar_inheritance_residuals,
                        split_extension, theta_block_check)
from .koszul import build_koszul, joint_eigenvalues, taylor_spectrum_grid
from .models import (CLASS_GENERATORS, CLASS_GUARANTEE, crandn, gallery,
                     interior_commutator_residual, interior_identity_residual,
                     random_commuting, random_conjecture_candidate,
                     random_unitary, truncated_multishift)
from .theta import theta_apply, theta_identity, theta_iterate

THREADS_ENV = "QUASINORMAL_THREADS"


@dataclass
class SuiteResult:
    suite: str
    trials: int
    failures: list = field(default_factory=list)
    indeterminate: int = 0
    elapsed: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _map(fn, items, threads: int | None = None) -> list:
    threads = threads or default_threads()
    if threads == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items))


def _rng(seed: int, trial: int, salt: int = 0) -> np.random.Generator:
    return np.random.default_rng([seed, salt, trial])


# --------------------------------------------------------------------------

def hierarchy_suite(trials: int = 200, seed: int = 0, tol: Tolerance = DEFAULT_TOL
                    ) -> SuiteResult:
    """Implication chain on ``trials`` examples of each generated class."""
    res = SuiteResult("hierarchy", 0)
    classes = list(CLASS_GENERATORS)

    def one(item):
        ci, trial = item
        cls = classes[ci]
        rng = _rng(seed, trial, 100 + ci)
        dim, d = int(rng.integers(1, 9)), int(rng.integers(1, 4))
        T = CLASS_GENERATORS[cls](rng, dim, d)
        rep = classify(T, tol)
        out = []
        for v in rep.hierarchy_violations():
            out.append({"class": cls, "trial": trial, "violation": v})
        want = CLASS_GUARANTEE[cls]
        if want is not None and not rep.flags[want]:
            out.append({"class": cls, "trial": trial, "missing_flag": want,
                        "residual": rep.residuals[want]})
        return out, rep.flags

    items = [(ci, t) for ci in range(len(classes)) for t in range(trials)]
    t0 = time.perf_counter()
    counts = {c: {f: 0 for f in HIERARCHY} for c in classes}
    for (ci, _), (fails, flags) in zip(items, _map(one, items)):
        res.failures.extend(fails)
        for f in HIERARCHY:
            counts[classes[ci]][f] += int(flags[f])
    res.trials = len(items)
    res.elapsed = time.perf_counter() - t0
    res.details["flag_counts"] = counts
    return res


def _mixed_tuple(rng: np.random.Generator) -> tuple[str, OperatorTuple]:
    kinds = ["normal", "jointly_qn", "spherically_qn", "commuting", "generic",
             "matricially_qn", "jordan", "shift"]
    kind = kinds[int(rng.integers(len(kinds)))]
    dim, d = int(rng.integers(1, 9)), int(rng.integers(1, 4))
    if kind == "jordan":
        J = np.eye(dim, k=1)
        a, b = crandn(rng, d), crandn(rng, d)
        return kind, OperatorTuple([a[k] * np.eye(dim) + b[k] * J for k in range(d)])
    if kind == "shift":
        s = truncated_multishift(str(rng.choice(["hardy", "bergman", "drury_arveson"])),
                                 2, int(rng.integers(2, 4)))
        return kind, s.mats
    return kind, CLASS_GENERATORS[kind](rng, dim, d)


def charact_suite(trials: int = 200, seed: int = 0, tol: Tolerance = DEFAULT_TOL
                  ) -> SuiteResult:
    """Definition, powers-{2,3} and polar verdicts agree outside the ambiguity band."""
    res = SuiteResult("charact", trials)

    def one(trial):
        kind, T = _mixed_tuple(_rng(seed, trial, 200))
        states = {m: sqn_check(T, m, tol) for m in ("definition", "powers", "polar")}
        return kind, T.dim, T.d, states

    t0 = time.perf_counter()
    positives = 0
    for trial, (kind, dim, d, states) in enumerate(_map(one, range(trials))):
        s = {m: c.state for m, c in states.items()}
        if any(v not in (TRUE, FALSE) for v in s.values()):
            res.indeterminate += 1
            continue
        positives += s["definition"] == TRUE
        if len(set(s.values())) != 1:
            res.failures.append({"trial": trial, "kind": kind, "dim": dim, "d": d,
                                 "verdicts": s,
                                 "residuals": {m: c.residual for m, c in states.items()}})
    res.elapsed = time.perf_counter() - t0
    res.details["spherically_qn_inputs"] = positives
    return res


def theta_laws_suite(trials: int = 200, seed: int = 0, rel: float = 1e-9) -> SuiteResult:
    """Composition law and iterated law of the elementary operator."""
    res = SuiteResult("theta-laws", trials)
    worst = {"composition": 0.0, "iterated": 0.0}

    def one(trial):
        rng = _rng(seed, trial, 300)
        n = int(rng.integers(1, 9))
        T = OperatorTuple(crandn(rng, int(rng.integers(1, 4)), n, n))
        S = OperatorTuple(crandn(rng, int(rng.integers(1, 4)), n, n))
        X = crandn(rng, n, n)
        lhs = theta_apply(circ_product(T, S), X)
        rhs = theta_apply(S, theta_apply(T, X))
        scale = (np.linalg.norm(T.mats) ** 2 * np.linalg.norm(S.mats) ** 2
                 * np.linalg.norm(X))
        comp = float(np.linalg.norm(lhs - rhs) / scale)
        # normalize so that ||Theta_T(I)|| = 1 and powers stay O(1)
        Tn = OperatorTuple(T.mats / np.sqrt(np.linalg.norm(theta_identity(T), 2)))
        it = 0.0
        I = np.eye(n)
        for p in (1, 2, 3):
            Tp = power_circ(Tn, p)
            for k in (1, 2, 3):
                a = theta_iterate(Tp, I, k)
                b = theta_iterate(Tn, I, p * k)
                it = max(it, float(np.linalg.norm(a - b) / np.sqrt(n)))
        return comp, it

    t0 = time.perf_counter()
    for trial, (comp, it) in enumerate(_map(one, range(trials))):
        worst["composition"] = max(worst["composition"], comp)
        worst["iterated"] = max(worst["iterated"], it)
        if comp > rel or it > rel:
            res.failures.append({"trial": trial, "composition": comp, "iterated": it})
    res.elapsed = time.perf_counter() - t0
    res.details["worst_relative_residual"] = worst
    return res


def _interior_check(shift, reach: int, T: OperatorTuple, tol: Tolerance) -> Check:
    r = interior_commutator_residual(shift, T, reach)
    return Check(r, tol.threshold(T.d * max(T.scale(), 1e-300) ** 3))


def power_root_suite(seed: int = 0, tol: Tolerance = DEFAULT_TOL) -> SuiteResult:
    """Powers and subnormal roots of spherically quasinormal tuples."""
    res = SuiteResult("power-root", 0)
    t0 = time.perf_counter()
    checked = 0
    for e in gallery():
        if "normal" in e.tags:
            base = spherical_check(e.T, tol)
            for n in (2, 3):
                pw = spherical_check(power_circ(e.T, n), tol)
                checked += 1
                if base.flag and not pw.flag:
                    res.failures.append({"entry": e.name, "n": n, "law": "power",
                                         "residual": pw.residual})
                if pw.flag and not base.flag:
                    res.failures.append({"entry": e.name, "n": n, "law": "root",
                                         "residual": base.residual})
        if "hardy" in e.tags:
            s = e.shift
            base = _interior_check(s, 1, e.T, tol)
            for n in (2, 3):
                pw = _interior_check(s, n, power_circ(e.T, n), tol)
                checked += 1
                if base.flag != pw.flag or not base.flag:
                    res.failures.append({"entry": e.name, "n": n, "law": "interior",
                                         "base": base.residual, "power": pw.residual})
        if "zero_cross" in e.tags:
            for n in (2, 3):
                a = spherical_check(power_pointwise(e.T, n), tol).flag
                b = spherical_check(power_circ(e.T, n), tol).flag
                checked += 1
                if a != b:
                    res.failures.append({"entry": e.name, "n": n, "law": "zero-cross"})
    J = OperatorTuple([np.array([[0, 1], [0, 0]])])
    base = spherical_check(J, tol)
    sq = spherical_check(power_circ(J, 2), tol)
    res.details["jordan_control"] = {"T_residual": base.residual, "T_flag": base.flag,
                                     "T2_residual": sq.residual, "T2_flag": sq.flag,
                                     "T_hyponormal": classify(J, tol).flags["jointly_hyponormal"]}
    if not (sq.flag and sq.residual == 0.0 and not base.flag
            and abs(base.residual - 1.0) <= 1e-12):
        res.failures.append({"entry": "jordan2", "law": "negative control",
                             **res.details["jordan_control"]})
    res.trials = checked + 1
    res.elapsed = time.perf_counter() - t0
    return res


def _set_match(a: np.ndarray, b: np.ndarray, radius: float) -> bool:
    if len(a) != len(b):
        return False
    return all(min(np.linalg.norm(x - y) for y in b) <= radius for x in a) and \
        all(min(np.linalg.norm(x - y) for y in a) <= radius for x in b)


def koszul_suite(trials: int = 100, seed: int = 0, tol: Tolerance = DEFAULT_TOL,
                 cluster: float = 1e-8) -> SuiteResult:
    """Grid verdicts against the generator's joint eigenvalues; chain property."""
    res = SuiteResult("koszul", trials)
    worst_chain = 0.0

    def one(trial):
        rng = _rng(seed, trial, 500)
        n, d = int(rng.integers(1, 7)), int(rng.integers(1, 4))
        sample = random_commuting(n, d, rng)
        T, truth = sample.T, sample.joint_eigenvalues
        scale = max(1.0, T.scale())
        chain = build_koszul(T, tol).chain_residual() / scale ** 2
        found = joint_eigenvalues(T, tol)
        if len(truth) > 1:
            sep = min(np.linalg.norm(a - b) for i, a in enumerate(truth)
                      for b in truth[i + 1:])
        else:
            sep = 1.0
        delta = 0.25 * sep
        ring = [mu + delta * np.exp(2j * np.pi * j / 3) * np.ones(d) / np.sqrt(d)
                for mu in truth for j in range(3)]
        grid = np.vstack([truth, np.array(ring)])
        verdicts = taylor_spectrum_grid(T, grid, tol)
        spectrum = np.array([g.lam for g in verdicts if not g.exact]).reshape(-1, d)
        return {"n": n, "d": d, "chain": chain,
                "eig_match": _set_match(found, truth, cluster * scale),
                "grid_match": _set_match(spectrum, truth, cluster * scale),
                "h0_ok": all(g.betti[0] == column_kernel(
                    OperatorTuple([a - l * np.eye(n) for a, l in zip(T, g.lam)]), tol).m
                    for g in verdicts)}

    t0 = time.perf_counter()
    for trial, r in enumerate(_map(one, range(trials))):
        worst_chain = max(worst_chain, r["chain"])
        if not (r["eig_match"] and r["grid_match"] and r["h0_ok"]) or r["chain"] > 1e-10:
            res.failures.append({"trial": trial, **r})
    res.elapsed = time.perf_counter() - t0
    res.details["worst_chain_relative"] = worst_chain
    return res


def random_split_pair(rng: np.random.Generator) -> tuple[OperatorTuple, SubspaceBasis]:
    """A random normal tuple with a random reducing subspace.

    Joint eigenvalues may repeat or vanish so that subspaces need not be
    spanned by coordinate eigenvectors and kernels occur.
    """
    K, d = int(rng.integers(2, 9)), int(rng.integers(1, 4))
    distinct = int(rng.integers(1, K + 1))
    pts = crandn(rng, distinct, d)
    if rng.random() < 0.3:
        pts[0] = 0.0
    labels = np.concatenate([np.arange(distinct), rng.integers(0, distinct, K - distinct)])
    rng.shuffle(labels)
    U = random_unitary(rng, K)
    N = OperatorTuple([(U * pts[labels, k]) @ U.conj().T for k in range(d)])
    # H: a random subspace of each joint eigenspace, mixed within the eigenspace
    cols = []
    for lab in range(distinct):
        E = U[:, labels == lab]
        take = int(rng.integers(0, E.shape[1] + 1))
        if take:
            Q = random_unitary(rng, E.shape[1])[:, :take]
            cols.append(E @ Q)
    if not cols:
        cols = [U[:, :1]]
    if sum(c.shape[1] for c in cols) == K:
        cols[-1] = cols[-1][:, :-1]
    return N, SubspaceBasis.from_span(np.hstack(cols))


def extension_suite(trials: int = 100, seed: int = 0, tol: Tolerance = DEFAULT_TOL
                    ) -> SuiteResult:
    res = SuiteResult("extension", trials)
    worst = {"adjoint_split": 0.0, "kernel_orthogonality": 0.0}

    def one(trial):
        N, H = random_split_pair(_rng(seed, trial, 600))
        split = split_extension(N, H, tol)
        tb = theta_block_check(split, tol)
        sqn = spherical_check(split.T, tol)
        inv = invertibility_equivalence_check(split, tol)
        injective = column_kernel(N, tol).m == 0
        return {
            "K": N.dim, "m": H.m,
            "block_diagonal": tb.block_diagonal, "T_sqn": sqn.flag,
            "adjoint_split": adjoint_split_residual(split),
            "inv_i": inv.N_taylor_invertible, "inv_ii": inv.theta_N_invertible,
            "injective": injective,
            "kernel_orthogonality": kernel_orthogonality_residual(split, tol)
            / max(1.0, N.scale()) ** 2,
        }

    t0 = time.perf_counter()
    for trial, r in enumerate(_map(one, range(trials))):
        worst["adjoint_split"] = max(worst["adjoint_split"], r["adjoint_split"])
        worst["kernel_orthogonality"] = max(worst["kernel_orthogonality"],
                                            r["kernel_orthogonality"])
        ok = (r["block_diagonal"] == r["T_sqn"] and r["adjoint_split"] <= 1e-12
              and r["inv_i"] == r["injective"] and r["inv_ii"] == r["injective"]
              and r["kernel_orthogonality"] <= 1e-10)
        if not ok:
            res.failures.append({"trial": trial, **r})
    res.elapsed = time.perf_counter() - t0
    res.details["worst"] = worst
    return res


def hardy_suite(d: int = 2, N: int = 6, tol: Tolerance = DEFAULT_TOL) -> SuiteResult:
    """Interior spherical isometry and polar inheritance for nested truncations."""
    res = SuiteResult("hardy", 3)
    t0 = time.perf_counter()
    s = truncated_multishift("hardy", d, N)
    big = truncated_multishift("hardy", d, N + 1)
    ident = interior_identity_residual(s)
    comm = interior_commutator_residual(s)
    H = big.degree_subspace(N)
    p_res, v_res = polar_inheritance_residuals(big.mats, H, tol, T=s.mats,
                                               restrict=s.interior)
    res.details = {"identity_residual": ident, "interior_commutator": comm,
                   "polar_P_residual": p_res, "polar_V_residual": v_res}
    if ident > 1e-12:
        res.failures.append({"check": "interior identity", "residual": ident})
    if comm > 1e-10:
        res.failures.append({"check": "interior commutator", "residual": comm})
    if max(p_res, v_res) > 1e-10:
        res.failures.append({"check": "polar inheritance", "P": p_res, "V": v_res})
    res.elapsed = time.perf_counter() - t0
    return res


def kernel_inclusion_suite(tol: Tolerance = DEFAULT_TOL) -> SuiteResult:
    """``N(T) ⊆ N(T^*)`` for every spherically quasinormal gallery tuple."""
    res = SuiteResult("kernel-inclusion", 0)
    t0 = time.perf_counter()
    cases = [(e.name, e.T) for e in gallery()]
    cases += [(f"{e.name}^2", power_circ(e.T, 2)) for e in gallery() if e.T.d ** 2 <= 16]
    worst = 0.0
    for name, T in cases:
        if not spherical_check(T, tol).flag:
            continue
        res.trials += 1
        r = kernel_inclusion_residual(T, tol)
        worst = max(worst, r)
        if r > 1e-10:
            res.failures.append({"entry": name, "residual": r})
    res.details["worst_residual"] = worst
    res.elapsed = time.perf_counter() - t0
    return res


def conjecture_suite(trials: int = 1000, seed: int = 0, dim: int = 6, d: int = 2,
                     n: int = 2, tol: Tolerance = DEFAULT_TOL) -> SuiteResult:
    """Search harness: candidates are reported, never counted as failures."""
    t0 = time.perf_counter()
    out = conjecture_search(dim, d, n, trials, seed, tol)
    res = SuiteResult("conjecture", trials)
    res.details = {"candidates": out.candidates,
                   "hyponormal_trials": out.hyponormal_trials,
                   "kinds": _count(e["kind"] for e in out.log)}
    res.elapsed = time.perf_counter() - t0
    return res


def _count(it) -> dict:
    out: dict = {}
    for x in it:
        out[x] = out.get(x, 0) + 1
    return out


SUITES = {
    "hierarchy": lambda trials, seed, tol: hierarchy_suite(trials or 200, seed, tol),
    "charact": lambda trials, seed, tol: charact_suite(trials or 200, seed, tol),
    "theta-laws": lambda trials, seed, tol: theta_laws_suite(trials or 200, seed),
    "power-root": lambda trials, seed, tol: power_root_suite(seed, tol),
    "koszul": lambda trials, seed, tol: koszul_suite(trials or 100, seed, tol),
    "extension": lambda trials, seed, tol: extension_suite(trials or 100, seed, tol),
    "hardy": lambda trials, seed, tol: hardy_suite(tol=tol),
    "kernel-inclusion": lambda trials, seed, tol: kernel_inclusion_suite(tol),
    "conjecture": lambda trials, seed, tol: conjecture_suite(trials or 1000, seed, tol=tol),
}


def run_suite(name: str, trials: int | None = None, seed: int = 0,
              tol: Tolerance = DEFAULT_TOL) -> SuiteResult:
    try:
        fn = SUITES[name]
    except KeyError:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(SUITES)}") from None
    return fn(trials, seed, tol)
