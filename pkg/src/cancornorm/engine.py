"""Vectorized evaluation of the twelve statistics over batches of samples.

This is the bulk path used by null-distribution calibration and power
studies.  It computes, for a (B, n, p) stack of samples, the same values as
the per-sample functions in ``stats`` (up to floating-point noise), but with
all moment tensors and covariance blocks built as batched array operations.

The permutation sums in the third-order covariance block are precompiled,
per dimension p, into gather-index arrays derived from the very same term
lists that ``covblocks`` uses, so there is a single source of truth for the
combinatorics.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .cancor import EIGENVALUE_TOL, CONDITION_LIMIT
from .covblocks import (
    permutation_scheme,
    second_order_threshold,
    third_order_threshold,
)
from .errors import (
    DegenerateSampleError,
    EigenvalueRangeError,
    FunctionalDomainError,
    SampleSizeError,
    SingularBlockError,
)
from .moments import pair_indices, triple_indices
from .stats import ALL_STATISTICS, StatisticId


@dataclass(frozen=True)
class _Program:
    """Gather-index arrays for one dimension p."""

    p: int
    k4_pairs: np.ndarray        # (p^4, 3, 2) flat2 indices for the pair contractions
    l12: np.ndarray             # (p, q2) flat3
    l22_m4: np.ndarray          # (q2, q2) flat4
    l22_prod: np.ndarray        # (q2, q2, 3, 2) flat2: (ij,kl), (ik,jl), (il,jk)
    s12: np.ndarray             # (p, q3) flat4
    mu6: np.ndarray             # (q3, q3) flat6
    lam15_p2: np.ndarray        # (q3, q3, 15) flat2
    lam15_k4: np.ndarray        # (q3, q3, 15) flat4
    lam10_t: np.ndarray         # (q3, q3, 10, 2) flat3
    lam15m: np.ndarray          # (q3, q3, 15, 3) flat2
    p9_p2: np.ndarray           # (q3, q3, 9) flat2
    p9_k4: np.ndarray           # (q3, q3, 9) flat4
    t9_t: np.ndarray            # (q3, q3, 9, 2) flat3
    m6_pairs: np.ndarray        # (q3, q3, 6, 3) flat2


def _flat(p: int, idx: tuple[int, ...]) -> int:
    out = 0
    for i in idx:
        out = out * p + i
    return out


@lru_cache(maxsize=None)
def _program(p: int) -> _Program:
    pairs = pair_indices(p)
    triples = triple_indices(p)
    q2, q3 = len(pairs), len(triples)

    k4_pairs = np.empty((p**4, 3, 2), dtype=np.intp)
    for e in range(p**4):
        l = e % p
        k = (e // p) % p
        j = (e // p**2) % p
        i = e // p**3
        k4_pairs[e] = [
            (_flat(p, (i, j)), _flat(p, (k, l))),
            (_flat(p, (i, k)), _flat(p, (j, l))),
            (_flat(p, (i, l)), _flat(p, (j, k))),
        ]

    l12 = np.array([[_flat(p, (i,) + jk) for jk in pairs] for i in range(p)], dtype=np.intp)
    l22_m4 = np.empty((q2, q2), dtype=np.intp)
    l22_prod = np.empty((q2, q2, 3, 2), dtype=np.intp)
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            l22_m4[a, b] = _flat(p, (i, j, k, l))
            l22_prod[a, b] = [
                (_flat(p, (i, j)), _flat(p, (k, l))),
                (_flat(p, (i, k)), _flat(p, (j, l))),
                (_flat(p, (i, l)), _flat(p, (j, k))),
            ]

    s12 = np.array([[_flat(p, (i,) + t) for t in triples] for i in range(p)], dtype=np.intp)

    sum15_pair = permutation_scheme("sum15_pair").terms
    sum10_triple = permutation_scheme("sum10_triple").terms
    sum15_matching = permutation_scheme("sum15_matching").terms
    sum9_pair = permutation_scheme("sum9_pair").terms
    sum9_triple = permutation_scheme("sum9_triple").terms
    sum6_matching = permutation_scheme("sum6_matching").terms

    mu6 = np.empty((q3, q3), dtype=np.intp)
    lam15_p2 = np.empty((q3, q3, 15), dtype=np.intp)
    lam15_k4 = np.empty((q3, q3, 15), dtype=np.intp)
    lam10_t = np.empty((q3, q3, 10, 2), dtype=np.intp)
    lam15m = np.empty((q3, q3, 15, 3), dtype=np.intp)
    p9_p2 = np.empty((q3, q3, 9), dtype=np.intp)
    p9_k4 = np.empty((q3, q3, 9), dtype=np.intp)
    t9_t = np.empty((q3, q3, 9, 2), dtype=np.intp)
    m6_pairs = np.empty((q3, q3, 6, 3), dtype=np.intp)

    for a, ijk in enumerate(triples):
        for b, rst in enumerate(triples):
            c = ijk + rst
            mu6[a, b] = _flat(p, c)
            for t, ((x, y), rest) in enumerate(sum15_pair):
                lam15_p2[a, b, t] = _flat(p, (c[x], c[y]))
                lam15_k4[a, b, t] = _flat(p, tuple(c[s] for s in rest))
            for t, (t1, t2) in enumerate(sum10_triple):
                lam10_t[a, b, t] = (
                    _flat(p, tuple(c[s] for s in t1)),
                    _flat(p, tuple(c[s] for s in t2)),
                )
            for t, match in enumerate(sum15_matching):
                lam15m[a, b, t] = [_flat(p, (c[x], c[y])) for x, y in match]
            for t, ((x, y), rest) in enumerate(sum9_pair):
                p9_p2[a, b, t] = _flat(p, (c[x], c[y]))
                p9_k4[a, b, t] = _flat(p, tuple(c[s] for s in rest))
            for t, (t1, t2) in enumerate(sum9_triple):
                t9_t[a, b, t] = (
                    _flat(p, tuple(c[s] for s in t1)),
                    _flat(p, tuple(c[s] for s in t2)),
                )
            for t, match in enumerate(sum6_matching):
                m6_pairs[a, b, t] = [_flat(p, (c[x], c[y])) for x, y in match]

    return _Program(
        p=p, k4_pairs=k4_pairs, l12=l12, l22_m4=l22_m4, l22_prod=l22_prod, s12=s12,
        mu6=mu6, lam15_p2=lam15_p2, lam15_k4=lam15_k4, lam10_t=lam10_t, lam15m=lam15m,
        p9_p2=p9_p2, p9_k4=p9_k4, t9_t=t9_t, m6_pairs=m6_pairs,
    )


def _batch_cancor_eigs(b11: np.ndarray, b12: np.ndarray, b22: np.ndarray) -> np.ndarray:
    """Squared canonical correlations per batch item, sorted descending."""
    for name, block in (("b11 (mean)", b11), ("b22 (moment)", b22)):
        cond = np.linalg.cond(block)
        if np.any(~np.isfinite(cond)) or np.any(cond > CONDITION_LIMIT):
            raise SingularBlockError(
                f"{name} block is numerically singular in {int(np.sum(cond > CONDITION_LIMIT))} "
                "batch item(s)"
            )
    middle = b12 @ np.linalg.solve(b22, np.swapaxes(b12, 1, 2))
    try:
        chol = np.linalg.cholesky(b11)
    except np.linalg.LinAlgError as exc:
        raise SingularBlockError(f"b11 (mean) block is not positive definite: {exc}") from exc
    half = np.linalg.solve(chol, middle)
    sym = np.linalg.solve(chol, np.swapaxes(half, 1, 2))
    sym = 0.5 * (sym + np.swapaxes(sym, 1, 2))
    eigs = np.linalg.eigvalsh(sym)[:, ::-1]
    if np.any(eigs < -EIGENVALUE_TOL) or np.any(eigs > 1.0 + EIGENVALUE_TOL):
        bad = eigs[(eigs < -EIGENVALUE_TOL) | (eigs > 1.0 + EIGENVALUE_TOL)]
        raise EigenvalueRangeError(
            f"squared canonical correlation {bad.flat[0]:.6g} outside [0, 1] beyond tolerance"
        )
    return np.clip(eigs, 0.0, 1.0)


def _functionals_from_eigs(eigs: np.ndarray) -> dict[str, np.ndarray]:
    if np.any(eigs >= 1.0 - 1e-12):
        raise FunctionalDomainError("a squared canonical correlation reached 1")
    return {
        "hl": eigs.sum(axis=1),
        "w": np.prod(1.0 - eigs, axis=1),
        "pb": np.sum(eigs / (1.0 - eigs), axis=1),
        "max": eigs[:, 0],
        "min": eigs[:, -1],
    }


def evaluate_batch(data: np.ndarray, statistics=ALL_STATISTICS) -> dict[StatisticId, np.ndarray]:
    """Evaluate statistics on a (B, n, p) stack of samples.

    Returns one (B,) array per requested statistic.  Results are independent
    of how replications are grouped into batches.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 3:
        raise ValueError("evaluate_batch expects a (batch, n, p) array")
    nb, n, p = data.shape
    statistics = tuple(statistics)
    need_z2 = any(s.family == "z2" for s in statistics)
    need_z3 = any(s.family == "z3" for s in statistics)
    need_mardia = any(s.family.startswith("mardia") for s in statistics)
    if need_z2 and n < second_order_threshold(p):
        raise SampleSizeError(
            f"z2 statistics need n >= {second_order_threshold(p)} for p={p}, got n={n}"
        )
    if need_z3 and n < third_order_threshold(p):
        raise SampleSizeError(
            f"z3 statistics need n >= {third_order_threshold(p)} for p={p}, got n={n}"
        )

    prog = _program(p)
    xc = data - data.mean(axis=1, keepdims=True)
    m2 = np.swapaxes(xc, 1, 2) @ xc / n
    cond = np.linalg.cond(m2)
    if np.any(~np.isfinite(cond)) or np.any(cond > CONDITION_LIMIT):
        raise DegenerateSampleError(
            f"rank-deficient sample covariance in {int(np.sum(~(cond <= CONDITION_LIMIT)))} "
            "batch item(s)"
        )
    try:
        chol = np.linalg.cholesky(m2)
    except np.linalg.LinAlgError as exc:
        raise DegenerateSampleError(f"rank-deficient sample in batch: {exc}") from exc
    y = np.swapaxes(np.linalg.solve(chol, np.swapaxes(xc, 1, 2)), 1, 2)

    out: dict[StatisticId, np.ndarray] = {}

    if need_mardia:
        r = np.sum(y * y, axis=2)
        if StatisticId("mardia_kurt") in statistics:
            out[StatisticId("mardia_kurt")] = ((n - 1) / n) ** 2 * np.mean(r * r, axis=1)

    t2 = (y[:, :, :, None] * y[:, :, None, :]).reshape(nb, n, p * p)
    m2f = t2.mean(axis=1)
    m3f = (np.swapaxes(t2, 1, 2) @ y).reshape(nb, p**3) / n

    if StatisticId("mardia_skew") in statistics:
        out[StatisticId("mardia_skew")] = ((n - 1) / n) ** 3 * np.sum(m3f * m3f, axis=1)

    if not (need_z2 or need_z3):
        return out

    m4f = (np.swapaxes(t2, 1, 2) @ t2).reshape(nb, p**4) / n
    kp = prog.k4_pairs
    k4f = m4f - (
        m2f[:, kp[:, 0, 0]] * m2f[:, kp[:, 0, 1]]
        + m2f[:, kp[:, 1, 0]] * m2f[:, kp[:, 1, 1]]
        + m2f[:, kp[:, 2, 0]] * m2f[:, kp[:, 2, 1]]
    )

    if need_z2:
        b11 = m2f.reshape(nb, p, p) / n
        b12 = m3f[:, prog.l12] / n
        lp = prog.l22_prod
        b22 = (m4f[:, prog.l22_m4] - m2f[:, lp[..., 0, 0]] * m2f[:, lp[..., 0, 1]]) / n + (
            m2f[:, lp[..., 1, 0]] * m2f[:, lp[..., 1, 1]]
            + m2f[:, lp[..., 2, 0]] * m2f[:, lp[..., 2, 1]]
        ) / (n * (n - 1))
        eigs = _batch_cancor_eigs(b11, b12, b22)
        vals = _functionals_from_eigs(eigs)
        for sid in statistics:
            if sid.family == "z2":
                out[sid] = vals[sid.functional]

    if need_z3:
        t4 = (t2[:, :, :, None] * t2[:, :, None, :]).reshape(nb, n, p**4)
        m6f = (np.swapaxes(t4, 1, 2) @ t2).reshape(nb, p**6) / n
        lam = (
            m6f[:, prog.mu6]
            - np.sum(m2f[:, prog.lam15_p2] * k4f[:, prog.lam15_k4], axis=-1)
            - np.sum(m3f[:, prog.lam10_t[..., 0]] * m3f[:, prog.lam10_t[..., 1]], axis=-1)
            - np.sum(np.prod(m2f[:, prog.lam15m], axis=-1), axis=-1)
        )
        pair9 = np.sum(m2f[:, prog.p9_p2] * k4f[:, prog.p9_k4], axis=-1)
        triple9 = np.sum(m3f[:, prog.t9_t[..., 0]] * m3f[:, prog.t9_t[..., 1]], axis=-1)
        match6 = np.sum(np.prod(m2f[:, prog.m6_pairs], axis=-1), axis=-1)
        b22 = lam / n + (pair9 + triple9) / (n - 1) + match6 * n / ((n - 1) * (n - 2))
        b11 = m2f.reshape(nb, p, p) / n
        b12 = k4f[:, prog.s12] / n
        eigs = _batch_cancor_eigs(b11, b12, b22)
        vals = _functionals_from_eigs(eigs)
        for sid in statistics:
            if sid.family == "z3":
                out[sid] = vals[sid.functional]

    return out
