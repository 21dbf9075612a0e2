"""Squared canonical correlations of partitioned covariance blocks and the
five scalar summaries used as test statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .covblocks import CovBlocks
from .errors import EigenvalueRangeError, FunctionalDomainError, SingularBlockError

CONDITION_LIMIT = 1e12
EIGENVALUE_TOL = 1e-8
UNIT_ROOT_TOL = 1e-12

FUNCTIONAL_NAMES = ("hl", "w", "pb", "max", "min")


@dataclass(frozen=True)
class CanCorSq:
    """Squared canonical correlations, sorted descending.

    ``clamped_count`` records how many raw eigenvalues were nudged back into
    [0, 1]; violations beyond a tolerance of 1e-8 are an error instead.
    """

    values: np.ndarray
    clamped_count: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if np.any(v[:-1] < v[1:]):
            raise ValueError("squared canonical correlations must be sorted descending")
        if v[0] > 1.0 or v[-1] < 0.0:
            raise ValueError("squared canonical correlations must lie in [0, 1]")
        object.__setattr__(self, "values", v)


def _check_condition(block: np.ndarray, name: str) -> None:
    cond = np.linalg.cond(block)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularBlockError(
            f"{name} block is numerically singular (condition number {cond:.3g})"
        )


def eigenvalues_from_raw(raw: np.ndarray) -> CanCorSq:
    """Sort descending, validate the [0, 1] range and clamp roundoff noise."""
    raw = np.sort(np.asarray(raw, dtype=float))[::-1]
    if np.any(raw < -EIGENVALUE_TOL) or np.any(raw > 1.0 + EIGENVALUE_TOL):
        bad = raw[(raw < -EIGENVALUE_TOL) | (raw > 1.0 + EIGENVALUE_TOL)]
        raise EigenvalueRangeError(
            f"squared canonical correlation {bad[0]:.6g} outside [0, 1] beyond "
            f"tolerance {EIGENVALUE_TOL:g}; the covariance blocks are inconsistent"
        )
    clamped = int(np.sum((raw < 0.0) | (raw > 1.0)))
    return CanCorSq(values=np.clip(raw, 0.0, 1.0), clamped_count=clamped)


def cancor_sq(blocks: CovBlocks) -> CanCorSq:
    """Squared canonical correlations from covariance blocks.

    The p x p eigenproblem b11^-1 b12 b22^-1 b21 is solved without forming
    inverses: the middle product is built from a linear solve and then
    whitened with the Cholesky factor of b11, giving a symmetric matrix whose
    eigenvalues are real by construction.
    """
    _check_condition(blocks.b11, "b11 (mean)")
    _check_condition(blocks.b22, "b22 (moment)")
    middle = blocks.b12 @ np.linalg.solve(blocks.b22, blocks.b12.T)
    try:
        chol = np.linalg.cholesky(blocks.b11)
    except np.linalg.LinAlgError as exc:
        raise SingularBlockError(f"b11 (mean) block is not positive definite: {exc}") from exc
    half = solve_triangular(chol, middle, lower=True)
    sym = solve_triangular(chol, half.T, lower=True)
    sym = 0.5 * (sym + sym.T)
    return eigenvalues_from_raw(np.linalg.eigvalsh(sym))


def functional_value(c: CanCorSq, name: str) -> float:
    """One scalar summary of the squared canonical correlations."""
    lam = c.values
    if name == "hl":
        return float(np.sum(lam))
    if name == "w":
        return float(np.prod(1.0 - lam))
    if name == "pb":
        if np.any(lam >= 1.0 - UNIT_ROOT_TOL):
            raise FunctionalDomainError(
                "ratio trace undefined: a squared canonical correlation is at 1"
            )
        return float(np.sum(lam / (1.0 - lam)))
    if name == "max":
        return float(lam[0])
    if name == "min":
        return float(lam[-1])
    raise ValueError(f"unknown functional {name!r}")


def functionals(c: CanCorSq) -> dict[str, float]:
    """All five summaries: trace, product, ratio trace, largest and smallest."""
    return {name: functional_value(c, name) for name in FUNCTIONAL_NAMES}
