"""Null-distribution calibration, empirical-p-value testing, power studies
and population values.

Affine invariance means the null distribution of every statistic depends
only on (n, p), so a single table of simulated values under the standard
normal serves all normal distributions of that shape.  Replications are
split into fixed-size chunks keyed by replication index, each replication
drawing from its own counter-derived random stream; results are therefore
bit-identical for any worker count.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import sqrt

import numpy as np

from .alternatives import (
    AlternativeSpec,
    RngStream,
    alternative,
    generate,
    population_moments,
)
from .cancor import cancor_sq, functional_value
from .covblocks import (
    lambda_blocks,
    psi_blocks,
    second_order_threshold,
    third_order_threshold,
)
from .engine import evaluate_batch
from .errors import SampleSizeError
from .moments import as_sample
from .stats import StatisticId, TestResult, compute_statistic

MIN_REPLICATIONS = 1000
CHUNK = 256  # replications per work unit; fixed so grouping never affects results

# Stream contexts keep calibration draws independent of power-study draws
# under the same root seed.
CALIBRATION_CONTEXT = 0
POWER_CONTEXT = 1


class TableMismatchError(ValueError):
    """A null table does not match the statistic or sample shape it is used for."""


class MissingTableError(ValueError):
    """No null table is available for a requested (statistic, n, p)."""


@dataclass(frozen=True)
class NullTable:
    """Empirical null distribution of one statistic at a given (n, p)."""

    statistic: StatisticId
    n: int
    p: int
    replications: int
    seed: int
    stream: tuple[int, ...]
    values: np.ndarray
    created_at: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.replications,):
            raise ValueError("null table length disagrees with replication count")
        if np.any(v[:-1] > v[1:]):
            raise ValueError("null table values must be sorted ascending")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class PowerCell:
    statistic: StatisticId
    power: float
    se: float
    replications: int


@dataclass(frozen=True)
class PowerReport:
    alternative: str
    n: int
    p: int
    alpha: float
    cells: tuple[PowerCell, ...]

    def cell(self, statistic: StatisticId) -> PowerCell:
        for c in self.cells:
            if c.statistic == statistic:
                return c
        raise KeyError(f"no cell for {statistic}")


def required_sample_size(statistic: StatisticId, p: int) -> int:
    if statistic.family == "z2":
        return second_order_threshold(p)
    if statistic.family == "z3":
        return third_order_threshold(p)
    return p + 1  # classical statistics only need a nonsingular covariance


def timestamp() -> str:
    """ISO timestamp; honors SOURCE_DATE_EPOCH for reproducible outputs."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch else time.time()
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


def _chunk_values(args):
    name, p, n, seed, path, context, start, count, stat_names = args
    spec = alternative(name, p)
    rng = RngStream(seed, path)
    stats = tuple(StatisticId.parse(s) for s in stat_names)
    samples = np.stack(
        [generate(spec, n, rng.child(context, start + i)) for i in range(count)]
    )
    values = evaluate_batch(samples, stats)
    return start, {sid.name: values[sid] for sid in stats}


def _simulate(name, p, n, rng, context, reps, statistics, workers):
    """Statistic values over ``reps`` replications, chunked deterministically."""
    stat_names = tuple(s.name for s in statistics)
    starts = list(range(0, reps, CHUNK))
    jobs = [
        (name, p, n, rng.seed, rng.path, context, s, min(CHUNK, reps - s), stat_names)
        for s in starts
    ]
    results: dict[int, dict[str, np.ndarray]] = {}
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for start, vals in pool.map(_chunk_values, jobs):
                results[start] = vals
    else:
        for job in jobs:
            start, vals = _chunk_values(job)
            results[start] = vals
    return {
        sid: np.concatenate([results[s][sid.name] for s in starts])
        for sid in statistics
    }


def calibrate(
    statistics,
    n: int,
    p: int,
    replications: int,
    rng: RngStream,
    workers: int = 1,
) -> dict[StatisticId, NullTable]:
    """Simulate the null distribution of each statistic under normality.

    All statistics are evaluated on the same simulated samples, one
    evaluation per replication, and the sorted values are returned as one
    table per statistic.
    """
    statistics = tuple(statistics)
    if replications < MIN_REPLICATIONS:
        raise ValueError(f"replications must be >= {MIN_REPLICATIONS}, got {replications}")
    for sid in statistics:
        need = required_sample_size(sid, p)
        if n < need:
            raise SampleSizeError(f"{sid.name} needs n >= {need} for p={p}, got n={n}")
    created = timestamp()
    values = _simulate("normal", p, n, rng, CALIBRATION_CONTEXT, replications, statistics, workers)
    return {
        sid: NullTable(
            statistic=sid,
            n=n,
            p=p,
            replications=replications,
            seed=rng.seed,
            stream=rng.path,
            values=np.sort(values[sid]),
            created_at=created,
        )
        for sid in statistics
    }


def empirical_pvalues(observed, table: NullTable) -> np.ndarray:
    """Monte Carlo p-values with the +1 correction, per the statistic's tail."""
    observed = np.atleast_1d(np.asarray(observed, dtype=float))
    v = table.values
    r = table.replications
    count_ge = r - np.searchsorted(v, observed, side="left")
    count_le = np.searchsorted(v, observed, side="right")
    upper = (count_ge + 1.0) / (r + 1.0)
    lower = (count_le + 1.0) / (r + 1.0)
    tail = table.statistic.tail
    if tail == "upper":
        return upper
    if tail == "lower":
        return lower
    return np.minimum(1.0, 2.0 * np.minimum(upper, lower))


def run_test(x, statistic: StatisticId, table: NullTable, alpha: float = 0.05) -> TestResult:
    """Test one dataset against a calibrated null table."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    if table.statistic != statistic:
        raise TableMismatchError(
            f"table holds {table.statistic.name}, not {statistic.name}"
        )
    s = as_sample(x)
    if (s.n, s.p) != (table.n, table.p):
        raise TableMismatchError(
            f"table was calibrated for (n={table.n}, p={table.p}) but the data "
            f"is (n={s.n}, p={s.p}); tables are not interpolated"
        )
    value = compute_statistic(s, statistic)
    p_value = float(empirical_pvalues(value, table)[0])
    return TestResult(
        statistic=statistic, value=value, p_value=p_value, alpha=alpha,
        reject=bool(p_value <= alpha),
    )


def power(
    alt: AlternativeSpec,
    statistics,
    n: int,
    p: int,
    alpha: float,
    reps: int,
    tables: dict[StatisticId, NullTable],
    rng: RngStream,
    workers: int = 1,
) -> PowerReport:
    """Rejection rates of the tests against one alternative.

    All statistics are evaluated on shared samples, so the power estimates
    are positively correlated across statistics, matching the common-sample
    protocol of the study this harness reproduces at desk scale.
    """
    statistics = tuple(statistics)
    if alt.p != p:
        raise ValueError(f"alternative has p={alt.p}, requested p={p}")
    for sid in statistics:
        if sid not in tables:
            raise MissingTableError(f"no null table for {sid.name} at (n={n}, p={p})")
        t = tables[sid]
        if (t.n, t.p) != (n, p) or t.statistic != sid:
            raise TableMismatchError(
                f"table for {sid.name} was calibrated for (n={t.n}, p={t.p}), need (n={n}, p={p})"
            )
    values = _simulate(alt.name, p, n, rng, POWER_CONTEXT, reps, statistics, workers)
    cells = []
    for sid in statistics:
        pvals = empirical_pvalues(values[sid], tables[sid])
        est = float(np.mean(pvals <= alpha))
        cells.append(
            PowerCell(
                statistic=sid,
                power=est,
                se=sqrt(est * (1.0 - est) / reps),
                replications=reps,
            )
        )
    return PowerReport(alternative=alt.name, n=n, p=p, alpha=alpha, cells=tuple(cells))


def population_value(alt: AlternativeSpec, statistic: StatisticId) -> float:
    """Large-n limit of a statistic under one alternative.

    For the canonical-correlation families this evaluates the population
    covariance blocks in their n -> infinity form (the common 1/n scale
    cancels in the eigenproblem and the O(1/n) corrections vanish); for the
    classical statistics it contracts the population moment tensors with the
    inverse covariance.
    """
    if statistic.family == "z2":
        blocks = lambda_blocks(population_moments(alt, 4), None)
        return functional_value(cancor_sq(blocks), statistic.functional)
    if statistic.family == "z3":
        blocks = psi_blocks(population_moments(alt, 6), None)
        return functional_value(cancor_sq(blocks), statistic.functional)
    m = population_moments(alt, 4)
    p = alt.p
    sigma = np.array([[m.mu(i, j) for j in range(p)] for i in range(p)])
    w = np.linalg.inv(sigma)
    if statistic.family == "mardia_skew":
        m3 = np.empty((p, p, p))
        for i in range(p):
            for j in range(p):
                for k in range(p):
                    m3[i, j, k] = m.mu(i, j, k)
        return float(np.einsum("ijk,ir,js,kt,rst->", m3, w, w, w, m3))
    if statistic.family == "mardia_kurt":
        m4 = np.empty((p, p, p, p))
        for i in range(p):
            for j in range(p):
                for k in range(p):
                    for l in range(p):
                        m4[i, j, k, l] = m.mu(i, j, k, l)
        return float(np.einsum("ijkl,ij,kl->", m4, w, w))
    raise ValueError(f"unknown statistic family {statistic.family!r}")
