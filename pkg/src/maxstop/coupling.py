"""Families of walks driven by shared uniforms, and seeded Monte Carlo.

One stream of uniforms U_1..U_n drives a walk for every requested p via
X_k = +1 iff U_k <= p, so walks for larger p dominate pathwise and their
drawdowns are pathwise smaller.  That ordering is a hard invariant of the
construction, not a statistical one, and is asserted as such.

Reproducibility: streams come from numpy's PCG64 generator, one child
stream per replication spawned from the root SeedSequence, so runs are
bit-identical for a given seed regardless of batching.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dpsolver import PolicyTable
from .walkdist import WalkParams, joint_pmf

GENERATOR = "pcg64-v1"  # bump if the stream layout ever changes


def _rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


@dataclass(frozen=True)
class CoupledPaths:
    """One replication of the common-uniform construction."""

    seed: int
    replication: int
    n: int
    ps: tuple
    s: dict  # p -> int array of S_0..S_n
    m: dict  # p -> running max
    z: dict  # p -> drawdown

    def check_ordering(self) -> bool:
        """Pathwise: larger p gives pointwise larger walk and smaller drawdown."""
        ordered = sorted(self.ps)
        for lo, hi in zip(ordered, ordered[1:]):
            if not (self.s[hi] >= self.s[lo]).all():
                return False
            if not (self.z[hi] <= self.z[lo]).all():
                return False
        return True


def _walk_arrays(uniforms: np.ndarray, p) -> tuple:
    steps = np.where(uniforms <= float(p), 1, -1)
    s = np.concatenate(
        [np.zeros((*steps.shape[:-1], 1), dtype=np.int64), np.cumsum(steps, axis=-1)], axis=-1
    )
    m = np.maximum.accumulate(s, axis=-1)  # S_0 = 0 seeds the running max
    return s, m, m - s


def simulate(seed: int, n: int, ps, replications: int):
    """Yield CoupledPaths, one per replication, deterministically per seed."""
    if replications < 1:
        raise ValueError("need at least one replication")
    ps = tuple(ps)
    for r in range(replications):
        u = _rng(seed, r).random(n)
        s, m, z = {}, {}, {}
        for p in ps:
            s[p], m[p], z[p] = _walk_arrays(u, p)
        yield CoupledPaths(seed=seed, replication=r, n=n, ps=ps, s=s, m=m, z=z)


def paths_to_csv(paths) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["replication", "k", "p", "S", "M", "Z"])
    for cp in paths:
        for p in cp.ps:
            for k in range(cp.n + 1):
                w.writerow([cp.replication, k, str(p), cp.s[p][k], cp.m[p][k], cp.z[p][k]])
    return buf.getvalue()


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    stderr: float
    replications: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "mode": "mc",
                "value": self.estimate,
                "stderr": self.stderr,
                "replications": self.replications,
            },
            sort_keys=True,
        )


def _batched_uniform_walks(
    seed: int, n: int, replications: int, p, batch: int = 20000, stream_offset: int = 0
):
    """Vectorized batches of (S, M, Z) arrays with per-replication streams."""
    for start in range(0, replications, batch):
        count = min(batch, replications - start)
        u = np.stack([_rng(seed, stream_offset + start + r).random(n) for r in range(count)])
        yield _walk_arrays(u, p)


def mc_rule_value(seed: int, w: WalkParams, f, pol: PolicyTable, replications: int) -> McEstimate:
    """Unbiased Monte Carlo estimate of E[f(M_N - S_tau)] under a Markov rule."""
    n = w.n
    if pol.n != n:
        raise ValueError(f"policy horizon {pol.n} does not match walk horizon {w.n}")
    stop_mat = np.zeros((n + 1, n + 2), dtype=bool)
    for (k, z), _d in pol.decisions.items():
        stop_mat[k, z] = pol.stops(k, z)
    stop_mat[n, :] = True

    f_lut = np.array([float(f(i)) for i in range(n + 1)])
    chunks = []
    for s, m, z in _batched_uniform_walks(seed, n, replications, w.p):
        reps = s.shape[0]
        stopped = np.zeros(reps, dtype=bool)
        s_tau = np.zeros(reps, dtype=np.int64)
        for k in range(n + 1):
            now = ~stopped & stop_mat[k, z[:, k]]
            s_tau[now] = s[now, k]
            stopped |= now
        chunks.append(f_lut[m[:, -1] - s_tau])
    vals = np.concatenate(chunks)
    if vals.min() == vals.max():  # constant sample: mean is exact, spread is zero
        return McEstimate(estimate=float(vals[0]), stderr=0.0, replications=len(vals))
    return McEstimate(
        estimate=float(vals.mean()),
        stderr=float(vals.std() / math.sqrt(len(vals))),
        replications=len(vals),
    )


@dataclass(frozen=True)
class TimeReversalReport:
    """Empirical check that M_n under p matches Z_n under q in law."""

    tv_max: float
    tv_drawdown: float
    tolerance: float
    passed: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "tv_max": self.tv_max,
                "tv_drawdown": self.tv_drawdown,
                "tolerance": self.tolerance,
                "passed": self.passed,
            },
            sort_keys=True,
        )


def mc_time_reversal_check(
    seed: int, w: WalkParams, replications: int, tolerance: float | None = None
) -> TimeReversalReport:
    """Simulate M_n under p and Z_n under q on independent streams and compare
    each empirical law to its exact counterpart in total variation."""
    n = w.n
    if tolerance is None:
        # ~4x the typical TV fluctuation of an empirical law on n+1 atoms
        tolerance = 2.4 * math.sqrt((n + 1) / replications)

    exact_m = {k: float(v) for k, v in joint_pmf(w).max_marginal().items()}
    exact_z = {k: float(v) for k, v in joint_pmf(w.swapped()).drawdown_marginal().items()}

    counts_m = np.zeros(n + 1)
    counts_z = np.zeros(n + 1)
    for s, m, z in _batched_uniform_walks(seed, n, replications, w.p):
        counts_m += np.bincount(m[:, -1], minlength=n + 1)
    for s, m, z in _batched_uniform_walks(
        seed, n, replications, w.q, stream_offset=replications
    ):
        counts_z += np.bincount(z[:, -1], minlength=n + 1)

    tv_m = 0.5 * sum(
        abs(counts_m[k] / replications - exact_m.get(k, 0.0)) for k in range(n + 1)
    )
    tv_z = 0.5 * sum(
        abs(counts_z[k] / replications - exact_z.get(k, 0.0)) for k in range(n + 1)
    )
    return TimeReversalReport(
        tv_max=float(tv_m),
        tv_drawdown=float(tv_z),
        tolerance=float(tolerance),
        passed=bool(tv_m < tolerance and tv_z < tolerance),
    )
