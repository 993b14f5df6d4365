"""Backward-induction solver for the optimal stopping of the drawdown chain.

The objective E[f(M_N - S_tau)] over stopping times tau <= N reduces to a
Markov problem on the drawdown Z_k = M_k - S_k: stopping in state (k, z)
pays G(N-k, z) = E[f(z v M_{N-k})], continuing moves Z down 1 with
probability p (staying at 0 from 0) and up 1 with probability q.  The
solver runs the exact Bellman recursion for ANY reward f, convex or not,
records per-state ties exactly, and classifies uniqueness of the optimal
rule from the tie pattern.

Uniqueness labels:

``UNIQUE_TAU0``   stopping at time 0 beats every continuation strictly
``UNIQUE_TAUN``   continuing strictly beats stopping in every state k < N
``TIE_CLASS``     exactly the states with z = 0 tie; the optimal rules are
                  precisely those stopping at the running max or at N
``NOT_UNIQUE``    several optimal rules outside that pattern
``UNKNOWN``       float mode, or a strict non-bang-bang optimum
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .walkdist import WalkParams, joint_pmf, max_marginals

STOP = "STOP"
CONTINUE = "CONTINUE"
TIE = "TIE"

UNIQUE_TAU0 = "UNIQUE_TAU0"
UNIQUE_TAUN = "UNIQUE_TAUN"
TIE_CLASS = "TIE_CLASS"
NOT_UNIQUE = "NOT_UNIQUE"
UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class ZChain:
    """Transition kernel of the drawdown chain: an up-step of the walk moves
    Z down one (staying at 0 from 0), a down-step moves Z up one.  Rows sum
    to 1 exactly and {0..N} suffices as state space for horizon N."""

    p: Fraction | float

    def step(self, z: int) -> tuple:
        """((z_down, prob), (z_up, prob)) out of state z."""
        if z < 0:
            raise ValueError(f"drawdown state must be >= 0, got {z}")
        return ((max(z - 1, 0), self.p), (z + 1, 1 - self.p))


@dataclass(frozen=True)
class PolicyTable:
    """Stop/continue decision per reachable drawdown state (k, z), 0 <= z <= k.

    Decisions at k = N are forced to STOP.  TIE marks states where stopping
    and continuing have exactly equal value; for execution a TIE stops
    (ties break toward STOP).
    """

    n: int
    decisions: dict

    def __post_init__(self):
        for k in range(self.n + 1):
            for z in range(k + 1):
                d = self.decisions.get((k, z))
                if d not in (STOP, CONTINUE, TIE):
                    raise ValueError(f"policy missing or invalid decision at {(k, z)}: {d!r}")
                if k == self.n and d == CONTINUE:
                    raise ValueError(f"policy must stop at the horizon, state {(k, z)}")

    def stops(self, k: int, z: int) -> bool:
        return self.decisions[(k, z)] in (STOP, TIE)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["k", "z", "decision"])
        for (k, z), d in sorted(self.decisions.items()):
            w.writerow([k, z, d])
        return buf.getvalue()


def policy_tau0(n: int) -> PolicyTable:
    return PolicyTable(n, {(k, z): STOP for k in range(n + 1) for z in range(k + 1)})


def policy_tauN(n: int) -> PolicyTable:
    dec = {(k, z): CONTINUE for k in range(n) for z in range(k + 1)}
    dec.update({(n, z): STOP for z in range(n + 1)})
    return PolicyTable(n, dec)


def policy_stop_at_max(n: int, from_step: int = 0) -> PolicyTable:
    """Stop at the first step >= from_step with zero drawdown, else at N."""
    dec = {}
    for k in range(n + 1):
        for z in range(k + 1):
            stop = k == n or (z == 0 and k >= from_step)
            dec[(k, z)] = STOP if stop else CONTINUE
    return PolicyTable(n, dec)


@dataclass(frozen=True)
class SolveReport:
    optimal_value: Fraction | float
    policy: PolicyTable
    value_tau0: Fraction | float
    value_tauN: Fraction | float
    unique: str
    tie_states: tuple
    exact: bool
    stop_values: dict = field(repr=False, default_factory=dict)
    continue_values: dict = field(repr=False, default_factory=dict)

    def to_json(self) -> str:
        def enc(v):
            if isinstance(v, Fraction):
                return {"mode": "exact", "value": str(v)}
            return {"mode": "float", "value": v}

        return json.dumps(
            {
                "optimal_value": enc(self.optimal_value),
                "value_tau0": enc(self.value_tau0),
                "value_tauN": enc(self.value_tauN),
                "unique": self.unique,
                "tie_states": [list(s) for s in self.tie_states],
                "exact": self.exact,
                "policy": sorted(
                    [[k, z, d] for (k, z), d in self.policy.decisions.items()]
                ),
            },
            sort_keys=True,
        )


def _g_table(w: WalkParams, f, n: int):
    """G[j][i] = E[f(i v M_j)] for j = 0..n, i = 0..n, in O(n^2).

    Uses the prefix/suffix split over the M_j marginal: contributions with
    m <= i collapse to P(M_j <= i) * f(i).
    """
    margs = max_marginals(w.at_horizon(n))
    fi = [f(i) for i in range(n + 1)]
    table = []
    for j in range(n + 1):
        marg = margs[j]
        cdf = 0
        tail = sum(marg[m] * fi[m] for m in sorted(marg))
        row = []
        for i in range(n + 1):
            if i in marg:
                cdf += marg[i]
                tail -= marg[i] * fi[i]
            row.append(cdf * fi[i] + tail)
        table.append(row)
    return table


def solve(w: WalkParams, f) -> SolveReport:
    """Exact backward induction over (step, drawdown) states.

    Works for any f defined on {0..N}; convexity is not required, which is
    what lets the winner-take-two counterexample go through the same path.
    """
    n = w.n
    p, q = w.p, w.q
    try:
        fvals = [f(z) for z in range(n + 1)]
    except ValueError as e:
        raise ValueError(f"reward must be defined on 0..{n}: {e}") from e

    G = _g_table(w, f, n)
    exact = w.is_exact and all(isinstance(v, (Fraction, int)) for v in fvals)

    chain = ZChain(p)
    V = [None] * (n + 1)
    V[n] = list(fvals)
    decisions = {(n, z): STOP for z in range(n + 1)}
    stop_values, cont_values = {}, {}
    for k in range(n - 1, -1, -1):
        row = []
        for z in range(k + 1):
            stop = G[n - k][z]
            cont = sum(pr * V[k + 1][z2] for z2, pr in chain.step(z))
            stop_values[(k, z)] = stop
            cont_values[(k, z)] = cont
            if exact:
                if stop > cont:
                    decisions[(k, z)] = STOP
                elif cont > stop:
                    decisions[(k, z)] = CONTINUE
                else:
                    decisions[(k, z)] = TIE
            else:
                decisions[(k, z)] = STOP if stop >= cont else CONTINUE
            row.append(max(stop, cont))
        V[k] = row

    value_tau0 = G[n][0]
    zlaw = joint_pmf(w).drawdown_marginal()
    value_tauN = sum(pr * fvals[z] for z, pr in sorted(zlaw.items()))
    tie_states = tuple(sorted(s for s, d in decisions.items() if d == TIE))

    unique = _classify_uniqueness(n, decisions, exact)
    return SolveReport(
        optimal_value=V[0][0],
        policy=PolicyTable(n, decisions),
        value_tau0=value_tau0,
        value_tauN=value_tauN,
        unique=unique,
        tie_states=tie_states,
        exact=exact,
        stop_values=stop_values,
        continue_values=cont_values,
    )


def _classify_uniqueness(n: int, decisions: dict, exact: bool) -> str:
    if not exact:
        return UNKNOWN  # float ties are not trustworthy
    inner = {(k, z): d for (k, z), d in decisions.items() if k < n}
    ties = {s for s, d in inner.items() if d == TIE}

    # A strict stop at the root already certifies tau=0: every other rule
    # must run past time 0 (time 0 is deterministic) and is bounded by the
    # strictly smaller continuation value.
    if inner.get((0, 0)) == STOP:
        return UNIQUE_TAU0
    if inner and all(d == CONTINUE for d in inner.values()):
        return UNIQUE_TAUN
    zero_states = {(k, 0) for k in range(n)}
    if ties == zero_states and all(
        d == CONTINUE for s, d in inner.items() if s not in zero_states
    ):
        return TIE_CLASS
    if ties:
        return NOT_UNIQUE
    return UNKNOWN


def evaluate_policy(w: WalkParams, f, pol: PolicyTable):
    """Exact value of a Markov drawdown rule: push the chain law forward,
    absorb on STOP (and TIE) states collecting G(N-k, z), pay f(z) at N."""
    if pol.n != w.n:
        raise ValueError(f"policy horizon {pol.n} does not match walk horizon {w.n}")
    n = w.n
    G = _g_table(w, f, n)
    chain = ZChain(w.p)

    dist = {0: w.p**0}
    total = 0
    for k in range(n + 1):
        nxt = {}
        for z, pr in sorted(dist.items()):
            if k == n or pol.stops(k, z):
                total += pr * G[n - k][z]
            else:
                for z2, step_pr in chain.step(z):
                    nxt[z2] = nxt.get(z2, 0) + pr * step_pr
        dist = nxt
    return total


def uniqueness_report(w: WalkParams, f):
    """Uniqueness label plus exact tie states (UNKNOWN in float mode)."""
    rep = solve(w, f)
    return rep.unique, rep.tie_states
