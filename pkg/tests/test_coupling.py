import math
from fractions import Fraction

import numpy as np
import pytest

from maxstop import coupling, dpsolver, rewards
from maxstop.coupling import mc_rule_value, mc_time_reversal_check, paths_to_csv, simulate
from maxstop.walkdist import WalkParams

GEOM_HALF = rewards.geometric_reward(Fraction(1, 2))


class TestSimulate:
    def test_zero_steps(self):
        (cp,) = simulate(seed=1, n=0, ps=(Fraction(1, 2),), replications=1)
        p = Fraction(1, 2)
        assert cp.s[p].tolist() == [0]
        assert cp.m[p].tolist() == [0]
        assert cp.z[p].tolist() == [0]

    def test_determinism_bit_for_bit(self):
        a = list(simulate(seed=42, n=30, ps=(Fraction(1, 4), Fraction(3, 4)), replications=5))
        b = list(simulate(seed=42, n=30, ps=(Fraction(1, 4), Fraction(3, 4)), replications=5))
        for ca, cb in zip(a, b):
            for p in ca.ps:
                assert (ca.s[p] == cb.s[p]).all()
        c = list(simulate(seed=43, n=30, ps=(Fraction(1, 4),), replications=5))
        assert any(
            (ca.s[Fraction(1, 4)] != cc.s[Fraction(1, 4)]).any() for ca, cc in zip(a, c)
        )

    def test_pathwise_ordering_every_replication(self):
        ps = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
        for cp in simulate(seed=7, n=50, ps=ps, replications=200):
            assert cp.check_ordering()
            # the drawdown ordering restated directly
            assert (cp.z[Fraction(3, 4)] <= cp.z[Fraction(1, 4)]).all()

    def test_law_of_large_numbers(self):
        p = Fraction(2, 3)
        n, reps = 100, 20_000
        total = 0
        for cp in simulate(seed=11, n=n, ps=(p,), replications=reps):
            total += int(cp.s[p][-1])
        mean_step = total / (n * reps)
        drift = float(2 * p - 1)
        se = math.sqrt(4 * float(p) * float(1 - p) / (n * reps))
        assert abs(mean_step - drift) < 4 * se

    def test_replications_validated(self):
        with pytest.raises(ValueError):
            list(simulate(seed=0, n=5, ps=(Fraction(1, 2),), replications=0))

    def test_csv_dump(self):
        cps = list(simulate(seed=3, n=2, ps=(Fraction(1, 2),), replications=2))
        text = paths_to_csv(cps)
        lines = text.splitlines()
        assert lines[0] == "replication,k,p,S,M,Z"
        assert len(lines) == 1 + 2 * 3


class TestMcRuleValue:
    def test_constant_reward_zero_stderr(self):
        f = rewards.table_reward([Fraction(5, 7)] * 3)
        est = mc_rule_value(1, WalkParams(Fraction(1, 2), 2), f, dpsolver.policy_tau0(2), 500)
        assert est.estimate == pytest.approx(5 / 7)
        assert est.stderr == 0.0

    def test_winner_take_two_tau0(self):
        f = rewards.table_reward([1, 1, 0])
        est = mc_rule_value(5, WalkParams(Fraction(1, 2), 2), f, dpsolver.policy_tau0(2), 100_000)
        assert abs(est.estimate - 0.75) < 4 * est.stderr

    def test_matches_exact_policy_value(self):
        w = WalkParams(Fraction(2, 5), 10)
        exact = dpsolver.evaluate_policy(w, GEOM_HALF, dpsolver.policy_tau0(10))
        est = mc_rule_value(9, w, GEOM_HALF, dpsolver.policy_tau0(10), 100_000)
        assert abs(est.estimate - float(exact)) < 4 * est.stderr

    def test_nontrivial_policy_matches(self):
        w = WalkParams(Fraction(1, 2), 8)
        pol = dpsolver.policy_stop_at_max(8, from_step=3)
        exact = dpsolver.evaluate_policy(w, GEOM_HALF, pol)
        est = mc_rule_value(13, w, GEOM_HALF, pol, 100_000)
        assert abs(est.estimate - float(exact)) < 4 * est.stderr

    def test_policy_horizon_mismatch(self):
        with pytest.raises(ValueError):
            mc_rule_value(0, WalkParams(Fraction(1, 2), 3), GEOM_HALF, dpsolver.policy_tau0(2), 10)


class TestTimeReversal:
    def test_zero_steps_distance_zero(self):
        rep = mc_time_reversal_check(1, WalkParams(Fraction(1, 2), 0), 100)
        assert rep.tv_max == 0.0 and rep.tv_drawdown == 0.0 and rep.passed

    def test_paper_instance(self):
        rep = mc_time_reversal_check(2, WalkParams(Fraction(2, 3), 6), 100_000)
        assert rep.tv_max < 0.02 and rep.tv_drawdown < 0.02
        assert rep.passed

    def test_json(self):
        rep = mc_time_reversal_check(2, WalkParams(Fraction(1, 2), 3), 1000)
        assert '"passed"' in rep.to_json()
