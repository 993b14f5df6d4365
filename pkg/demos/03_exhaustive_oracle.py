"""Brute force over every history-dependent stopping rule at small N.

Decision maps on binary histories number 2^(2^N - 1); collapsing the
decisions hidden below an earlier STOP leaves the distinct rule classes
(677 at N=4), every one of which is valued exactly and compared to the
backward-induction optimum.
"""

from fractions import Fraction

from maxstop import WalkParams, cross_validate, enumerate_optimum, geometric_reward, solve, table_reward

for n, p, f, label in [
    (3, Fraction(1, 3), geometric_reward(Fraction(1, 2)), "geometric, p<1/2"),
    (3, Fraction(3, 4), geometric_reward(Fraction(1, 2)), "geometric, p>1/2"),
    (4, Fraction(1, 2), geometric_reward(Fraction(1, 2)), "geometric, p=1/2"),
    (2, Fraction(1, 3), table_reward([1, 1, 0]), "winner-take-two"),
]:
    w = WalkParams(p, n)
    res = enumerate_optimum(w, f)
    rep = solve(w, f)
    print(f"{label}: N={n}, p={p}")
    print(f"  raw decision maps : {res.n_rules_total}")
    print(f"  rule classes tried: every one ({res.n_paths} paths each)")
    print(f"  oracle optimum    : {res.value} (DP says {rep.optimal_value})")
    print(f"  optimal classes   : {res.n_optimal_classes}, DP label {rep.unique}")
    print(f"  cross-validated   : {cross_validate(w, f)}")
    print()
