"""Bang-bang optimality across the p-grid for a convex reward.

For nonincreasing convex f the optimal rule is degenerate: stop at once
when the walk drifts down (p <= 1/2), never stop early when it drifts up
(p >= 1/2).  At p = 1/2 any rule that stops at the running maximum or at
the horizon ties exactly.
"""

from fractions import Fraction

from maxstop import WalkParams, geometric_reward, solve

N = 12
f = geometric_reward(Fraction(1, 2))

print(f"geometric reward d=1/2, N={N}")
print(f"{'p':>6} {'E[f(M_N)] (tau=0)':>20} {'E[f(Z_N)] (tau=N)':>20} {'optimum':>12} {'label':>12}")
for k in range(1, 10):
    p = Fraction(k, 10)
    rep = solve(WalkParams(p, N), f)
    star0 = "*" if rep.optimal_value == rep.value_tau0 else " "
    starN = "*" if rep.optimal_value == rep.value_tauN else " "
    print(
        f"{str(p):>6} {float(rep.value_tau0):>19.6f}{star0} "
        f"{float(rep.value_tauN):>19.6f}{starN} {float(rep.optimal_value):>12.6f} "
        f"{rep.unique:>12}"
    )

rep = solve(WalkParams(Fraction(1, 2), N), f)
print()
print(f"p=1/2 exact ties at the zero-drawdown states: {rep.tie_states}")
