"""The common-uniform coupling: one noise stream, a whole family of walks.

Each step uses the same uniform U_k for every p (step up iff U_k <= p),
so the walks are ordered pathwise and the drawdown of the better walk
never exceeds the drawdown of the worse one.  The ordering is structural,
holding on every single replication, and the coupled estimates line up
with the exact laws.
"""

from fractions import Fraction

from maxstop import WalkParams, mc_time_reversal_check, simulate

ps = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
n, reps = 60, 2000

violations = 0
final = {p: 0 for p in ps}
for cp in simulate(seed=20260808, n=n, ps=ps, replications=reps):
    if not cp.check_ordering():
        violations += 1
    for p in ps:
        final[p] += int(cp.s[p][-1])

print(f"coupled walks: n={n}, {reps} replications, ps={[str(p) for p in ps]}")
print(f"pathwise ordering violations: {violations} (hard invariant: must be 0)")
for p in ps:
    print(f"  p={p}: mean S_n = {final[p]/reps:+.2f}  (drift predicts {float((2*p-1)*n):+.2f})")

print()
print("time reversal: M_n under p vs drawdown Z_n under q, empirically")
rep = mc_time_reversal_check(seed=7, w=WalkParams(Fraction(2, 3), 6), replications=100_000)
print(f"  TV(M-law)={rep.tv_max:.4f}  TV(Z-law)={rep.tv_drawdown:.4f}  "
      f"tolerance={rep.tolerance:.4f}  passed={rep.passed}")
