"""Critical values of the extreme-eigenvalue tests, exact and simulated.

Run: python3 demos/limit_laws.py
"""
from axialunif import limlaw

for p in (2, 3):
    for test in ("t_plus", "t_pm"):
        exact = limlaw.crit_value(test, p, 0.05, "analytic")
        mc = limlaw.crit_value(test, p, 0.05, "mc", m=200_000, seed=3)
        print(f"p={p} {test:6s} analytic {exact:.4f}  simulated {mc:.4f}")

for p in (5, 10):
    print(f"p={p} t_plus simulated {limlaw.crit_value('t_plus', p, 0.05, 'mc', 200_000, 3):.4f}")

# local asymptotic powers at p=3
for tau in (1.0, 2.0, 3.0):
    print(f"tau={tau:g}: specified {limlaw.power_specified(3, tau):.3f}  "
          f"bingham {limlaw.power_bingham(3, tau):.3f}  "
          f"T+ {limlaw.power_eigen_mc('t_plus', 3, tau, m=100_000, seed=5):.3f}")
