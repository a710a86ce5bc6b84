"""Walkthrough: the benchmark registry and its problem families.

Every problem lives in [-100, 100]^D with a hidden shift; synthetic
families certify a feasible point at construction.  Names follow the
patterns `cec12`, `cec14`, `synthetic/<kind>/<seed>`.
"""
import numpy as np

from rlrelax import registry_lookup, violation
from rlrelax.problems import SYNTHETIC_KINDS

print("synthetic families:", ", ".join(SYNTHETIC_KINDS))
print()

for name in ("cec12", "cec14"):
    prob = registry_lookup(name, 10)
    e = prob.evaluate(prob.feasible_point)
    print(f"{name:8s} dim={prob.dim}  p={prob.n_ineq} q={prob.n_eq}  "
          f"f(feasible point)={e.f:10.4f}  violation={violation(e):.2e}")

print()
rng = np.random.default_rng(0)
for kind in SYNTHETIC_KINDS:
    prob = registry_lookup(f"synthetic/{kind}/0", 10)
    e_feas = prob.evaluate(prob.feasible_point)
    x = rng.uniform(prob.lower, prob.upper)
    e_rand = prob.evaluate(x)
    print(f"{prob.name:32s} p={prob.n_ineq} q={prob.n_eq}  "
          f"certified violation={violation(e_feas):8.1e}  "
          f"random-point violation={violation(e_rand):12.2f}")

# determinism: the same name always builds the same problem
a = registry_lookup("synthetic/rastrigin-ring/3", 10)
b = registry_lookup("synthetic/rastrigin-ring/3", 10)
x = np.linspace(-40, 40, 10)
print("\nsame name, same instance:", a.evaluate(x).f == b.evaluate(x).f)
