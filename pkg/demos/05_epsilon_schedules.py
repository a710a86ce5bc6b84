"""Walkthrough: how a discrete action becomes a relaxation vector.

The main scheme interpolates geometrically between a small floor (1e-3)
and the per-constraint mean violation of the initial population, so the
eleven levels are exponentially spaced.  Two linear variants used by the
ablations multiply the previous vector instead.
"""
import numpy as np

from rlrelax import ActionSpace, EpsilonBase, epsilon_from_action, epsilon_linear_step

base = EpsilonBase(values=np.array([1000.0, 2.0]), delta=1e-3)
print("relaxation base:", base.values, " floor:", base.delta)

space = ActionSpace.for_scheme("exponential")
print("\nlevel   eps[0]        eps[1]")
for i, level in enumerate(space.levels):
    eps = epsilon_from_action(level, base)
    print(f"{level:5.1f}  {eps[0]:12.6g}  {eps[1]:12.6g}")
print("level 0 lands exactly on the floor, level 1 exactly on the base")

print("\nconservative linear scheme (multiply by 1 - a each step):")
eps = base.values.copy()
for step, level in enumerate([0.25, 0.25, -0.25, 0.0, 0.25]):
    eps = epsilon_linear_step(eps, level, base)
    print(f"step {step + 1}: level {level:+.2f} -> eps {np.round(eps, 4)}")

print("\naggressive levels span 1e-3 .. 1e3:",
      ActionSpace.for_scheme("linear-aa").levels)

# the scheduled baseline tightens multiplicatively with the budget
print("\nscheduled baseline factor (1 - used/budget)^5:")
for used in (0.0, 0.25, 0.5, 0.75, 1.0):
    print(f"  budget used {used:4.0%}: factor {(1 - used) ** 5:8.5f}")
