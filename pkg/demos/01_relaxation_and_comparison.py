"""Walkthrough: violation accounting and the epsilon-comparison rule.

Shows how raw constraint values aggregate into a violation score, how a
relaxation vector zeroes small violations, and how two candidates are
ordered (violations first, objective on ties).
"""
import numpy as np

from rlrelax import Evaluation, eps_compare, is_feasible, relaxed_violation, sco, violation

# a candidate with one inequality (g <= 0 feasible) and one equality (h = 0)
e = Evaluation(f=2.5, g=np.array([0.4]), h=np.array([-0.05]))
print("objective        :", e.f)
print("raw constraints  : g =", e.g, " h =", e.h)
print("exact violation  :", violation(e))  # 0.4 + |−0.05| = 0.45

# relax both constraints at 0.1: the equality residual drops out
eps = np.array([0.1, 0.1])
print("relaxed at 0.1   :", relaxed_violation(e, eps))  # only g remains

# a generous relaxation hides everything
print("relaxed at 1.0   :", relaxed_violation(e, np.array([1.0, 1.0])))

# comparison: violations dominate, objective breaks ties
nearly_feasible = (99.0, 0.1)   # poor objective, small violation
good_but_violated = (0.0, 0.5)  # great objective, larger violation
winner = eps_compare(nearly_feasible, good_but_violated)
print("\n(f=99, nu=0.1) vs (f=0, nu=0.5) ->", "first wins" if winner == -1 else "second wins")

tied_violations = eps_compare((1.0, 0.0), (2.0, 0.0))
print("(f=1, nu=0) vs (f=2, nu=0)      ->", "first wins" if tied_violations == -1 else "second wins")

# the score used for reporting: objective plus violation, with the
# violation forgiven inside the feasibility accuracy of 1e-3
almost = Evaluation(f=4.0, g=np.array([9e-4]), h=np.zeros(0))
print("\nfeasible within accuracy:", is_feasible(almost), " score:", sco(almost))
truly_violated = Evaluation(f=4.0, g=np.array([2.0]), h=np.zeros(0))
print("violated:                ", is_feasible(truly_violated), "score:", sco(truly_violated))
