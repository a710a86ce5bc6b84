"""Constrained-problem core: violation accounting and the epsilon-comparison rule.

A candidate x for a problem with p inequality constraints g_i(x) <= 0 and
q equality constraints h_j(x) = 0 is scored by its aggregated violation

    nu(x) = sum_i max(g_i(x), 0) + sum_j |h_j(x)|

or, under a per-constraint relaxation vector eps >= 0, by the relaxed
variant that zeroes every per-constraint contribution at or below its
threshold.  Candidates are ordered lexicographically: smaller relaxed
violation first, smaller objective second.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class ProblemDefinitionError(ValueError):
    """A problem evaluator returned malformed output (wrong arity, NaN, inf)."""


class BudgetExhaustedError(RuntimeError):
    """An evaluation was requested beyond the allotted budget."""


@dataclass(frozen=True)
class Evaluation:
    """One evaluator call: objective value plus raw constraint values."""

    f: float
    g: np.ndarray  # inequality values, length p; feasible when <= 0
    h: np.ndarray  # equality residuals, length q; feasible when == 0

    def __post_init__(self):
        object.__setattr__(self, "g", np.atleast_1d(np.asarray(self.g, dtype=float)))
        object.__setattr__(self, "h", np.atleast_1d(np.asarray(self.h, dtype=float)))
        object.__setattr__(self, "f", float(self.f))


@dataclass(frozen=True)
class ConstrainedProblem:
    """A bound-constrained minimization problem with explicit g/h constraints.

    The evaluator must be deterministic and return exactly ``n_ineq``
    inequality values and ``n_eq`` equality values for every in-bounds x.
    Candidates outside the box are never passed to the evaluator; bound
    repair is the optimizer's job.
    """

    name: str
    dim: int
    lower: np.ndarray
    upper: np.ndarray
    n_ineq: int
    n_eq: int
    evaluator: Callable[[np.ndarray], Evaluation]
    feasible_point: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if self.dim <= 0:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if lower.shape != (self.dim,) or upper.shape != (self.dim,):
            raise ValueError("bounds must be vectors of length dim")
        if not np.all(lower < upper):
            raise ValueError("lower bounds must be strictly below upper bounds")
        if self.n_ineq < 0 or self.n_eq < 0:
            raise ValueError("constraint counts must be non-negative")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n_constraints(self) -> int:
        return self.n_ineq + self.n_eq

    def evaluate(self, x: np.ndarray, budget: "BudgetCounter | None" = None) -> Evaluation:
        """Evaluate one candidate, charging ``budget`` when given.

        Raises BudgetExhaustedError before calling the evaluator if the
        budget is spent, and ProblemDefinitionError if the evaluator
        returns the wrong arity or non-finite values.
        """
        if budget is not None:
            budget.spend()
        e = self.evaluator(np.asarray(x, dtype=float))
        if e.g.shape != (self.n_ineq,) or e.h.shape != (self.n_eq,):
            raise ProblemDefinitionError(
                f"{self.name}: evaluator returned {e.g.shape[0]} inequality / "
                f"{e.h.shape[0]} equality values, declared {self.n_ineq}/{self.n_eq}"
            )
        if not (np.isfinite(e.f) and np.all(np.isfinite(e.g)) and np.all(np.isfinite(e.h))):
            raise ProblemDefinitionError(f"{self.name}: non-finite evaluation at x={x!r}")
        return e


class BudgetCounter:
    """Hard cap on evaluator calls; every call costs exactly one unit."""

    def __init__(self, maxfes: int):
        if maxfes < 0:
            raise ValueError("maxfes must be non-negative")
        self.maxfes = int(maxfes)
        self.fes = 0

    @property
    def remaining(self) -> int:
        return self.maxfes - self.fes

    @property
    def exhausted(self) -> bool:
        return self.fes >= self.maxfes

    def spend(self) -> None:
        if self.exhausted:
            raise BudgetExhaustedError(f"budget of {self.maxfes} evaluations exhausted")
        self.fes += 1

    def __repr__(self):
        return f"BudgetCounter(fes={self.fes}, maxfes={self.maxfes})"


def epsilon_vector(values, m: int | None = None) -> np.ndarray:
    """Validate a per-constraint relaxation vector (non-negative, finite)."""
    eps = np.atleast_1d(np.asarray(values, dtype=float))
    if m is not None and eps.shape != (m,):
        raise ValueError(f"epsilon vector must have length {m}, got shape {eps.shape}")
    if not np.all(np.isfinite(eps)) or np.any(eps < 0):
        raise ValueError("epsilon entries must be finite and >= 0")
    return eps


def violation(e: Evaluation) -> float:
    """Exact aggregated violation: positive inequality excess plus |h|."""
    if not (np.all(np.isfinite(e.g)) and np.all(np.isfinite(e.h))):
        raise ProblemDefinitionError("non-finite constraint value")
    return float(np.sum(np.maximum(e.g, 0.0)) + np.sum(np.abs(e.h)))


def relaxed_violation(e: Evaluation, eps: np.ndarray) -> float:
    """Aggregated violation with per-constraint thresholds zeroed out.

    An inequality contributes g_i only when g_i > eps_i; an equality
    contributes |h_j| only when |h_j| > eps_{p+j}.  The first p entries of
    ``eps`` belong to the inequalities.  A value exactly at its threshold
    is zeroed.
    """
    p = e.g.shape[0]
    eps = epsilon_vector(eps, p + e.h.shape[0])
    g_part = np.where(e.g > eps[:p], e.g, 0.0)
    h_abs = np.abs(e.h)
    h_part = np.where(h_abs > eps[p:], h_abs, 0.0)
    return float(np.sum(g_part) + np.sum(h_part))


def eps_compare(a: tuple[float, float], b: tuple[float, float]) -> int:
    """Order two (objective, relaxed violation) pairs lexicographically.

    Violations compare first, objectives break ties.  Returns -1 when a is
    better, +1 when b is better, 0 on an exact tie.  Both pairs must carry
    violations computed under the same relaxation vector.
    """
    f_a, nu_a = a
    f_b, nu_b = b
    if nu_a != nu_b:
        return -1 if nu_a < nu_b else 1
    if f_a != f_b:
        return -1 if f_a < f_b else 1
    return 0


def is_feasible(e: Evaluation, delta_acc: float = 1e-3) -> bool:
    """Feasibility at accuracy level delta_acc: every g <= delta, |h| <= delta."""
    if delta_acc <= 0:
        raise ValueError("delta_acc must be positive")
    return bool(np.all(e.g <= delta_acc) and np.all(np.abs(e.h) <= delta_acc))


def sco(e: Evaluation, delta_acc: float = 1e-3) -> float:
    """Scoring metric: objective plus violation, with the violation zeroed
    for solutions feasible within delta_acc."""
    if is_feasible(e, delta_acc):
        return e.f
    return e.f + violation(e)
