"""Ten population-level features observed by the meta-level controller.

The observation summarizes where the population sits in the box, how the
objective values are dispersed against the run-historical range, progress
of objective and violation relative to the initial generation, the feasible
fraction, the consumed budget, the previous relaxation level, and the
pairwise objective/violation coupling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cop import is_feasible
from .lshade import Individual

STATE_DIM = 10
# feature indices zeroed by the constraint-feature mask (0-based)
MASKED_FEATURES = (5, 6, 8, 9)

_S5_CLIP = 10.0


@dataclass
class RunHistory:
    """Run-level quantities the features need beyond the population itself."""

    f_gbest: float          # historical best objective this run
    f_max: float            # historical worst objective this run
    f_pbest_0: float        # population-best objective at generation 0
    nu_top5_0: float        # initial top-5 violation average
    prev_action: float      # last relaxation level, normalized to [0, 1]
    fes: int
    maxfes: int
    nu_top5_prev: float = 0.0
    nu_top5_now: float = 0.0


def top5_violation_mean(members: list[Individual]) -> float:
    """Mean of the min(5, N) smallest exact violations in the population."""
    if not members:
        raise ValueError("population must be non-empty")
    nus = np.sort(np.array([m.nu for m in members]))
    k = min(5, nus.size)
    return float(np.mean(nus[:k]))


def extract_state(members: list[Individual], lower: np.ndarray, upper: np.ndarray,
                  hist: RunHistory, delta_acc: float = 1e-3) -> np.ndarray:
    """Build the 10-feature observation for the current population.

    s1  pooled std of box-normalized coordinates
    s2  std of objective values normalized by the historical (best, worst) range
    s3  pooled mean of box-normalized coordinates
    s4  mean of the same normalized objective values
    s5  population-best objective over its generation-0 value (guarded, clipped)
    s6  top-5 violation mean over its generation-0 value
    s7  feasible fraction at accuracy delta_acc
    s8  consumed budget fraction
    s9  previous relaxation level
    s10 fraction of member pairs whose objective and violation move together
    """
    if not members:
        raise ValueError("population must be non-empty")
    xs = np.stack([m.x for m in members])
    fs = np.array([m.eval.f for m in members])
    nus = np.array([m.nu for m in members])
    n = len(members)

    coords = (xs - lower) / (upper - lower)
    s1 = float(np.std(coords))
    s3 = float(np.mean(coords))

    f_range = hist.f_max - hist.f_gbest
    if f_range > 0.0:
        norm_f = (fs - hist.f_gbest) / f_range
        s2 = float(np.std(norm_f))
        s4 = float(np.mean(norm_f))
    else:
        s2 = 0.0
        s4 = 0.0

    f_pbest = float(np.min(fs))
    if abs(hist.f_pbest_0) < 1e-12:
        s5 = 1.0
    else:
        s5 = float(np.clip(f_pbest / hist.f_pbest_0, -_S5_CLIP, _S5_CLIP))

    nu_top5 = top5_violation_mean(members)
    s6 = nu_top5 / hist.nu_top5_0 if hist.nu_top5_0 > 0.0 else 0.0

    s7 = sum(is_feasible(m.eval, delta_acc) for m in members) / n
    s8 = hist.fes / hist.maxfes
    s9 = hist.prev_action

    if n >= 2:
        df = fs[:, None] - fs[None, :]
        dnu = nus[:, None] - nus[None, :]
        iu = np.triu_indices(n, k=1)
        # pairs with equal violations (or equal objectives) contribute zero
        s10 = float(np.mean((df[iu] * dnu[iu]) > 0.0))
    else:
        s10 = 0.0

    state = np.array([s1, s2, s3, s4, s5, s6, s7, s8, s9, s10], dtype=float)
    if not np.all(np.isfinite(state)):
        raise ValueError(f"non-finite state features: {state}")
    return state


def mask_constraint_features(state: np.ndarray) -> np.ndarray:
    """Zero the constraint-aware features (s6, s7, s9, s10); idempotent."""
    masked = np.asarray(state, dtype=float).copy()
    masked[list(MASKED_FEATURES)] = 0.0
    return masked
