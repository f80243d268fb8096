"""Synthetic firm revenues from multiplicative (Gibrat) growth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._seeding import check_random_state
from .._validation import check_positive_int
from ..exceptions import DegenerateFactors

_MAX_REDRAWS = 100


@dataclass(frozen=True)
class GibratParams:
    """Growth model ``R_t = r0 * prod_k (1 + F_k)`` with normal factors.

    ``step_jitter`` is the coefficient of variation of a per-firm number of
    steps (gamma distributed around ``steps``); jitter 1 makes firm ages
    roughly exponential, which fattens the upper tail.
    """

    r0: float = 1.0
    steps: int = 10
    factor_mean: float = 0.0
    factor_sd: float = 0.1
    step_jitter: float | None = None

    def __post_init__(self):
        check_positive_int(self.steps, "steps")
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")
        if self.factor_sd < 0:
            raise ValueError("factor_sd must be nonnegative")
        if self.factor_mean <= -1 and self.factor_sd == 0:
            raise DegenerateFactors("a constant factor <= -1 drives revenue to zero or below")
        if self.step_jitter is not None and self.step_jitter <= 0:
            raise ValueError("step_jitter must be positive when given")


def _draw_factors(rng: np.random.Generator, params: GibratParams, shape) -> np.ndarray:
    F = rng.normal(params.factor_mean, params.factor_sd, size=shape)
    bad = F <= -1
    for _ in range(_MAX_REDRAWS):
        if not bad.any():
            return F
        F[bad] = rng.normal(params.factor_mean, params.factor_sd, size=int(bad.sum()))
        bad = F <= -1
    raise DegenerateFactors("growth factors keep falling at or below -1; check factor_mean/factor_sd")


def gibrat_generate(params: GibratParams, n: int, seed=None) -> np.ndarray:
    """Draw ``n`` firm revenues after multiplicative growth."""
    check_positive_int(n, "n")
    rng = check_random_state(seed)
    if params.step_jitter is None:
        steps = np.full(n, params.steps)
    else:
        shape = 1.0 / params.step_jitter ** 2
        steps = np.maximum(1, np.rint(rng.gamma(shape, params.steps / shape, size=n))).astype(np.int64)
    out = np.empty(n)
    # row blocks keep the factor matrix bounded when jittered ages get long
    block = max(1, 2_000_000 // int(steps.max()))
    for start in range(0, n, block):
        t = steps[start:start + block]
        F = _draw_factors(rng, params, (len(t), int(t.max())))
        logs = np.log1p(F)
        logs[np.arange(F.shape[1])[None, :] >= t[:, None]] = 0.0
        out[start:start + block] = logs.sum(axis=1)
    return params.r0 * np.exp(out)
