from __future__ import annotations

from typing import Callable, Optional, Tuple

import numpy as np

from scpo.types import ParamVector


def armijo_search(
    loss_eval: Callable[[ParamVector], float],
    theta: ParamVector,
    step: ParamVector,
    sigma: float = 0.1,
    shrink: float = 0.5,
    max_backtracks: int = 20,
    *,
    initial_loss: Optional[float] = None,
) -> Tuple[float, float]:
    """
    Backtracking on alpha in {1, shrink, shrink^2, ..., shrink^max_backtracks}.

    Accepts the first alpha with
        loss(theta + alpha*step) <= loss(theta) - sigma * alpha * |step|^2.
    Returns (alpha, loss at the accepted point); (0.0, loss(theta)) if no alpha passes.
    Every alpha in [0, 1] keeps a feasible projected step feasible, so accepted
    points need no further safety check against the surrogate constraints.
    """
    if not 0.0 < sigma < 1.0:
        raise ValueError(f"sigma must lie in (0, 1), got {sigma}")
    if not 0.0 < shrink < 1.0:
        raise ValueError(f"shrink must lie in (0, 1), got {shrink}")
    theta = np.asarray(theta, dtype=np.float64)
    step = np.asarray(step, dtype=np.float64)
    step_sq = float(step @ step)
    if step_sq == 0.0:
        raise ValueError("armijo_search(): step is zero")

    loss0 = float(loss_eval(theta)) if initial_loss is None else float(initial_loss)
    alpha = 1.0
    for _ in range(max_backtracks + 1):
        trial = float(loss_eval(theta + alpha * step))
        if trial <= loss0 - sigma * alpha * step_sq:
            return alpha, trial
        alpha *= shrink
    return 0.0, loss0
