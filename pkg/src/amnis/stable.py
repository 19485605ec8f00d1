"""Symmetric alpha-stable random variates via the Chambers-Mallows-Stuck transform.

Draws follow S(alpha, beta=0, scale=1, location=0) in the standard
parameterization, so alpha=2 gives a normal with variance 2 and alpha=1
gives a standard Cauchy.  The transform is exact and rejection-free:

    x = sin(alpha*u) / cos(u)^(1/alpha) * (cos((1-alpha)*u) / w)^((1-alpha)/alpha)

with u ~ Uniform(-pi/2, pi/2) and w ~ Exponential(1).
"""
from __future__ import annotations

import numpy as np

from .errors import ContractError


def sample_alpha_stable(alpha: float, rng: np.random.Generator, size=None):
    """Draw symmetric standard alpha-stable variates.

    Returns a float for ``size=None``, else an array of the given shape.
    """
    if not (0.0 < alpha <= 2.0):
        raise ContractError(f"alpha must lie in (0, 2], got {alpha}")
    shape = () if size is None else size
    u = np.pi * (rng.random(shape) - 0.5)
    w = -np.log(rng.random(shape))
    if alpha == 2.0:
        # the transform collapses to a Box-Muller style normal with variance 2
        x = 2.0 * np.sin(u) * np.sqrt(w)
    else:
        inv_alpha = 1.0 / alpha
        x = (np.sin(alpha * u) / np.cos(u) ** inv_alpha
             * (np.cos((1.0 - alpha) * u) / w) ** ((1.0 - alpha) * inv_alpha))
    if size is None:
        return float(x)
    return x
