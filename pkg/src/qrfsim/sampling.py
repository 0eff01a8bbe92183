"""Monte-Carlo draws from grid-sampled densities.

Sampling uses the inverse-CDF method on a piecewise-linear interpolant of the
cumulative trapezoid integral; generators are counter-based (Philox) so that
independent streams derived from one seed never collide.
"""

from __future__ import annotations

import numpy as np

from .errors import NonFiniteSample


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Deterministic generator for (seed, stream); distinct streams independent."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed) + (np.uint64(stream) << np.uint64(32))))


def inverse_cdf_sample(xs: np.ndarray, density: np.ndarray, n: int,
                       rng: np.random.Generator) -> np.ndarray:
    """Draw n samples from an unnormalised density tabulated on the grid xs."""
    xs = np.asarray(xs, dtype=float)
    d = np.asarray(density, dtype=float)
    if np.any(d < -1e-12) or not np.all(np.isfinite(d)):
        raise NonFiniteSample("density must be finite and nonnegative")
    d = np.clip(d, 0.0, None)
    # cumulative trapezoid, zero-anchored
    seg = 0.5 * (d[1:] + d[:-1]) * np.diff(xs)
    cdf = np.concatenate(([0.0], np.cumsum(seg)))
    total = cdf[-1]
    if total <= 0:
        raise NonFiniteSample("density integrates to zero")
    cdf /= total
    u = rng.random(n)
    return np.interp(u, cdf, xs)


def choice_from_weights(weights: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n indices with the given (unnormalised, nonnegative) weights."""
    w = np.asarray(weights, dtype=float)
    if np.any(w < -1e-12) or not np.all(np.isfinite(w)):
        raise NonFiniteSample("weights must be finite and nonnegative")
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if total <= 0:
        raise NonFiniteSample("weights sum to zero")
    return rng.choice(w.size, size=n, p=w / total)


def variance_standard_error(samples: np.ndarray) -> float:
    """Standard error of the sample variance (via the fourth central moment)."""
    x = np.asarray(samples, dtype=float)
    n = x.size
    m = x.mean()
    s2 = x.var(ddof=1)
    m4 = np.mean((x - m) ** 4)
    var_of_var = (m4 - s2 ** 2 * (n - 3) / (n - 1)) / n
    return float(np.sqrt(max(var_of_var, 0.0)))
