"""Value-transparent Chebyshev acceleration for Mittag-Leffler kernels.

Solvers evaluate ``E(a, b; c * xi)`` thousands of times along a fixed ray
``xi in [0, xi_max]`` with ``c <= 0`` (relaxation kernels in the variable
``xi = (t^p - s^p)^alpha`` or ``xi = (t - s)^delta``).  As a function of xi
this is entire, so a Chebyshev interpolant reproduces it to near machine
precision with a modest degree.  The fit is adaptive (degree doubling with
a coefficient-tail test) and is verified against direct evaluation at
random probe points before use; on any failure the ray falls back to
direct evaluation, so results never depend on the cache being good.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .special import DEFAULT_POLICY, EvalPolicy, _ml

__all__ = ["MLRay", "ml_ray"]

_MAX_DEGREE = 2048
_PROBE_COUNT = 7
_FIT_TOL = 2e-13


@dataclass(frozen=True)
class MLRay:
    """Callable E(a, b; c*xi) for xi in [0, xi_max]; polynomial when verified."""

    alpha: float
    beta: float
    c: float
    xi_max: float
    _coeffs: np.ndarray | None
    _policy: EvalPolicy

    def __call__(self, xi):
        scalar = np.isscalar(xi)
        x = np.atleast_1d(np.asarray(xi, dtype=float))
        if self._coeffs is not None:
            xn = 2.0 * np.clip(x, 0.0, self.xi_max) / self.xi_max - 1.0
            out = np.polynomial.chebyshev.chebval(xn, self._coeffs)
        else:
            out = np.array([_ml(self.alpha, self.beta, self.c * v, self._policy)
                            for v in x])
        return float(out[0]) if scalar else out


def _fit(alpha: float, beta: float, c: float, xi_max: float,
         policy: EvalPolicy) -> np.ndarray | None:
    def f(xs: np.ndarray) -> np.ndarray:
        return np.array([_ml(alpha, beta, c * v, policy) for v in xs])

    deg = 32
    rng = np.random.default_rng(12345)
    while deg <= _MAX_DEGREE:
        # Chebyshev points of the second kind on [0, xi_max]
        k = np.arange(deg + 1)
        xn = np.cos(np.pi * k / deg)
        xs = 0.5 * xi_max * (xn + 1.0)
        ys = f(xs)
        coeffs = np.polynomial.chebyshev.chebfit(xn, ys, deg)
        scale = max(np.max(np.abs(ys)), 1e-300)
        tail = np.max(np.abs(coeffs[-max(4, deg // 8):]))
        if tail <= 0.5 * _FIT_TOL * scale:
            probes = rng.uniform(0.0, xi_max, _PROBE_COUNT)
            approx = np.polynomial.chebyshev.chebval(2.0 * probes / xi_max - 1.0, coeffs)
            exact = f(probes)
            if np.max(np.abs(approx - exact)) <= 20.0 * _FIT_TOL * scale:
                return coeffs
            return None
        deg *= 2
    return None


@lru_cache(maxsize=4096)
def _ray_cached(alpha: float, beta: float, c: float, xi_max: float,
                tol: float, sr: float, ar: float, mt: int) -> MLRay:
    policy = EvalPolicy(target_tol=tol, series_radius=sr, asymptotic_radius=ar,
                        max_terms=mt)
    coeffs = None
    if xi_max > 0.0 and c <= 0.0 and math.isfinite(c * xi_max):
        coeffs = _fit(alpha, beta, c, xi_max, policy)
    return MLRay(alpha=alpha, beta=beta, c=c, xi_max=xi_max,
                 _coeffs=coeffs, _policy=policy)


def ml_ray(alpha: float, beta: float, c: float, xi_max: float,
           policy: EvalPolicy = DEFAULT_POLICY) -> MLRay:
    """A fast evaluator for xi -> E(alpha, beta; c*xi) on [0, xi_max]."""
    return _ray_cached(float(alpha), float(beta), float(c), float(xi_max),
                       policy.target_tol, policy.series_radius,
                       policy.asymptotic_radius, policy.max_terms)
