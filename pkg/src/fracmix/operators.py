"""Numerical fractional operators: the independent oracles of the package.

Implemented directly from the defining integral/derivative compositions,
these operators are what every closed-form solution in :mod:`fracmix.ivp`
and :mod:`fracmix.mixed` is verified against.  They are deliberately
*not* short-circuited through any of the closed forms they are used to
check.

Conventions
-----------
* Riemann-Liouville integral of order ``q > 0`` from terminal ``a``:
  ``I^q f(t) = (1/Gamma(q)) int_a^t (t-s)^(q-1) f(s) ds``; the derivative of
  order ``q`` is ``(d/dt)^n I^(n-q) f`` with ``n - 1 <= q < n``.
* Erdelyi-Kober integral with power ``b`` (written ``beta_pow`` in
  signatures), weight ``g`` (``gamma``) and order ``d`` (``delta``):
  ``I{g,d} f(t) = t^(-b(g+d))/Gamma(d) int_a^t (t^b - s^b)^(d-1) s^(b g)
  f(s) d(s^b)``; the derivative applies the first-order factor product
  ``prod_j (g + j + (t/b) d/dt)`` to ``I{g+d, n-d}``.
* The hyper-Bessel operator ``(t^h d/dt)^w`` for weight exponent ``h < 1``
  is ``p^w t^(-p w) D{-w, w}`` in Erdelyi-Kober terms with ``p = 1 - h``;
  its regularized counterpart acts on ``f - f(a)`` (equivalently subtracts
  the start-value power correction from the plain form).  Both routes are
  computed on every call and must agree; disagreement raises instead of
  returning either value.
* The two-order interpolated derivative of wave type composes
  ``I^(mu (2-gamma))  (d/dt)^2  I^((1-mu)(2-beta))`` from terminal 0.

All convolution kernels are integrated with the weighted Gauss-Jacobi
cascade from :mod:`fracmix.quadrature`; endpoint powers are never sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.special as sc

from .errors import AccuracyError, ConsistencyError, TruncationError, ValidationError
from .quadrature import DEFAULT_QUAD, QuadratureSpec, stencil_derivative, weighted_integral
from .sampling import SampledFunction

__all__ = [
    "HyperBesselOrder",
    "HilferOrder",
    "rl_integral",
    "rl_derivative",
    "ek_integral",
    "ek_derivative",
    "hyper_bessel_rl",
    "hyper_bessel_caputo",
    "bihilfer_derivative",
    "laplace_numeric",
    "caputo_l1_derivative",
    "solve_relaxation_l1",
]

_SLACK = 1e-12


@dataclass(frozen=True)
class HyperBesselOrder:
    """Order (alpha), weight exponent (theta) and start point (a), theta < 1."""

    alpha: float
    theta: float
    a: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValidationError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if not (math.isfinite(self.theta) and self.theta < 1.0):
            raise ValidationError(f"theta must be < 1, got {self.theta!r}")
        if not (math.isfinite(self.a) and self.a >= 0.0):
            raise ValidationError(f"start point must be >= 0, got {self.a!r}")

    @property
    def p(self) -> float:
        return 1.0 - self.theta


@dataclass(frozen=True)
class HilferOrder:
    """Order pair (gamma, beta) in (1, 2) and interpolation type mu in [0, 1]."""

    gamma: float
    beta: float
    mu: float

    def __post_init__(self):
        if not (1.0 < self.gamma < 2.0):
            raise ValidationError(f"gamma must lie in (1, 2), got {self.gamma!r}")
        if not (1.0 < self.beta < 2.0):
            raise ValidationError(f"beta must lie in (1, 2), got {self.beta!r}")
        if not (0.0 <= self.mu <= 1.0):
            raise ValidationError(f"mu must lie in [0, 1], got {self.mu!r}")

    @property
    def delta(self) -> float:
        """Effective order beta + mu*(gamma - beta), always inside (1, 2)."""
        return self.beta + self.mu * (self.gamma - self.beta)

    @property
    def inner_order(self) -> float:
        """Order of the inner integral, (1 - mu)(2 - beta)."""
        return (1.0 - self.mu) * (2.0 - self.beta)

    @property
    def outer_order(self) -> float:
        """Order of the outer integral, mu*(2 - gamma)."""
        return self.mu * (2.0 - self.gamma)


def _as_sampled(f) -> SampledFunction:
    if isinstance(f, SampledFunction):
        return f
    raise ValidationError(f"expected a SampledFunction, got {type(f).__name__}")


def _left_exponent(f: SampledFunction, a: float) -> float:
    lo, hi = f.domain
    return f.singular_exponent if abs(a - lo) <= _SLACK * (hi - lo) else 0.0


def _check_range(f: SampledFunction, a: float, t: float):
    lo, hi = f.domain
    slack = _SLACK * (hi - lo)
    if a < lo - slack or t > hi + slack:
        raise ValidationError(
            f"integration range [{a!r}, {t!r}] exceeds domain {f.domain!r}")
    if t < a:
        raise ValidationError(f"need t >= a, got t={t!r} < a={a!r}")


# ---------------------------------------------------------------------------
# Riemann-Liouville
# ---------------------------------------------------------------------------

def rl_integral(f: SampledFunction, a: float, alpha: float, t: float,
                quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """I^alpha from terminal a at time t; alpha > 0."""
    f = _as_sampled(f)
    if not (alpha > 0.0 and math.isfinite(alpha)):
        raise ValidationError(f"integral order must be > 0, got {alpha!r}")
    _check_range(f, a, t)
    if t == a:
        return 0.0
    sig = _left_exponent(f, a)
    if sig != 0.0:
        def g(s):
            return f(s) * (s - a) ** (-sig)
    else:
        g = f
    val = weighted_integral(g, a, t, left_exp=sig, right_exp=alpha - 1.0, quad=quad)
    return val * sc.rgamma(alpha)


def rl_derivative(f: SampledFunction, a: float, alpha: float, t: float,
                  quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """D^alpha = (d/dt)^n I^(n-alpha), n - 1 <= alpha < n, n in {1, 2}."""
    f = _as_sampled(f)
    if not (0.0 < alpha < 2.0):
        raise ValidationError(f"derivative order must lie in (0, 2), got {alpha!r}")
    _check_range(f, a, t)
    if t <= a:
        raise ValidationError("derivative needs t > a")
    lo, hi = f.domain
    n = 1 if alpha < 1.0 else 2
    if alpha == float(n):  # integer order: plain stencil derivative
        h = min(4e-3 * (hi - lo), 0.05 * (t - a))
        return stencil_derivative(lambda s: float(f(s)), t, n, h, lo=a, hi=hi)

    def F(s: float) -> float:
        return rl_integral(f, a, n - alpha, s, quad)

    h = min(4e-3 * (hi - lo), 0.05 * (t - a))
    return stencil_derivative(F, t, n, h, lo=a, hi=hi)


# ---------------------------------------------------------------------------
# Erdelyi-Kober
# ---------------------------------------------------------------------------

def ek_integral(f: SampledFunction, gamma: float, delta: float, beta_pow: float,
                a: float, t: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Weighted-power fractional integral in the variable s = tau^beta_pow."""
    f = _as_sampled(f)
    if not (delta > 0.0):
        raise ValidationError(f"order delta must be > 0, got {delta!r}")
    if not (beta_pow > 0.0):
        raise ValidationError(f"power beta_pow must be > 0, got {beta_pow!r}")
    _check_range(f, a, t)
    if t == a:
        return 0.0
    b = beta_pow
    A, S = a ** b, t ** b
    sig = _left_exponent(f, a)
    if a == 0.0:
        L = gamma + sig / b
        exp_res = gamma - L  # residual power of s after extracting the weight

        def g(s):
            return f(s ** (1.0 / b)) * s ** exp_res
    else:
        L = sig
        if sig != 0.0:
            def g(s):
                return f(s ** (1.0 / b)) * s ** gamma * (s - A) ** (-sig)
        else:
            def g(s):
                return f(s ** (1.0 / b)) * s ** gamma
    if L <= -1.0:
        raise ValidationError(
            f"effective endpoint exponent {L!r} is not integrable")
    val = weighted_integral(g, A, S, left_exp=L, right_exp=delta - 1.0, quad=quad)
    return float(t ** (-b * (gamma + delta)) * sc.rgamma(delta) * val)


def ek_derivative(f: SampledFunction, gamma: float, delta: float, beta_pow: float,
                  a: float, t: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """First-order factor product applied to the complementary integral.

    n is the integer with n - 1 < delta <= n, n in {1, 2}; the factors
    (gamma + j + (t/beta_pow) d/dt) are applied for j = n down to 1.  The
    factors commute, so the application order is a numerical choice only.
    """
    f = _as_sampled(f)
    if not (0.0 < delta <= 2.0):
        raise ValidationError(f"order delta must lie in (0, 2], got {delta!r}")
    _check_range(f, a, t)
    if t <= a:
        raise ValidationError("derivative needs t > a")
    n = 1 if delta <= 1.0 else 2
    lo, hi = f.domain

    if delta == float(n):
        inner: Callable[[float], float] = lambda s: float(f(s))
    else:
        def inner(s: float) -> float:
            return ek_integral(f, gamma + delta, n - delta, beta_pow, a, s, quad)

    level = inner
    for j in range(n, 0, -1):
        gj = gamma + j
        prev = level

        def level(s: float, _prev=prev, _gj=gj) -> float:
            h = min(4e-3 * (hi - a), 0.05 * (s - a))
            d = stencil_derivative(_prev, s, 1, h, lo=a, hi=hi)
            return _gj * _prev(s) + (s / beta_pow) * d

    return level(t)


# ---------------------------------------------------------------------------
# hyper-Bessel operator and its regularized counterpart
# ---------------------------------------------------------------------------

def hyper_bessel_rl(f: SampledFunction, order: HyperBesselOrder, t: float,
                    quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Plain (unregularized) fractional power of t^theta d/dt, theta < 1."""
    f = _as_sampled(f)
    al, p, a = order.alpha, order.p, order.a
    val = ek_derivative(f, -al, al, p, a, t, quad)
    return float(p ** al * t ** (-p * al) * val)


def hyper_bessel_caputo(f: SampledFunction, order: HyperBesselOrder, t: float,
                        quad: QuadratureSpec = DEFAULT_QUAD, check: bool = True,
                        check_tol: float | None = None) -> float:
    """Regularized operator; start-value form and corrected plain form must agree.

    Returns the value computed from the increment ``f - f(a)``.  With
    ``check`` enabled (the default) the corrected plain-operator route is
    also computed and a disagreement beyond ``check_tol`` (default
    ``10 * quad.tol`` scaled) raises :class:`ConsistencyError`.
    """
    f = _as_sampled(f)
    al, p, a = order.alpha, order.p, order.a
    shifted, f_a = f.shifted_by_start_value()
    if not math.isfinite(f_a):
        raise ValidationError("start value f(a) must be finite")
    val_increment = float(p ** al * t ** (-p * al)
                          * ek_derivative(shifted, -al, al, p, a, t, quad))
    if check:
        correction = f_a * (t ** p - a ** p) ** (-al) * p ** al * sc.rgamma(1.0 - al)
        val_corrected = hyper_bessel_rl(f, order, t, quad) - correction
        tol = check_tol if check_tol is not None else \
            10.0 * quad.tol * (1.0 + abs(val_increment) + abs(val_corrected) + abs(f_a))
        if abs(val_increment - val_corrected) > tol:
            raise ConsistencyError(
                "regularized hyper-Bessel routes disagree: "
                f"{val_increment!r} (increment form) vs {val_corrected!r} "
                f"(corrected plain form) at t={t!r}")
    return val_increment


# ---------------------------------------------------------------------------
# two-order interpolated derivative (wave region operator)
# ---------------------------------------------------------------------------

def _detect_exponent(F2: Callable[[float], float], t: float) -> float:
    """Estimate the power behaviour of F2 near 0 from three small samples."""
    s1, s2, s3 = 2e-3 * t, 4e-3 * t, 8e-3 * t
    v1, v2, v3 = F2(s1), F2(s2), F2(s3)
    if min(abs(v1), abs(v2), abs(v3)) < 1e-14 * (1.0 + abs(v3)):
        return 0.0
    e12 = math.log(abs(v2 / v1)) / math.log(2.0)
    e23 = math.log(abs(v3 / v2)) / math.log(2.0)
    if abs(e12 - e23) > 0.2:
        return 0.0
    e = 0.5 * (e12 + e23)
    if abs(e) < 0.02:
        return 0.0
    if e <= -0.98:
        raise ValidationError(
            f"inner second derivative behaves like s^{e:.3f} near 0; "
            "the outer integral does not converge")
    return float(np.clip(e, -0.95, 3.0))


def _inner_limits(F1: Callable[[float], float], hi: float, ladder: list[float],
                  tbase: float) -> tuple[float, float]:
    """Limits of F1 and F1' at 0+ by exponent-ladder extrapolation."""
    basis = []
    for e in ladder:
        if all(abs(e - o) > 1e-9 for o in basis):
            basis.append(e)
    basis = basis[:4]
    ts = tbase * np.array([1.0, 2.0, 4.0, 8.0])[: len(basis)]
    V = np.array([[tv ** e for e in basis] for tv in ts])
    scale = np.max(np.abs(V), axis=0)
    rhs = np.array([F1(float(tv)) for tv in ts])
    coef = np.linalg.solve(V / scale, rhs) / scale
    c0 = float(coef[0])
    c1 = float(coef[basis.index(1.0)]) if 1.0 in basis else 0.0
    return c0, c1


def bihilfer_derivative(f: SampledFunction, order: HilferOrder, t: float,
                        quad: QuadratureSpec = DEFAULT_QUAD,
                        inner_exponent: float | None = None,
                        method: str = "parts",
                        inner_limits: tuple[float, float] | None = None) -> float:
    """Inner integral of order (1-mu)(2-beta), two derivatives, outer integral
    of order mu(2-gamma), all from terminal 0.

    Two numerically different routes compute the same composition:

    * ``method="parts"`` (default): both derivatives are moved through the
      outer integral (integration by parts twice), giving
      ``(d/dt)^2 I^(q1+q2) f  -  [F1(0+) (q2-1) t^(q2-2) + F1'(0+) t^(q2-1)]
      / Gamma(q2)`` with ``F1 = I^(q1) f``.  The stencil then acts at
      interior points of a mildly behaved function, and the 0+ limits are
      extrapolated from accurately computable values of F1.  This is exact
      for every input whose composition classically exists (finite weighted
      initial data).
    * ``method="direct"``: literal composition; the second derivative is
      taken under the outer integral, whose nodes approach 0 where stencil
      noise on top of the inner quadrature limits the attainable accuracy.

    ``inner_exponent`` declares the power behaviour of the twice
    differentiated inner integral near 0 (``delta - 2`` for solution-type
    inputs); it selects the extrapolation ladder / outer weight.  When
    absent it is estimated numerically.

    ``inner_limits`` supplies the 0+ limits of ``I^(q1) f`` and its first
    derivative when the caller knows them (they are the weighted initial
    data of the underlying problem, and are verified independently).
    Tabulated inputs cannot carry fractional-power detail below the grid
    scale, so supplying the limits removes the one extrapolation the
    tables cannot support.
    """
    f = _as_sampled(f)
    lo, hi = f.domain
    if lo > _SLACK * (hi - lo):
        raise ValidationError(f"operator terminal is 0; domain starts at {lo!r}")
    if not (0.0 < t <= hi + _SLACK * (hi - lo)):
        raise ValidationError(f"need 0 < t <= {hi!r}, got {t!r}")
    q1 = order.inner_order
    q2 = order.outer_order

    if q1 == 0.0:
        F1: Callable[[float], float] = lambda s: float(f(s))
    else:
        def F1(s: float) -> float:
            return rl_integral(f, 0.0, q1, s, quad)

    def F2(s: float) -> float:
        # 7-point stencil: quadrature noise in F1 sits near 1e-11, so the
        # h^6 truncation lets h stay large enough to keep noise/h^2 small
        h = min(0.08 * s, 0.25 * max(hi - s, 2e-3 * hi) / 3.0, 0.012 * hi)
        h = max(h, 1e-9 * hi)
        return stencil_derivative(F1, s, 2, h, lo=0.2 * s, hi=hi, npts=7)

    if q2 == 0.0:
        return F2(t)

    if method == "parts":
        def H(s: float) -> float:
            return rl_integral(f, 0.0, q1 + q2, s, quad)

        h = min(0.012 * hi, 0.08 * t, 0.25 * max(hi - t, 2e-3 * hi) / 3.0)
        d2H = stencil_derivative(H, t, 2, h, lo=0.2 * t, hi=hi, npts=7)
        if inner_limits is not None:
            c0, c1 = float(inner_limits[0]), float(inner_limits[1])
        else:
            # exponent ladder of F1 near 0: {0, 1, d, d + q1} with d = e2 + 2
            d_eff = (inner_exponent + 2.0) if inner_exponent is not None else None
            if d_eff is None:
                ladder = [0.0, 1.0, 1.5, 1.5 + q1]  # generic fractional ladder
            else:
                ladder = [0.0, 1.0, d_eff, d_eff + q1]
            c0, c1 = _inner_limits(F1, hi, ladder, tbase=1e-4 * hi)
        corr = (c0 * (q2 - 1.0) * t ** (q2 - 2.0) + c1 * t ** (q2 - 1.0)) * sc.rgamma(q2)
        return float(d2H - corr)

    if method != "direct":
        raise ValidationError(f"unknown method {method!r}")
    e2 = inner_exponent if inner_exponent is not None else _detect_exponent(F2, t)
    if e2 <= -1.0:
        raise ValidationError(f"inner exponent {e2!r} is not integrable")

    if e2 != 0.0:
        def g(s):
            return np.array([F2(float(x)) * float(x) ** (-e2) for x in np.atleast_1d(s)])
    else:
        def g(s):
            return np.array([F2(float(x)) for x in np.atleast_1d(s)])

    val = weighted_integral(g, 0.0, t, left_exp=e2, right_exp=q2 - 1.0, quad=quad,
                            split_left=2, split_right=2)
    return float(sc.rgamma(q2) * val)


# ---------------------------------------------------------------------------
# truncated Laplace transform
# ---------------------------------------------------------------------------

def laplace_numeric(f: SampledFunction, s: float, tol: float = 1e-9,
                    quad: QuadratureSpec = DEFAULT_QUAD,
                    full_output: bool = False):
    """int_0^T exp(-s t) f(t) dt with an enforced truncation bound.

    Precondition: ``exp(-s T) * max|f| <= tol``; otherwise the call is
    rejected with the minimal admissible ``s``.  The left endpoint may be
    weakly singular (declared via the function's ``singular_exponent``).
    """
    f = _as_sampled(f)
    lo, T = f.domain
    if lo > _SLACK * T:
        raise ValidationError(f"transform needs domain starting at 0, got {f.domain!r}")
    if not (s > 0.0):
        raise ValidationError(f"need s > 0, got {s!r}")
    probe = np.linspace(lo + 1e-6 * (T - lo), T, 257)
    fmax = float(np.max(np.abs(f(probe))))
    tail = math.exp(-s * T) * fmax
    if tail > tol:
        s_min = math.log(max(fmax, 1e-300) / tol) / T
        raise TruncationError(
            f"truncation bound violated: exp(-sT)*max|f| = {tail:.3e} > tol = {tol:.3e}; "
            f"need s >= {s_min:.6g}", minimal_s=s_min)
    sig = f.singular_exponent
    c = min(1.0 / s, T / 8.0)
    breaks = [0.0, c]
    while breaks[-1] < T:
        breaks.append(min(2.0 * breaks[-1], T))
    total = 0.0
    for i in range(len(breaks) - 1):
        a, b = breaks[i], breaks[i + 1]
        if i == 0 and sig != 0.0:
            def g0(x):
                return f(x) * np.exp(-s * x) * x ** (-sig)
            total += weighted_integral(g0, a, b, left_exp=sig, quad=quad)
        else:
            def g1(x):
                return f(x) * np.exp(-s * x)
            total += weighted_integral(g1, a, b, quad=quad)
    if full_output:
        return float(total), float(tail / s if s > 0 else tail)
    return float(total)


# ---------------------------------------------------------------------------
# product-integration benchmarks (independent of the machinery above)
# ---------------------------------------------------------------------------

def _graded_grid(T: float, n: int, r: float) -> np.ndarray:
    return T * (np.arange(n + 1) / n) ** r


def caputo_l1_derivative(f, alpha: float, t: float, n: int = 2048,
                         grading: float = 2.0) -> float:
    """Classical piecewise-linear product integration of the Caputo derivative.

    ``f`` may be any callable accepting ndarray input; accuracy is the
    scheme's O(h^(2-alpha)) on the graded mesh, not the package tolerance.
    This is a deliberately simple cross-check, kept free of the weighted
    Gauss machinery.
    """
    if not (0.0 < alpha < 1.0):
        raise ValidationError(f"L1 scheme implemented for order in (0, 1), got {alpha!r}")
    grid = _graded_grid(t, n, grading)
    fv = np.asarray(f(grid), dtype=float)
    du = np.diff(fv)
    h = np.diff(grid)
    w = ((t - grid[:-1]) ** (1.0 - alpha) - (t - grid[1:]) ** (1.0 - alpha))
    return float(np.sum(du / h * w) * sc.rgamma(2.0 - alpha))


def solve_relaxation_l1(alpha: float, lam: float, u0: float, forcing,
                        T: float, n: int = 2048, grading: float = 2.0):
    """March the relaxation equation D^alpha u + lam u = f, u(0) = u0, by L1.

    Returns (grid, values).  Implicit stepping: the newest increment's
    weight is moved to the left-hand side.
    """
    if not (0.0 < alpha < 1.0):
        raise ValidationError(f"L1 scheme implemented for order in (0, 1), got {alpha!r}")
    grid = _graded_grid(T, n, grading)
    fv = np.asarray(forcing(grid), dtype=float)
    u = np.empty(n + 1)
    u[0] = u0
    g2 = sc.rgamma(2.0 - alpha)
    h = np.diff(grid)
    for i in range(1, n + 1):
        ti = grid[i]
        w = ((ti - grid[:i]) ** (1.0 - alpha) - (ti - grid[1:i + 1]) ** (1.0 - alpha)) \
            / h[:i] * g2
        hist = float(np.dot(w[:-1], np.diff(u[:i]))) if i > 1 else 0.0
        ci = w[-1]
        u[i] = (fv[i] - hist + ci * u[i - 1]) / (ci + lam)
    return grid, u
