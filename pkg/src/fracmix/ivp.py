"""Closed-form solvers for the two scalar fractional relaxation problems.

Wave-type problem (orders gamma, beta in (1,2), type mu in [0,1], effective
order delta = beta + mu*(gamma - beta)):

    D{(gamma,beta) mu} u + lam u = f  on (0, T],
    I^((1-mu)(2-beta)) u -> xi0   and   d/dt I^((1-mu)(2-beta)) u -> xi1
    as t -> 0+,

solved by

    u(t) = xi0 t^((beta-2)(1-mu)) E(delta, delta + mu(2-gamma) - 1; -lam t^delta)
         + xi1 t^(mu+(beta-1)(1-mu)) E(delta, delta + mu(2-gamma); -lam t^delta)
         + int_0^t (t-s)^(delta-1) E(delta, delta; -lam (t-s)^delta) f(s) ds.

Diffusion-type problem with weighted first-order operator (t^theta d/dt)^alpha,
p = 1 - theta > 0, start point a >= 0:

    C(t^theta d/dt)^alpha u + lam u = f  on (a, T],   u(a+) = tau0,

solved, with S = t^p, A = a^p and c = -lam / p^alpha, by

    u(t) = tau0 E(alpha, 1; c (S - A)^alpha)
         + 1/(p^alpha Gamma(alpha)) int_A^S (S-s)^(alpha-1) f(s^(1/p)) ds
         - (lam/p^(2 alpha)) int_A^S (S-s)^(2 alpha - 1)
               E(alpha, 2 alpha; c (S-s)^alpha) f(s^(1/p)) ds.

The weighted slope trace of the diffusion solution uses the weight
``t^(1-p) (t^p - a^p)^(1-alpha)`` (equal to ``(t-a)^(1-(1-theta) alpha)``
when a = 0 or theta = 0); with that weight the homogeneous part tends to
``-lam tau0 p^(1-alpha)/Gamma(alpha)`` as t -> a+, which is the quantity
the interface matching of the mixed problem consumes.  The forcing part of
the slope differentiates under the integral (the interior term); the
start-point boundary term, which vanishes whenever f(a) = 0, is excluded
by construction so the trace limit is forcing-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special as sc

from .errors import AccuracyError, ValidationError
from .operators import HilferOrder, HyperBesselOrder, rl_integral
from .quadrature import DEFAULT_QUAD, QuadratureSpec, stencil_derivative, weighted_integral
from .sampling import SampledFunction
from .special import DEFAULT_POLICY, EvalPolicy
from .mlray import ml_ray

__all__ = [
    "HilferIVP",
    "HyperBesselIVP",
    "solve_hilfer_ivp",
    "solve_hilfer_ivp_many",
    "make_hilfer_table",
    "hilfer_initial_check",
    "solve_hyperbessel_ivp",
    "solve_hyperbessel_ivp_many",
    "make_hyperbessel_table",
    "hyperbessel_weighted_slope",
]

_SLACK = 1e-12


@dataclass(frozen=True)
class HilferIVP:
    """Wave-type scalar problem: order triple, eigenvalue, weighted initial data."""

    order: HilferOrder
    lam: float
    xi0: float
    xi1: float
    forcing: SampledFunction

    def __post_init__(self):
        if not (self.lam >= 0.0 and math.isfinite(self.lam)):
            raise ValidationError(f"eigenvalue must be >= 0, got {self.lam!r}")
        lo, hi = self.forcing.domain
        if lo > _SLACK * hi:
            raise ValidationError(f"forcing domain must start at 0, got {self.forcing.domain!r}")

    @property
    def T(self) -> float:
        return self.forcing.domain[1]


@dataclass(frozen=True)
class HyperBesselIVP:
    """Diffusion-type scalar problem with non-zero start point."""

    order: HyperBesselOrder
    lam: float
    tau0: float
    forcing: SampledFunction

    def __post_init__(self):
        if not (self.lam >= 0.0 and math.isfinite(self.lam)):
            raise ValidationError(f"eigenvalue must be >= 0, got {self.lam!r}")
        lo, hi = self.forcing.domain
        if abs(lo - self.order.a) > _SLACK * max(1.0, hi):
            raise ValidationError(
                f"forcing domain must start at a={self.order.a!r}, got {self.forcing.domain!r}")
        if hi <= self.order.a:
            raise ValidationError("forcing domain must extend beyond the start point")

    @property
    def T(self) -> float:
        return self.forcing.domain[1]


# ---------------------------------------------------------------------------
# wave-type solver
# ---------------------------------------------------------------------------

def _hilfer_rays(ivp: HilferIVP, policy: EvalPolicy):
    d = ivp.order.delta
    q2 = ivp.order.outer_order
    xi_max = ivp.T ** d
    return (ml_ray(d, d + q2 - 1.0, -ivp.lam, xi_max, policy),
            ml_ray(d, d + q2, -ivp.lam, xi_max, policy),
            ml_ray(d, d, -ivp.lam, xi_max, policy))


def _hilfer_forcing_is_zero(ivp: HilferIVP) -> bool:
    return ivp.forcing.name == "zero"


def solve_hilfer_ivp_many(ivp: HilferIVP, ts, quad: QuadratureSpec = DEFAULT_QUAD,
                          policy: EvalPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Solution values at an array of times in (0, T]."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(ts <= 0.0) or np.any(ts > ivp.T * (1.0 + _SLACK)):
        raise ValidationError(f"times must lie in (0, {ivp.T!r}]")
    d = ivp.order.delta
    e0 = (ivp.order.beta - 2.0) * (1.0 - ivp.order.mu)
    e1 = ivp.order.mu + (ivp.order.beta - 1.0) * (1.0 - ivp.order.mu)
    ray0, ray1, rayc = _hilfer_rays(ivp, policy)
    f = ivp.forcing
    sig = f.singular_exponent
    out = np.empty_like(ts)
    skip_conv = _hilfer_forcing_is_zero(ivp)
    for i, t in enumerate(ts):
        xi = t ** d
        val = ivp.xi0 * t ** e0 * ray0(xi) + ivp.xi1 * t ** e1 * ray1(xi)
        if not skip_conv:
            if sig != 0.0:
                def g(s, _t=t):
                    return rayc((_t - s) ** d) * f(s) * s ** (-sig)
            else:
                def g(s, _t=t):
                    return rayc((_t - s) ** d) * f(s)
            val += weighted_integral(g, 0.0, t, left_exp=sig, right_exp=d - 1.0,
                                     quad=quad)
        out[i] = val
    return out


def solve_hilfer_ivp(ivp: HilferIVP, t: float,
                     quad: QuadratureSpec = DEFAULT_QUAD,
                     policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """Solution value at a single time in (0, T]."""
    return float(solve_hilfer_ivp_many(ivp, [t], quad, policy)[0])


def hilfer_solution_function(ivp: HilferIVP, quad: QuadratureSpec = DEFAULT_QUAD,
                             policy: EvalPolicy = DEFAULT_POLICY) -> SampledFunction:
    """Closed-form evaluator wrapped as a SampledFunction (no tabulation)."""
    e0 = (ivp.order.beta - 2.0) * (1.0 - ivp.order.mu)

    def ev(ts):
        return solve_hilfer_ivp_many(ivp, ts, quad, policy)

    return SampledFunction.from_callable(
        ev, (0.0, ivp.T), singular_exponent=e0, increment_exponent=1.0,
        smoothness_hint=2, name="hilfer-solution")


def make_hilfer_table(ivp: HilferIVP, n: int = 480, grading: float = 3.0,
                      quad: QuadratureSpec = DEFAULT_QUAD,
                      policy: EvalPolicy = DEFAULT_POLICY) -> SampledFunction:
    """Tabulated solution on a start-graded grid, singular factor split off."""
    T = ivp.T
    grid = T * (np.arange(1, n + 1) / n) ** grading
    vals = solve_hilfer_ivp_many(ivp, grid, quad, policy)
    e0 = (ivp.order.beta - 2.0) * (1.0 - ivp.order.mu)
    return SampledFunction.from_table(
        grid, vals, domain=(0.0, T), singular_exponent=e0,
        smoothness_hint=2, name="hilfer-solution-table")


def _dedup_exponents(exps: list[float]) -> list[float]:
    out: list[float] = []
    for e in exps:
        if all(abs(e - o) > 1e-9 for o in out):
            out.append(e)
    return out


def hilfer_initial_check(ivp: HilferIVP, quad: QuadratureSpec = DEFAULT_QUAD,
                         policy: EvalPolicy = DEFAULT_POLICY,
                         t0: float | None = None,
                         consistency_tol: float = 1e-5) -> tuple[float, float]:
    """Recover the weighted initial data numerically from the solution.

    Applies the inner fractional integral to the (independently evaluated)
    solution at a cluster of small times and extrapolates t -> 0+ with the
    known local exponent ladder; the derivative limit is extrapolated from
    stencil derivatives the same way.  A two-scale repetition guards the
    extrapolation; disagreement raises :class:`AccuracyError`.
    """
    q1 = ivp.order.inner_order
    d = ivp.order.delta
    u = hilfer_solution_function(ivp, quad, policy)
    T = ivp.T

    if q1 == 0.0:
        def F(t: float) -> float:
            return float(u(t))
    else:
        def F(t: float) -> float:
            return rl_integral(u, 0.0, q1, t, quad)

    # local ladder of I^q1 u near zero: {1, t, t^d, t^(d+q1), ...}
    basis = _dedup_exponents([0.0, 1.0, d, d + q1, 1.0 + d])[:4]

    def fit_limits(tbase: float) -> tuple[float, float]:
        ts = tbase * np.array([1.0, 2.0, 4.0, 8.0])[: len(basis)]
        V = np.array([[t ** e for e in basis] for t in ts])
        scale = np.max(np.abs(V), axis=0)
        rhs = np.array([F(float(t)) for t in ts])
        coef = np.linalg.solve(V / scale, rhs) / scale
        c0 = float(coef[0])
        # derivative limit from stencil values of F; the ladder of F' keeps
        # every exponent of F shifted down by one, plus d from the t^(1+d) term
        dbasis = _dedup_exponents(
            [0.0] + [e - 1.0 for e in basis if e > 1e-9 and abs(e - 1.0) > 1e-9] + [d])[:4]
        tds = tbase * np.array([1.0, 2.0, 4.0, 8.0])[: len(dbasis)]
        Vd = np.array([[t ** e for e in dbasis] for t in tds])
        scd = np.max(np.abs(Vd), axis=0)
        rhsd = np.array([stencil_derivative(F, float(t), 1, 0.2 * float(t), lo=0.0, hi=T)
                         for t in tds])
        coefd = np.linalg.solve(Vd / scd, rhsd) / scd
        return c0, float(coefd[0])

    tbase = t0 if t0 is not None else 1e-4 * T
    c0a, c1a = fit_limits(tbase)
    c0b, c1b = fit_limits(0.5 * tbase)
    ref = 1.0 + abs(c0b) + abs(c1b)
    if abs(c0a - c0b) > consistency_tol * ref or abs(c1a - c1b) > consistency_tol * ref:
        raise AccuracyError(
            "initial-data extrapolation did not converge: "
            f"value {c0a!r} vs {c0b!r}, slope {c1a!r} vs {c1b!r}")
    return c0b, c1b


# ---------------------------------------------------------------------------
# diffusion-type solver
# ---------------------------------------------------------------------------

def _hb_geometry(ivp: HyperBesselIVP):
    al = ivp.order.alpha
    p = ivp.order.p
    A = ivp.order.a ** p
    c = -ivp.lam / p ** al
    xi_max = (ivp.T ** p - A) ** al
    return al, p, A, c, xi_max


def solve_hyperbessel_ivp_many(ivp: HyperBesselIVP, ts,
                               quad: QuadratureSpec = DEFAULT_QUAD,
                               policy: EvalPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Solution values at an array of times in (a, T] (a itself gives tau0)."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    a = ivp.order.a
    if np.any(ts < a) or np.any(ts > ivp.T * (1.0 + _SLACK)):
        raise ValidationError(f"times must lie in [{a!r}, {ivp.T!r}]")
    al, p, A, c, xi_max = _hb_geometry(ivp)
    ray1 = ml_ray(al, 1.0, c, xi_max, policy)
    ray2 = ml_ray(al, 2.0 * al, c, xi_max, policy)
    f = ivp.forcing
    ga = sc.gamma(al)
    skip_conv = f.name == "zero"
    out = np.empty_like(ts)
    for i, t in enumerate(ts):
        if t == a:
            out[i] = ivp.tau0
            continue
        S = t ** p
        xi = (S - A) ** al
        val = ivp.tau0 * ray1(xi)
        if not skip_conv:
            def g1(s):
                return f(s ** (1.0 / p))

            def g2(s, _S=S):
                return ray2((_S - s) ** al) * f(s ** (1.0 / p))

            I1 = weighted_integral(g1, A, S, right_exp=al - 1.0, quad=quad)
            I2 = weighted_integral(g2, A, S, right_exp=2.0 * al - 1.0, quad=quad)
            val += I1 / (p ** al * ga) - ivp.lam / p ** (2.0 * al) * I2
        out[i] = val
    return out


def solve_hyperbessel_ivp(ivp: HyperBesselIVP, t: float,
                          quad: QuadratureSpec = DEFAULT_QUAD,
                          policy: EvalPolicy = DEFAULT_POLICY) -> float:
    return float(solve_hyperbessel_ivp_many(ivp, [t], quad, policy)[0])


def hyperbessel_solution_function(ivp: HyperBesselIVP,
                                  quad: QuadratureSpec = DEFAULT_QUAD,
                                  policy: EvalPolicy = DEFAULT_POLICY) -> SampledFunction:
    def ev(ts):
        return solve_hyperbessel_ivp_many(ivp, ts, quad, policy)

    return SampledFunction.from_callable(
        ev, (ivp.order.a, ivp.T), increment_exponent=ivp.order.alpha,
        smoothness_hint=2, name="hyperbessel-solution")


def make_hyperbessel_table(ivp: HyperBesselIVP, n: int = 480, grading: float = 3.0,
                           quad: QuadratureSpec = DEFAULT_QUAD,
                           policy: EvalPolicy = DEFAULT_POLICY) -> SampledFunction:
    """Tabulated solution on a grid graded toward the start point."""
    a, T = ivp.order.a, ivp.T
    grid = a + (T - a) * (np.arange(n + 1) / n) ** grading
    vals = solve_hyperbessel_ivp_many(ivp, grid, quad, policy)
    return SampledFunction.from_table(
        grid, vals, domain=(a, T), increment_exponent=ivp.order.alpha,
        smoothness_hint=2, name="hyperbessel-solution-table")


def hyperbessel_weighted_slope(ivp: HyperBesselIVP, t: float,
                               quad: QuadratureSpec = DEFAULT_QUAD,
                               policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """Weighted time-derivative trace t^(1-p) (t^p-a^p)^(1-alpha) u'(t).

    Computed from the analytic term-wise derivative of the closed form; the
    forcing contribution differentiates under the integral (interior term
    only, see module docstring), so as t -> a+ the value tends to
    ``-lam * tau0 * p^(1-alpha) / Gamma(alpha)`` regardless of forcing.
    """
    a = ivp.order.a
    if not (t > a):
        raise ValidationError(f"slope trace needs t > a, got t={t!r}")
    if t > ivp.T * (1.0 + _SLACK):
        raise ValidationError(f"t={t!r} beyond horizon {ivp.T!r}")
    al, p, A, c, xi_max = _hb_geometry(ivp)
    rayaa = ml_ray(al, al, c, xi_max, policy)
    S = t ** p
    xi = (S - A) ** al
    val = -ivp.lam * ivp.tau0 * p ** (1.0 - al) * rayaa(xi)
    f = ivp.forcing
    if f.name != "zero":
        fprime = f.derivative()

        def g(s, _S=S):
            tau = s ** (1.0 / p)
            return rayaa((_S - s) ** al) * fprime(tau) * (1.0 / p) * s ** (1.0 / p - 1.0)

        I = weighted_integral(g, A, S, right_exp=al - 1.0, quad=quad)
        val += p ** (1.0 - al) * (S - A) ** (1.0 - al) * I
    return float(val)
