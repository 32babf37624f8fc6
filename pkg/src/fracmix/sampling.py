"""Single- and two-variable function carriers fed to the fractional operators.

A :class:`SampledFunction` is either a closed-form evaluator (vectorized
callable) or a tabulated grid with a piecewise-cubic interpolant.  Two
pieces of metadata make weakly singular integrands tractable:

* ``singular_exponent`` s: the function behaves like ``(t - lo)^s * smooth``
  near the left end of its domain.  Quadratures absorb that power into the
  integration weight instead of sampling it, and tables store the regular
  factor so the interpolant never has to chase a singular derivative.
* ``increment_exponent`` r: ``f(t) - f(lo)`` behaves like ``(t - lo)^r``.
  Operators that act on the increment (the regularized hyper-Bessel form)
  use it the same way.

Closed forms used by the command-line layer come from a small named
catalog so a run configuration can reference them by name + parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable

import numpy as np
from scipy.interpolate import CubicSpline, RectBivariateSpline

from .errors import ValidationError

__all__ = [
    "SampledFunction",
    "BivariateFunction",
    "make_function",
    "make_bivariate",
    "FUNCTION_CATALOG",
    "BIVARIATE_CATALOG",
]

_DOMAIN_SLACK = 1e-9


@dataclass(frozen=True)
class SampledFunction:
    """A function of one variable on a closed interval.

    Exactly one of ``evaluator`` / (``grid``, ``values``) is set.  Tables
    with a nonzero ``singular_exponent`` store the spline of the regular
    factor ``values / (grid - lo)^s`` and multiply the power back on
    evaluation.
    """

    domain: tuple[float, float]
    evaluator: Callable[[np.ndarray], np.ndarray] | None = None
    grid: np.ndarray | None = None
    values: np.ndarray | None = None
    smoothness_hint: int = 2
    singular_exponent: float = 0.0
    increment_exponent: float = 1.0
    derivative_fn: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = ""
    _spline: Any = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        lo, hi = self.domain
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValidationError(f"domain must be a finite interval, got {self.domain!r}")
        if self.singular_exponent <= -1.0:
            raise ValidationError(
                f"singular_exponent must exceed -1, got {self.singular_exponent!r}"
            )
        if (self.evaluator is None) == (self.grid is None):
            raise ValidationError("provide exactly one of evaluator or table data")
        if self.grid is not None:
            g = np.asarray(self.grid, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if g.ndim != 1 or g.shape != v.shape or g.size < 4:
                raise ValidationError("table needs matching 1-d grid/values, >= 4 points")
            if np.any(np.diff(g) <= 0.0):
                raise ValidationError("table grid must be strictly increasing")
            if g[0] < lo - _DOMAIN_SLACK * (hi - lo) or g[-1] > hi + _DOMAIN_SLACK * (hi - lo):
                raise ValidationError("table grid exceeds the declared domain")
            s = self.singular_exponent
            if s != 0.0:
                if g[0] <= lo:
                    if s < 0.0:
                        raise ValidationError(
                            "singular table must start strictly inside the domain"
                        )
                    reg = np.empty_like(v)
                    reg[1:] = v[1:] / (g[1:] - lo) ** s
                    reg[0] = reg[1]  # endpoint regular value is never consumed
                else:
                    reg = v / (g - lo) ** s
            else:
                reg = v
            object.__setattr__(self, "grid", g)
            object.__setattr__(self, "values", v)
            object.__setattr__(self, "_spline", CubicSpline(g, reg))

    # -- construction -----------------------------------------------------

    @classmethod
    def from_callable(cls, fn: Callable, domain, *, smoothness_hint: int = 2,
                      singular_exponent: float = 0.0, increment_exponent: float = 1.0,
                      derivative: Callable | None = None, name: str = "") -> "SampledFunction":
        return cls(domain=(float(domain[0]), float(domain[1])), evaluator=fn,
                   smoothness_hint=smoothness_hint, singular_exponent=singular_exponent,
                   increment_exponent=increment_exponent, derivative_fn=derivative, name=name)

    @classmethod
    def from_table(cls, grid, values, *, domain=None, smoothness_hint: int = 2,
                   singular_exponent: float = 0.0, increment_exponent: float = 1.0,
                   name: str = "") -> "SampledFunction":
        g = np.asarray(grid, dtype=float)
        dom = (float(g[0]), float(g[-1])) if domain is None else (float(domain[0]), float(domain[1]))
        return cls(domain=dom, grid=g, values=np.asarray(values, dtype=float),
                   smoothness_hint=smoothness_hint, singular_exponent=singular_exponent,
                   increment_exponent=increment_exponent, name=name)

    # -- evaluation --------------------------------------------------------

    def __call__(self, x):
        scalar = np.isscalar(x)
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        lo, hi = self.domain
        slack = _DOMAIN_SLACK * (hi - lo)
        if np.any(xs < lo - slack) or np.any(xs > hi + slack):
            bad = xs[(xs < lo - slack) | (xs > hi + slack)][0]
            raise ValidationError(f"evaluation at {bad!r} outside domain {self.domain!r}")
        xs = np.clip(xs, lo, hi)
        if self.evaluator is not None:
            out = np.asarray(self.evaluator(xs), dtype=float)
            if out.shape != xs.shape:
                out = np.broadcast_to(out, xs.shape).astype(float)
        else:
            out = np.asarray(self._spline(xs), dtype=float)
            s = self.singular_exponent
            if s != 0.0:
                with np.errstate(divide="ignore"):
                    out = out * (xs - lo) ** s
                if s > 0.0:
                    out = np.where(xs == lo, 0.0, out)
        return float(out[0]) if scalar else out

    def derivative(self) -> "SampledFunction":
        """First derivative, analytic where available, else spline/stencil based."""
        lo, hi = self.domain
        if self.derivative_fn is not None:
            return SampledFunction.from_callable(
                self.derivative_fn, self.domain,
                smoothness_hint=max(0, self.smoothness_hint - 1),
                name=self.name + "'")
        if self._spline is not None and self.singular_exponent == 0.0:
            d = self._spline.derivative()
            return SampledFunction.from_callable(
                lambda t: d(t), self.domain,
                smoothness_hint=max(0, self.smoothness_hint - 1),
                name=self.name + "'")
        h = 1e-5 * (hi - lo)

        def stencil(t):
            t = np.asarray(t, dtype=float)
            tt = np.clip(t, lo + 2 * h, hi - 2 * h)
            return (self(tt - 2 * h) - 8 * self(tt - h) + 8 * self(tt + h)
                    - self(tt + 2 * h)) / (12 * h)

        return SampledFunction.from_callable(
            stencil, self.domain, smoothness_hint=max(0, self.smoothness_hint - 1),
            name=self.name + "'~")

    def shifted_by_start_value(self) -> tuple["SampledFunction", float]:
        """Return (f - f(lo), f(lo)); the increment carries its own exponent."""
        lo, _ = self.domain
        if self.singular_exponent < 0.0:
            raise ValidationError("start value undefined for a singular function")
        f_lo = float(self(lo))
        base = self

        def inc(t):
            return np.asarray(base(t), dtype=float) - f_lo

        shifted = SampledFunction.from_callable(
            inc, self.domain, smoothness_hint=self.smoothness_hint,
            singular_exponent=self.increment_exponent,
            increment_exponent=self.increment_exponent,
            name=(self.name or "f") + "-start")
        return shifted, f_lo


# ---------------------------------------------------------------------------
# closed-form catalogs (used by configuration ingestion and the demos)
# ---------------------------------------------------------------------------

def _entry_zero(**_):
    return (lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            lambda t: np.zeros_like(np.asarray(t, dtype=float)))


def _entry_constant(value: float = 1.0):
    v = float(value)
    return (lambda t: np.full_like(np.asarray(t, dtype=float), v),
            lambda t: np.zeros_like(np.asarray(t, dtype=float)))


def _entry_power(amp: float = 1.0, exponent: float = 1.0):
    a, e = float(amp), float(exponent)
    return (lambda t: a * np.asarray(t, dtype=float) ** e,
            (lambda t: a * e * np.asarray(t, dtype=float) ** (e - 1.0)) if e != 0.0 else
            (lambda t: np.zeros_like(np.asarray(t, dtype=float))))


def _entry_poly(coeffs=(0.0, 1.0)):
    c = np.asarray(coeffs, dtype=float)  # ascending order
    dc = c[1:] * np.arange(1, c.size)
    return (lambda t: np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), c),
            lambda t: np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), dc)
            if dc.size else np.zeros_like(np.asarray(t, dtype=float)))


def _entry_sin(amp: float = 1.0, freq: float = 1.0, phase: float = 0.0):
    a, w, p = float(amp), float(freq), float(phase)
    return (lambda t: a * np.sin(w * np.asarray(t, dtype=float) + p),
            lambda t: a * w * np.cos(w * np.asarray(t, dtype=float) + p))


def _entry_exp(amp: float = 1.0, rate: float = -1.0):
    a, r = float(amp), float(rate)
    return (lambda t: a * np.exp(r * np.asarray(t, dtype=float)),
            lambda t: a * r * np.exp(r * np.asarray(t, dtype=float)))


def _entry_sin_bump(amp: float = 1.0, m: int = 1):
    a, mm = float(amp), int(m)
    return (lambda x: a * np.sin(mm * np.pi * np.asarray(x, dtype=float)),
            lambda x: a * mm * np.pi * np.cos(mm * np.pi * np.asarray(x, dtype=float)))


def _entry_poly_bump(amp: float = 4.0):
    a = float(amp)
    return (lambda x: a * np.asarray(x, dtype=float) * (1.0 - np.asarray(x, dtype=float)),
            lambda x: a * (1.0 - 2.0 * np.asarray(x, dtype=float)))


FUNCTION_CATALOG: dict[str, Callable] = {
    "zero": _entry_zero,
    "constant": _entry_constant,
    "power": _entry_power,
    "poly": _entry_poly,
    "sin": _entry_sin,
    "exp": _entry_exp,
    "sine_mode": _entry_sin_bump,   # sin(m*pi*x) on [0, 1]
    "poly_bump": _entry_poly_bump,  # amp * x * (1 - x) on [0, 1]
}


def make_function(name: str, params: dict | None, domain, *,
                  singular_exponent: float = 0.0,
                  increment_exponent: float = 1.0,
                  smoothness_hint: int = 3) -> SampledFunction:
    """Instantiate a catalog entry as a SampledFunction."""
    if name not in FUNCTION_CATALOG:
        raise ValidationError(
            f"unknown function catalog entry {name!r}; known: {sorted(FUNCTION_CATALOG)}"
        )
    fn, dfn = FUNCTION_CATALOG[name](**(params or {}))
    return SampledFunction.from_callable(
        fn, domain, derivative=dfn, name=name, smoothness_hint=smoothness_hint,
        singular_exponent=singular_exponent, increment_exponent=increment_exponent)


@dataclass(frozen=True)
class BivariateFunction:
    """A function f(x, t) on [0, 1] x [0, T]; optionally with analytic f_xx.

    ``fxx`` being available lets the admissibility checks test the
    second-derivative boundary conditions; tables interpolate bicubically
    and expose no f_xx.
    """

    fn: Callable[[np.ndarray, float], np.ndarray]
    t_max: float
    fxx: Callable[[np.ndarray, float], np.ndarray] | None = None
    name: str = ""

    def __call__(self, x, t: float):
        return np.asarray(self.fn(np.asarray(x, dtype=float), float(t)), dtype=float)

    def has_fxx(self) -> bool:
        return self.fxx is not None

    def fxx_at(self, x, t: float):
        if self.fxx is None:
            raise ValidationError(f"f_xx unavailable for {self.name or 'this function'}")
        return np.asarray(self.fxx(np.asarray(x, dtype=float), float(t)), dtype=float)


def _biv_zero(t_max: float, **_):
    return BivariateFunction(
        fn=lambda x, t: np.zeros_like(np.asarray(x, dtype=float)),
        fxx=lambda x, t: np.zeros_like(np.asarray(x, dtype=float)),
        t_max=t_max, name="zero")


def _biv_sine_exp(t_max: float, amp: float = 1.0, m: int = 1, rate: float = 1.0):
    a, mm, r = float(amp), int(m), float(rate)

    def f(x, t):
        return a * np.sin(mm * np.pi * x) * math.exp(-r * t)

    def fxx(x, t):
        return -a * (mm * np.pi) ** 2 * np.sin(mm * np.pi * x) * math.exp(-r * t)

    return BivariateFunction(fn=f, fxx=fxx, t_max=t_max, name="sine_exp")


def _biv_poly_bump_t(t_max: float, amp: float = 1.0):
    a = float(amp)

    def f(x, t):
        return a * x * (1.0 - x) * t

    def fxx(x, t):
        return np.full_like(np.asarray(x, dtype=float), -2.0 * a * t)

    return BivariateFunction(fn=f, fxx=fxx, t_max=t_max, name="poly_bump_t")


BIVARIATE_CATALOG: dict[str, Callable] = {
    "zero": _biv_zero,
    "sine_exp": _biv_sine_exp,       # amp * sin(m pi x) * exp(-rate t)
    "poly_bump_t": _biv_poly_bump_t, # amp * x(1-x) * t
}


def make_bivariate(name: str, params: dict | None, t_max: float) -> BivariateFunction:
    if name not in BIVARIATE_CATALOG:
        raise ValidationError(
            f"unknown forcing catalog entry {name!r}; known: {sorted(BIVARIATE_CATALOG)}"
        )
    return BIVARIATE_CATALOG[name](t_max=float(t_max), **(params or {}))


def bivariate_from_table(x_grid, t_grid, values, name: str = "table") -> BivariateFunction:
    """Bicubic interpolant of a rectangular table values[i, j] = f(x_i, t_j)."""
    xg = np.asarray(x_grid, dtype=float)
    tg = np.asarray(t_grid, dtype=float)
    vv = np.asarray(values, dtype=float)
    if vv.shape != (xg.size, tg.size):
        raise ValidationError(f"table shape {vv.shape} does not match grids "
                              f"({xg.size}, {tg.size})")
    spl = RectBivariateSpline(xg, tg, vv, kx=min(3, xg.size - 1), ky=min(3, tg.size - 1))

    def f(x, t):
        return spl(np.asarray(x, dtype=float), float(t)).ravel()

    return BivariateFunction(fn=f, fxx=None, t_max=float(tg[-1]), name=name)
