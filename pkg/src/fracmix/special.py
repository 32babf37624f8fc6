"""Two-parameter Mittag-Leffler function and a two-gamma Wright-type series.

``E(a, b; z) = sum_k z^k / Gamma(a*k + b)`` is the workhorse kernel of
fractional relaxation; everything downstream (fractional-operator oracles,
closed-form IVP solutions, the interface system of the mixed problem)
reduces to evaluating it on the real line, mostly for z <= 0 and often for
very large |z|.

The negative axis is numerically hostile: the Taylor series alternates with
terms that peak near ``exp(a * |z|^(1/a))`` before decaying, so fixed
precision is destroyed by cancellation, while the large-|z| expansion

    E(a, b; z) ~ S_exp(z) - sum_{n>=1} z^(-n) / Gamma(b - a*n)

is only asymptotic (optimal truncation).  ``S_exp`` is the exponentially
small saddle contribution ``(2/a) Re[w^(1-b) e^w]`` with
``w = |z|^(1/a) e^(i pi/a)``, present for ``1 <= a <= 2``; it is what keeps
the expansion honest near a = 2, where the algebraic part alone is wrong at
plainly visible magnitudes.

Evaluation strategy (three regimes, thresholds from :class:`EvalPolicy`):

* ``|z| <= series_radius`` - compensated float64 Taylor summation, with a
  running cancellation estimate; if the estimate shows the requested
  relative tolerance cannot be met in double precision the evaluation
  escalates instead of returning a degraded value.
* ``z <= -asymptotic_radius`` - the saddle + algebraic expansion, truncated
  at the envelope minimum and *certified*: it is returned only when the
  first omitted envelope term (times a safety factor) is below the
  requested tolerance.
* everything else (and every uncertified case above) - adaptive
  extended-precision summation of the defining series, with working digits
  chosen from an a-priori estimate of the peak-term magnitude and verified
  against the realized cancellation.  This is the documented
  "extended-precision summation" choice for the intermediate band; on the
  far negative axis the certified expansion is attempted first because it
  is exact to the requested tolerance whenever it certifies.

No path ever returns an uncertified value: convergence failure raises
:class:`~fracmix.errors.AccuracyError`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath as mp
import numpy as np
import scipy.special as sc

from .errors import AccuracyError, ValidationError

__all__ = [
    "EvalPolicy",
    "MLParams",
    "WrightParams",
    "MLLimitReport",
    "DEFAULT_POLICY",
    "ml_eval",
    "wright_eval",
    "ml_bounds",
    "ml_asymptotic_limit_check",
]

_LN10 = math.log(10.0)
_TINY = 1e-300


@dataclass(frozen=True)
class EvalPolicy:
    """Evaluation thresholds and caps for the series machinery.

    ``series_radius`` and ``asymptotic_radius`` split the real line into the
    three regimes documented in the module docstring.  ``max_terms`` caps any
    single summation; exceeding it is an error, never a warning.
    """

    target_tol: float = 1e-12
    series_radius: float = 5.0
    asymptotic_radius: float = 50.0
    max_terms: int = 10_000

    def __post_init__(self):
        if not (0.0 < self.series_radius < self.asymptotic_radius):
            raise ValidationError(
                "require 0 < series_radius < asymptotic_radius, got "
                f"{self.series_radius!r}, {self.asymptotic_radius!r}"
            )
        if not (self.target_tol > 0.0 and math.isfinite(self.target_tol)):
            raise ValidationError(f"target_tol must be positive, got {self.target_tol!r}")
        if self.max_terms < 8:
            raise ValidationError(f"max_terms too small: {self.max_terms!r}")


DEFAULT_POLICY = EvalPolicy()


@dataclass(frozen=True)
class MLParams:
    """Order pair (alpha, beta) of the two-parameter Mittag-Leffler function."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise ValidationError(f"alpha must be finite and > 0, got {self.alpha!r}")
        if not math.isfinite(self.beta):
            raise ValidationError(f"beta must be finite, got {self.beta!r}")


@dataclass(frozen=True)
class WrightParams:
    """Parameters of the two-gamma series sum_n z^n / (Gamma(a*n+mu) Gamma(d-b*n)).

    Convergence requires a > 0 and a > b.
    """

    alpha: float
    beta: float
    mu: float
    delta: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise ValidationError(f"alpha must be finite and > 0, got {self.alpha!r}")
        if not (math.isfinite(self.beta) and self.alpha > self.beta):
            raise ValidationError(
                f"need alpha > beta, got alpha={self.alpha!r}, beta={self.beta!r}"
            )
        if not (math.isfinite(self.mu) and math.isfinite(self.delta)):
            raise ValidationError("mu and delta must be finite")


# ---------------------------------------------------------------------------
# float64 Taylor regime
# ---------------------------------------------------------------------------

def _taylor_ml(alpha: float, beta: float, z: float, tol: float, max_terms: int):
    """Compensated Taylor summation; returns (value, ok).

    ok=False means double precision could not certify the tolerance
    (cancellation or overflow) and the caller must escalate.
    """
    total = 0.0
    comp = 0.0
    zk = 1.0
    peak = 1e-30
    small = 0
    chunk = 64
    k = 0
    while k < max_terms:
        ks = np.arange(k, min(k + chunk, max_terms), dtype=float)
        rg = sc.rgamma(alpha * ks + beta)
        for r in rg:
            term = zk * r
            # Kahan step
            y = term - comp
            t = total + y
            comp = (t - total) - y
            total = t
            a = abs(term)
            if a > peak:
                peak = a
            aa = abs(total)
            if aa > peak:
                peak = aa
            if a <= 0.05 * tol * max(abs(total), _TINY):
                small += 1
                if small >= 4:
                    # cancellation self-check: noise floor must sit below tol
                    noise = 5e-15 * peak
                    if noise > tol * max(abs(total), _TINY):
                        return None, False
                    return total, True
            else:
                small = 0
            if zk != 0.0 and abs(zk) > 1e280:
                return None, False
            zk *= z
            k += 1
    return None, False


# ---------------------------------------------------------------------------
# negative-axis asymptotic regime (saddle + algebraic, certified)
# ---------------------------------------------------------------------------

def _saddle_term(alpha: float, beta: float, z: float) -> float:
    """Exponentially small contribution on the negative axis, 1 <= alpha <= 2."""
    if not (1.0 <= alpha <= 2.0):
        return 0.0
    x = -z
    w = (x ** (1.0 / alpha)) * cmath.exp(1j * math.pi / alpha)
    if w.real > 700.0:  # cannot happen for alpha <= 2, z < 0; guard anyway
        return math.inf
    val = (w ** (1.0 - beta)) * cmath.exp(w)
    weight = 1.0 if alpha == 1.0 else 2.0
    return (weight / alpha) * val.real


def _rgamma_envelope(x: float) -> float:
    """Upper bound for |1/Gamma(x)| that never underestimates near poles."""
    if x > 0.0:
        return abs(sc.rgamma(x))
    # reflection: |1/Gamma(x)| = Gamma(1-x) |sin(pi x)| / pi <= Gamma(1-x) / pi
    lg = math.lgamma(1.0 - x)
    if lg > 700.0:
        return math.inf
    return math.exp(lg) / math.pi


def _asymptotic_ml(alpha: float, beta: float, z: float, tol: float):
    """Saddle + algebraic expansion truncated at the envelope minimum.

    Returns (value, ok).  ok=True certifies relative error <= tol.
    """
    if z >= 0.0:
        return None, False
    # At alpha == 2 the saddle pair sits on the boundary of the algebraic
    # sector; the combination is exact only when the algebraic part vanishes
    # identically (2 - beta a nonnegative integer), e.g. cos and sinc.
    if alpha == 2.0:
        k = 2.0 - beta
        if not (abs(k - round(k)) < 1e-12 and k > -0.5):
            return None, False
    elif alpha > 2.0:
        return None, False

    saddle = _saddle_term(alpha, beta, z)
    if not math.isfinite(saddle):
        return None, False

    acc = saddle
    best_val = None
    best_env = math.inf
    log_az = math.log(abs(z))
    zn = 1.0
    for n in range(1, 400):
        zn /= z
        term = -sc.rgamma(beta - alpha * n) * zn
        env = _rgamma_envelope(beta - alpha * n) * math.exp(-n * log_az)
        acc += term
        if env < best_env:
            best_env = env
            best_val = acc
        if env < 1e-3 * tol * max(abs(acc), _TINY) and n >= 2:
            best_env = env
            best_val = acc
            break
        if env > 1e3 * best_env and n > 3:
            break
    if best_val is None:
        return None, False
    scale = max(abs(best_val), _TINY)
    if best_val != 0.0 and 4.0 * best_env <= tol * scale:
        return best_val, True
    return None, False


# ---------------------------------------------------------------------------
# extended-precision regime
# ---------------------------------------------------------------------------

def _series_peak_digits(alpha: float, beta: float, z: float, nmax: int) -> tuple[float, int]:
    """Decimal magnitude of the largest Taylor term and its index (estimate)."""
    az = abs(z)
    if az <= 1.0:
        return 0.0, 8
    log10z = math.log10(az)

    def digits(k: float) -> float:
        x = alpha * k + beta
        if x <= 0.0:
            return k * log10z  # early pre-gamma region; crude but only a hint
        return k * log10z - math.lgamma(x) / _LN10

    kpeak = az ** (1.0 / alpha) / alpha
    best_d, best_k = 0.0, 1
    for k in {1, 2, 4, 8, max(1, int(kpeak / 2)), max(1, int(kpeak)),
              max(1, int(1.2 * kpeak)), max(1, int(2 * kpeak)), nmax}:
        d = digits(float(k))
        if d > best_d:
            best_d, best_k = d, k
    return best_d, max(best_k, 8)


def _mp_series(coeff_log_rgamma, z: float, tol: float, max_terms: int,
               peak_digits: float, kpeak: int, what: str) -> float:
    """Adaptive-precision summation of sum_k z^k * c_k with |c_k| <= 1.

    ``coeff_log_rgamma(k)`` must return the mpf coefficient c_k at the
    current working precision.  Working digits start above the peak-term
    magnitude and grow until the realized cancellation is covered.
    """
    if 3 * kpeak > 20 * max_terms:
        raise AccuracyError(
            f"{what}: series needs ~{3 * kpeak} terms, exceeding the cap {max_terms}"
        )
    dps = max(30, int(peak_digits) + 25)
    for _ in range(4):
        with mp.workdps(dps):
            zz = mp.mpf(z)
            total = mp.mpf(0)
            pw = mp.mpf(1)
            peak = mp.mpf(1)
            thr = mp.mpf(10) ** (peak_digits - dps + 3)
            small = 0
            converged = False
            for k in range(max_terms):
                term = pw * coeff_log_rgamma(k)
                total += term
                at = abs(term)
                if at > peak:
                    peak = at
                if abs(total) > peak:
                    peak = abs(total)
                if k > kpeak and at < thr:
                    small += 1
                    if small >= 4:
                        converged = True
                        break
                else:
                    small = 0
                pw *= zz
            if not converged:
                raise AccuracyError(
                    f"{what}: no convergence within max_terms={max_terms} at |z|={abs(z):g}"
                )
            if total == 0:
                cancel = peak_digits + dps
            else:
                cancel = float(mp.log10(peak / abs(total)))
            if dps >= cancel + 18 + math.log10(1.0 / tol) - 10:
                # realized cancellation covered with margin for the target
                needed = cancel + math.log10(1.0 / tol) + 8
                if dps >= needed:
                    return float(total)
            dps = int(cancel + math.log10(1.0 / tol) + 25)
    raise AccuracyError(f"{what}: adaptive precision did not stabilize at |z|={abs(z):g}")


def _mp_ml(alpha: float, beta: float, z: float, tol: float, max_terms: int) -> float:
    peak_digits, kpeak = _series_peak_digits(alpha, beta, z, max_terms)
    a = mp.mpf(alpha)
    b = mp.mpf(beta)

    def coeff(k: int):
        return mp.rgamma(a * k + b)

    val = _mp_series(coeff, z, tol, max_terms, peak_digits, kpeak,
                     what=f"ml_eval(alpha={alpha:g}, beta={beta:g})")
    if not math.isfinite(val):
        raise AccuracyError(
            f"ml_eval(alpha={alpha:g}, beta={beta:g}, z={z:g}) overflows double precision"
        )
    return val


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------

@lru_cache(maxsize=300_000)
def _ml_cached(alpha: float, beta: float, z: float, tol: float,
               series_radius: float, asymptotic_radius: float, max_terms: int) -> float:
    if z == 0.0:
        return float(sc.rgamma(beta))
    az = abs(z)
    if az <= series_radius:
        val, ok = _taylor_ml(alpha, beta, z, tol, max_terms)
        if ok:
            return val
        return _mp_ml(alpha, beta, z, tol, max_terms)
    if z < 0.0:
        # certified expansion first: exact-to-tolerance whenever it certifies,
        # both beyond asymptotic_radius (the designated regime) and in the
        # intermediate band, where it spares the extended-precision engine.
        val, ok = _asymptotic_ml(alpha, beta, z, tol)
        if ok:
            return val
    return _mp_ml(alpha, beta, z, tol, max_terms)


def ml_eval(params: MLParams, z: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """Evaluate E(alpha, beta; z) for real z to relative accuracy policy.target_tol."""
    if isinstance(params, tuple):
        params = MLParams(*params)
    if not isinstance(params, MLParams):
        raise ValidationError(f"params must be MLParams, got {type(params).__name__}")
    zf = float(z)
    if not math.isfinite(zf):
        raise ValidationError(f"z must be finite, got {z!r}")
    return _ml_cached(params.alpha, params.beta, zf, policy.target_tol,
                      policy.series_radius, policy.asymptotic_radius, policy.max_terms)


def _ml(alpha: float, beta: float, z: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """Internal fast-path used by other modules (skips parameter re-wrapping)."""
    zf = float(z)
    if not math.isfinite(zf):
        raise ValidationError(f"z must be finite, got {z!r}")
    return _ml_cached(float(alpha), float(beta), zf, policy.target_tol,
                      policy.series_radius, policy.asymptotic_radius, policy.max_terms)


def _taylor_wright(alpha: float, beta: float, mu: float, delta: float,
                   z: float, tol: float, max_terms: int):
    total = 0.0
    comp = 0.0
    zk = 1.0
    peak = 1e-30
    small = 0
    for k in range(max_terms):
        c = sc.rgamma(alpha * k + mu) * sc.rgamma(delta - beta * k)
        term = zk * c
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        a = abs(term)
        peak = max(peak, a, abs(total))
        if a <= 0.05 * tol * max(abs(total), _TINY):
            small += 1
            if small >= 4:
                noise = 5e-15 * peak
                if noise > tol * max(abs(total), _TINY):
                    return None, False
                return total, True
        else:
            small = 0
        if zk != 0.0 and abs(zk) > 1e280:
            return None, False
        zk *= z
    return None, False


def _wright_peak_digits(p: WrightParams, z: float, nmax: int) -> tuple[float, int]:
    az = abs(z)
    if az <= 1.0:
        return 0.0, 8
    log10z = math.log10(az)

    def digits(k: float) -> float:
        d = k * log10z
        x1 = p.alpha * k + p.mu
        if x1 > 0.0:
            d -= math.lgamma(x1) / _LN10
        x2 = p.delta - p.beta * k
        if x2 > 0.0:
            d -= math.lgamma(x2) / _LN10
        else:
            d += math.lgamma(1.0 - x2) / _LN10  # envelope via reflection
        return d

    best_d, best_k = 0.0, 8
    for k in np.unique(np.geomspace(1, max(nmax, 16), 80).astype(int)):
        d = digits(float(k))
        if d > best_d:
            best_d, best_k = d, int(k)
    return best_d, best_k


def wright_eval(params: WrightParams, z: float, policy: EvalPolicy = DEFAULT_POLICY) -> float:
    """Evaluate the two-gamma series at real z.

    Terms whose second gamma argument hits a nonpositive integer contribute
    zero (reciprocal gamma vanishes at poles).
    """
    if not isinstance(params, WrightParams):
        raise ValidationError(f"params must be WrightParams, got {type(params).__name__}")
    zf = float(z)
    if not math.isfinite(zf):
        raise ValidationError(f"z must be finite, got {z!r}")
    tol = policy.target_tol
    if abs(zf) <= policy.series_radius:
        val, ok = _taylor_wright(params.alpha, params.beta, params.mu, params.delta,
                                 zf, tol, policy.max_terms)
        if ok:
            return val
    peak_digits, kpeak = _wright_peak_digits(params, zf, policy.max_terms)
    a = mp.mpf(params.alpha)
    b = mp.mpf(params.beta)
    m = mp.mpf(params.mu)
    d = mp.mpf(params.delta)

    def coeff(k: int):
        return mp.rgamma(a * k + m) * mp.rgamma(d - b * k)

    return _mp_series(coeff, zf, tol, policy.max_terms, peak_digits, kpeak,
                      what=f"wright_eval(alpha={params.alpha:g}, beta={params.beta:g})")


def ml_bounds(params: MLParams, x: float) -> tuple[float, float]:
    """Two-sided bounds for E(alpha, beta; -x), alpha in (0,1], x >= 0.

    For beta == alpha the squared-denominator bounds apply directly; for
    beta > alpha the display for Gamma(beta)*E is divided through by
    Gamma(beta) so the returned pair brackets the function value itself.
    """
    if not isinstance(params, MLParams):
        raise ValidationError(f"params must be MLParams, got {type(params).__name__}")
    a, b = params.alpha, params.beta
    if not (0.0 < a <= 1.0):
        raise ValidationError(f"bounds require alpha in (0, 1], got {a!r}")
    if b < a:
        raise ValidationError(f"bounds require beta >= alpha, got beta={b!r} < alpha={a!r}")
    xf = float(x)
    if not (math.isfinite(xf) and xf >= 0.0):
        raise ValidationError(f"x must be finite and >= 0, got {x!r}")
    if xf == 0.0:
        g = float(sc.rgamma(b))
        return (g, g) if b != a else (1.0, 1.0)
    if b == a:
        ratio_low = sc.gamma(1.0 - a) / sc.gamma(1.0 + a)  # inf at a == 1
        low = 0.0 if not math.isfinite(ratio_low) else 1.0 / (1.0 + math.sqrt(ratio_low) * xf) ** 2
        high = 1.0 / (1.0 + (sc.gamma(1.0 + a) / sc.gamma(1.0 + 2.0 * a)) * xf) ** 2
    else:
        gb = sc.gamma(b)
        low = 1.0 / (1.0 + (sc.gamma(b - a) / gb) * xf) / gb
        high = 1.0 / (1.0 + (gb / sc.gamma(b + a)) * xf) / gb
    if low > high:
        low, high = high, low
    return float(low), float(high)


@dataclass
class MLLimitReport:
    """Large-negative-argument behaviour of E(alpha, beta; z) along a sequence."""

    alpha: float
    beta: float
    z_values: list[float]
    e_values: list[float]
    ze_values: list[float]
    ze_target: float
    e_tends_to_zero: bool
    ze_tends_to_target: bool
    tail_monotone: bool
    e_abs_tol: float
    ze_rel_tol: float
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.e_tends_to_zero and self.ze_tends_to_target and self.tail_monotone


def ml_asymptotic_limit_check(params: MLParams, z_sequence,
                              policy: EvalPolicy = DEFAULT_POLICY,
                              e_abs_tol: float = 1e-3,
                              ze_rel_tol: float = 0.01) -> MLLimitReport:
    """Check E(z) -> 0 and z*E(z) -> -1/Gamma(beta-alpha) along z -> -inf.

    ``z_sequence`` must be strictly decreasing and negative; the flags
    compare the last element against the limits and require a monotone
    |E| tail over the second half of the sequence.
    """
    zs = [float(z) for z in z_sequence]
    if len(zs) < 2:
        raise ValidationError("z_sequence needs at least two points")
    if any(z >= 0.0 for z in zs) or any(b >= a for a, b in zip(zs, zs[1:])):
        raise ValidationError("z_sequence must be negative and strictly decreasing")
    e_vals = [ml_eval(params, z, policy) for z in zs]
    ze_vals = [z * e for z, e in zip(zs, e_vals)]
    target = -float(sc.rgamma(params.beta - params.alpha))
    notes: list[str] = []

    e_ok = abs(e_vals[-1]) <= e_abs_tol
    scale = max(abs(target), 1e-12)
    ze_ok = abs(ze_vals[-1] - target) <= ze_rel_tol * scale
    tail = [abs(e) for e in e_vals[len(e_vals) // 2:]]
    mono = all(b <= a * (1.0 + 1e-9) + 1e-300 for a, b in zip(tail, tail[1:]))
    if not mono:
        notes.append("|E| tail not monotonically decreasing over the second half")
    if target == 0.0:
        notes.append("limit of z*E is 0 here (reciprocal gamma pole)")
    return MLLimitReport(
        alpha=params.alpha, beta=params.beta, z_values=zs, e_values=e_vals,
        ze_values=ze_vals, ze_target=target, e_tends_to_zero=e_ok,
        ze_tends_to_target=ze_ok, tail_monotone=mono,
        e_abs_tol=e_abs_tol, ze_rel_tol=ze_rel_tol, notes=notes,
    )
