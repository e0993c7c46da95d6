"""Exact second-order law of the bridge dX = -alpha(t) X dt + dW.

Variances, covariances, conditional variances, covariance matrices on time
grids, determinant identities and bounds, Gaussian absolute moments and the
double-integral second moment of the mollified local time.  Everything is
computed by stable quadrature of exp(-c * (A(t) - A(s))) integrands; this
module is the oracle the simulation schemes are verified against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from . import drift
from .errors import DomainError, NumericsError


@dataclass(frozen=True)
class CovarianceMatrix:
    """E(X_{u_i} X_{u_j}) on a strictly increasing grid of positive times."""

    times: np.ndarray
    entries: np.ndarray


@dataclass(frozen=True)
class DetBounds:
    lower: float
    upper: float
    det: float


def variance(spec, t):
    """Var(X_t) = int_0^t exp(-2 (A(t) - A(s))) ds."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    if t == 0:
        return 0.0
    return drift.decay_integral(spec, 0.0, t, 2.0)


def covariance(spec, s, t):
    """E(X_s X_t) = exp(-(A(s v t) - A(s ^ t))) * Var(X_{s ^ t})."""
    if s < 0 or t < 0:
        raise DomainError("times must be nonnegative")
    lo, hi = min(s, t), max(s, t)
    if lo == 0:
        return 0.0
    gap = drift.eval_antiderivative(spec, hi) - drift.eval_antiderivative(spec, lo)
    return math.exp(-gap) * variance(spec, lo)


def conditional_variance(spec, s, t):
    """Var(X_t | X_s) = int_s^t exp(-2 (A(t) - A(r))) dr for 0 <= s <= t."""
    if not 0 <= s <= t:
        raise DomainError(f"need 0 <= s <= t, got s={s}, t={t}")
    if s == t:
        return 0.0
    return drift.decay_integral(spec, s, t, 2.0)


def increment_variance(spec, t1, t2, gamma):
    """E |X_{t2} - X_{t1}|^2 and the modulus bound it is controlled by.

    The variance is computed in the cancellation-free form
    (1 - exp(-dA))^2 Var(lo) + Var(hi | lo); the bound is
    |t2-t1|^(2g) [ (alpha*(hi))^(2g) / alpha(lo) + alpha(hi)^(2g-1) ]
    without its unknown multiplicative constant.  A vanishing alpha(lo)
    (plain Brownian motion) yields bound = inf; the variance is returned
    regardless.
    """
    if t1 <= 0 or t2 <= 0:
        raise DomainError("t1, t2 must be positive")
    if not 0 <= gamma <= 0.5:
        raise DomainError("gamma must lie in [0, 1/2]")
    lo, hi = min(t1, t2), max(t1, t2)
    if lo == hi:
        return 0.0, 0.0
    gap = drift.eval_antiderivative(spec, hi) - drift.eval_antiderivative(spec, lo)
    shrink = -math.expm1(-gap)  # 1 - exp(-gap), stable for small gaps
    var = shrink * shrink * variance(spec, lo) + conditional_variance(spec, lo, hi)

    a_lo = drift.eval_alpha(spec, lo)
    a_hi = drift.eval_alpha(spec, hi)
    a_sup = drift.running_sup(spec, hi)
    dt = hi - lo
    if a_lo == 0.0 or a_hi == 0.0:
        bound = float("inf")
    else:
        bound = dt ** (2 * gamma) * (a_sup ** (2 * gamma) / a_lo + a_hi ** (2 * gamma - 1.0))
    return var, bound


def _validate_grid(times):
    arr = np.asarray(times, dtype=float)
    if arr.ndim != 1 or len(arr) < 1:
        raise DomainError("times must be a nonempty 1-d sequence")
    if arr[0] <= 0:
        raise DomainError("all times must be strictly positive (Var(X_0) = 0 is singular)")
    if np.any(np.diff(arr) <= 0):
        raise DomainError("times must be strictly increasing")
    return arr


def build_cov_matrix(spec, times):
    """Covariance matrix of (X_{u_1}, ..., X_{u_p}) on an increasing grid."""
    u = _validate_grid(times)
    p = len(u)
    var = np.array([variance(spec, t) for t in u])
    a_vals = drift.eval_antiderivative(spec, u)
    entries = np.empty((p, p))
    for i in range(p):
        entries[i, i] = var[i]
        for j in range(i + 1, p):
            c = math.exp(-(a_vals[j] - a_vals[i])) * var[i]
            entries[i, j] = c
            entries[j, i] = c
    return CovarianceMatrix(times=u, entries=entries)


def det_by_conditioning(spec, times):
    """det of the covariance matrix as Var(X_{u_1}) * prod of step conditional variances.

    The process is Markov, so conditioning on the whole past reduces to the
    previous grid point; each factor is an independent quadrature, not a
    by-product of the matrix entries.
    """
    u = _validate_grid(times)
    det = variance(spec, u[0])
    for s, t in zip(u[:-1], u[1:]):
        det *= conditional_variance(spec, s, t)
    return det


def det_bounds(spec, times):
    """Product-of-gaps sandwich for the covariance determinant."""
    u = _validate_grid(times)
    gaps = np.concatenate([[u[0]], np.diff(u)])
    upper = float(np.prod(gaps))
    lower = upper * math.exp(-2.0 * drift.running_sup(spec, u[-1]) * u[-1])
    return DetBounds(lower=lower, upper=upper, det=det_by_conditioning(spec, u))


def lu_det(matrix):
    """Determinant via LU with partial pivoting (LAPACK); the direct route."""
    return float(np.linalg.det(np.asarray(matrix, dtype=float)))


def abs_moment(sigma_sq, m):
    """Moments of a centered Gaussian with variance sigma_sq.

    Even m = 2n: (2n)! sigma^(2n) / (2^n n!).  Odd m: returns the signed
    moment, which is 0 (a centered Gaussian has no odd signed moments;
    absolute odd moments are deliberately not provided).
    """
    if sigma_sq < 0:
        raise DomainError("sigma_sq must be nonnegative")
    m = int(m)
    if m < 1:
        raise DomainError("moment order must be >= 1")
    if m % 2 == 1:
        return 0.0
    n = m // 2
    return math.factorial(2 * n) / (2**n * math.factorial(n)) * sigma_sq**n


class _VarianceTable:
    """Var(X_r) precomputed on a dense grid, monotone-cubic interpolated.

    Built with the exact one-step recursion
    V(r + d) = exp(-2 dA) V(r) + int_r^{r+d} exp(-2 (A(r+d) - A(u))) du
    so every grid value carries quadrature-level accuracy.
    """

    def __init__(self, spec, t, n=4097):
        grid = np.linspace(0.0, t, n)
        steps = drift.decay_integral_steps(spec, grid, 2.0)
        d_a = np.diff(drift.eval_antiderivative(spec, grid))
        decay2 = np.exp(-2.0 * d_a)
        v = np.empty(n)
        v[0] = 0.0
        for k in range(n - 1):
            v[k + 1] = decay2[k] * v[k] + steps[k]
        self._interp = PchipInterpolator(grid, v)

    def __call__(self, r):
        return max(float(self._interp(r)), 0.0)


def _cvar_normalized(spec, r, s):
    """conditional_variance(r, s) / (s - r) by fixed Gauss-Legendre.

    The integration range is truncated at the underflow cutoff first, so the
    panel always sees a resolvable integrand.
    """
    if s <= r:
        return 1.0
    a_s = drift.eval_antiderivative(spec, s)
    cut = max(r, drift._inverse_gap(spec, s, drift._EXP_CUTOFF / 2.0))
    width = s - cut
    u = cut + width * drift._GL_X
    vals = np.exp(-2.0 * (a_s - drift.eval_antiderivative(spec, u)))
    return width * float(vals @ drift._GL_W) / (s - r)


def localtime_second_moment(spec, t, eps, theta):
    """(1/pi) double integral of det(A_{eps,theta}(s, r))^(-1/2) over 0 < r < s < t.

    A_{eps,theta}(s, r) = [[Var(X_s)+theta, Cov(X_r, X_s)],
                           [Cov(X_r, X_s),  Var(X_r)+eps ]].

    theta attaches to the later time s and eps to the earlier r; for
    eps != theta the symmetric product moment E(L_eps L_theta) is the average
    of this value over both assignments (they coincide when eps == theta).

    With eps = theta = 0 the integrand has inverse-square-root singularities
    at r = 0 and r = s; the inner integral substitutes r = s sin^2(phi),
    which absorbs both exactly (for plain Brownian motion the inner integral
    is the Beta(1/2, 1/2) integral).  The determinant is factored as
    det = Var(r) cvar(r, s) + theta Var(r) + eps Var(s) + eps theta, all
    terms nonnegative, and each factor is normalized by its vanishing rate
    so the transformed integrand is smooth and bounded.
    """
    if t <= 0:
        raise DomainError("t must be positive")
    if eps < 0 or theta < 0:
        raise DomainError("smoothing parameters must be nonnegative")

    table = _VarianceTable(spec, t)

    def inner(s):
        v_s = table(s)

        def integrand(phi):
            sin2 = math.sin(phi) ** 2
            r = s * sin2
            s_minus_r = s * (math.cos(phi) ** 2)
            if r <= 0.0 or s_minus_r <= 0.0:
                return 0.0
            v_r = table(r)
            g = (v_r / r) * _cvar_normalized(spec, r, s)
            extra = theta * v_r + eps * v_s + eps * theta
            if extra > 0.0:
                g += extra / (r * s_minus_r)
            if not math.isfinite(g) or g <= 0.0:
                return 0.0
            return 2.0 / math.sqrt(g)

        res = integrate.quad(
            integrand, 0.0, math.pi / 2.0, epsabs=1e-10, epsrel=1e-8, limit=200, full_output=1
        )
        if len(res) > 3:
            raise NumericsError(
                f"inner local-time quadrature failed at s={s}: {res[3]}",
                estimate=res[0],
                achieved_tol=res[1],
            )
        return res[0]

    res = integrate.quad(inner, 0.0, t, epsabs=1e-9, epsrel=1e-7, limit=200, full_output=1)
    if len(res) > 3:
        raise NumericsError(
            f"outer local-time quadrature failed: {res[3]}",
            estimate=res[0] / math.pi,
            achieved_tol=res[1],
        )
    return res[0] / math.pi
