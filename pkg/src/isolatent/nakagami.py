"""Nakagami distribution machinery and the censored distance log-likelihood.

The Nakagami distribution describes the length of an isotropic Gaussian
vector and is used here to model stochastic curve lengths.  Density:

    g(s) = 2 m^m / (Gamma(m) Omega^m) * s^(2m-1) * exp(-m s^2 / Omega),  s >= 0

with shape m >= 1/2 and spread Omega > 0, and the moment identities

    Omega = E[s^2],    m = Omega^2 / Var(s^2).

The CDF is a regularized lower incomplete gamma, P(m, (m/Omega) s^2), so the
module also provides P(a, x) and its partial derivatives, plus a numerically
stable log-survival used by the censored branch of the likelihood: neighbor
pairs (distance below a threshold eps) contribute their log-density, censored
pairs contribute the log-probability that the length exceeds eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from isolatent.errors import ValidationError

M_MIN = 0.5
M_MAX = 1e4

_MAX_ITER = 2000
_CONV = 1e-16
_TINY = 1e-300


@dataclass(frozen=True)
class NakagamiParams:
    """Shape/spread pair (m, Omega) of one Nakagami distribution."""

    m: float
    omega: float

    def __post_init__(self):
        if not (math.isfinite(self.m) and math.isfinite(self.omega)):
            raise ValidationError(f"non-finite Nakagami parameters ({self.m}, {self.omega})")
        if self.m < M_MIN:
            raise ValidationError(f"Nakagami shape m={self.m} below {M_MIN}")
        if self.omega <= 0:
            raise ValidationError(f"Nakagami spread omega={self.omega} must be positive")


# ---------------------------------------------------------------------------
# Regularized incomplete gamma.


def _check_gamma_args(a, x):
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(a <= 0) or not np.all(np.isfinite(a)):
        raise ValidationError("incomplete gamma requires a > 0")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValidationError("incomplete gamma requires x >= 0")
    return np.broadcast_arrays(a, x)


def _p_series(a, x):
    """Lower-gamma power series, valid (and fast) for x < a + 1."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(a.shape)
    live = x > 0
    if not live.any():
        return out
    av, xv = a[live], x[live]
    ap = av.copy()
    term = 1.0 / av
    total = term.copy()
    for _ in range(_MAX_ITER):
        ap += 1.0
        term = term * (xv / ap)
        total += term
        if np.all(np.abs(term) < np.abs(total) * _CONV):
            break
    else:
        raise ValidationError("incomplete gamma series did not converge")
    out[live] = total * np.exp(-xv + av * np.log(xv) - gammaln(av))
    return out


def _log_q_cf(a, x):
    """log of the regularized upper gamma Q(a, x) via a Lentz continued fraction.

    Requires x > 0; accurate in the region where Q is small (x not far below
    a), which is exactly where log1p(-P) would lose precision.  Working in
    log space keeps the result finite even when Q underflows.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    b = x + 1.0 - a
    c = np.full(a.shape, 1.0 / _TINY)
    d = 1.0 / np.where(np.abs(b) < _TINY, _TINY, b)
    h = d.copy()
    converged = np.zeros(a.shape, dtype=bool)
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = b + an / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(converged, h, h * delta)
        converged |= np.abs(delta - 1.0) < _CONV
        if converged.all():
            break
    else:
        raise ValidationError("incomplete gamma continued fraction did not converge")
    return -x + a * np.log(x) - gammaln(a) + np.log(h)


def reg_lower_incomplete_gamma(a, x):
    """Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).

    Power series for x < a + 1, continued fraction otherwise.  Accepts
    scalars or arrays (broadcast); a > 0, x >= 0.
    """
    a_b, x_b = _check_gamma_args(a, x)
    scalar = a_b.ndim == 0
    a_v = np.atleast_1d(a_b).astype(float)
    x_v = np.atleast_1d(x_b).astype(float)
    out = np.empty(a_v.shape)
    series = x_v < a_v + 1.0
    if series.any():
        out[series] = _p_series(a_v[series], x_v[series])
    if (~series).any():
        out[~series] = -np.expm1(_log_q_cf(a_v[~series], x_v[~series]))
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out.reshape(a_b.shape)


def reg_lower_incomplete_gamma_dx(a, x):
    """Analytic partial dP/dx = x^(a-1) e^(-x) / Gamma(a)."""
    a_b, x_b = _check_gamma_args(a, x)
    scalar = a_b.ndim == 0
    a_v = np.atleast_1d(a_b).astype(float)
    x_v = np.atleast_1d(x_b).astype(float)
    out = np.empty(a_v.shape)
    pos = x_v > 0
    out[pos] = np.exp((a_v[pos] - 1.0) * np.log(x_v[pos]) - x_v[pos] - gammaln(a_v[pos]))
    # at x = 0 the integrand is 0 for a > 1, 1 for a = 1, divergent for a < 1
    at0 = ~pos
    out[at0] = np.where(a_v[at0] > 1.0, 0.0, np.where(a_v[at0] == 1.0, 1.0, np.inf))
    return float(out[0]) if scalar else out.reshape(a_b.shape)


def reg_lower_incomplete_gamma_da(a, x):
    """Numeric partial dP/da by central difference, step 1e-5 * max(1, a)."""
    a_b, x_b = _check_gamma_args(a, x)
    h = 1e-5 * np.maximum(1.0, a_b)
    hi = reg_lower_incomplete_gamma(a_b + h, x_b)
    lo = reg_lower_incomplete_gamma(a_b - h, x_b)
    return (hi - lo) / (2.0 * h)


def log_reg_upper_incomplete_gamma(a, x):
    """log Q(a, x) = log(1 - P(a, x)), numerically stable in both tails.

    Uses log1p(-P) with the series P while P < 0.5 and the continued-fraction
    upper branch once P >= 0.5.
    """
    a_b, x_b = _check_gamma_args(a, x)
    scalar = a_b.ndim == 0
    a_v = np.atleast_1d(a_b).astype(float)
    x_v = np.atleast_1d(x_b).astype(float)
    out = np.zeros(a_v.shape)
    series = x_v < a_v + 1.0
    if series.any():
        p = _p_series(a_v[series], x_v[series])
        small = p < 0.5
        res = np.empty(p.shape)
        res[small] = np.log1p(-p[small])
        if (~small).any():
            res[~small] = _log_q_cf(a_v[series][~small], x_v[series][~small])
        out[series] = res
    if (~series).any():
        out[~series] = _log_q_cf(a_v[~series], x_v[~series])
    return float(out[0]) if scalar else out.reshape(a_b.shape)


def log_reg_upper_incomplete_gamma_da(a, x):
    """Numeric partial d(log Q)/da by central difference, step 1e-5 * max(1, a)."""
    a_b, x_b = _check_gamma_args(a, x)
    h = 1e-5 * np.maximum(1.0, a_b)
    hi = log_reg_upper_incomplete_gamma(a_b + h, x_b)
    lo = log_reg_upper_incomplete_gamma(a_b - h, x_b)
    return (hi - lo) / (2.0 * h)


# ---------------------------------------------------------------------------
# Nakagami density, CDF, survival, sampling, moment estimation.


def _check_params(p: NakagamiParams) -> NakagamiParams:
    if not isinstance(p, NakagamiParams):
        raise ValidationError(f"expected NakagamiParams, got {type(p).__name__}")
    return p


def log_pdf(s, p: NakagamiParams):
    """Log-density log g(s) for s > 0."""
    _check_params(p)
    s_a = np.asarray(s, dtype=float)
    if np.any(s_a <= 0):
        raise ValidationError("Nakagami log_pdf requires s > 0")
    m, omega = p.m, p.omega
    out = (
        math.log(2.0)
        + m * math.log(m)
        - gammaln(m)
        - m * math.log(omega)
        + (2.0 * m - 1.0) * np.log(s_a)
        - (m / omega) * s_a**2
    )
    return float(out) if np.isscalar(s) else out


def cdf(s, p: NakagamiParams):
    """Distribution function G(s) = P(m, (m/Omega) s^2) for s >= 0."""
    _check_params(p)
    s_a = np.asarray(s, dtype=float)
    if np.any(s_a < 0):
        raise ValidationError("Nakagami cdf requires s >= 0")
    out = reg_lower_incomplete_gamma(p.m, (p.m / p.omega) * s_a**2)
    return float(out) if np.isscalar(s) else out


def log_survival(s, p: NakagamiParams):
    """log(1 - G(s)), stable even when the survival probability underflows."""
    _check_params(p)
    s_a = np.asarray(s, dtype=float)
    if np.any(s_a < 0):
        raise ValidationError("Nakagami log_survival requires s >= 0")
    out = log_reg_upper_incomplete_gamma(p.m, (p.m / p.omega) * s_a**2)
    return float(out) if np.isscalar(s) else out


def sample(p: NakagamiParams, n: int, seed: int) -> np.ndarray:
    """Draw n i.i.d. variates; s^2 ~ Gamma(shape=m, scale=Omega/m)."""
    _check_params(p)
    if n < 1:
        raise ValidationError("sample size must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    return np.sqrt(rng.gamma(shape=p.m, scale=p.omega / p.m, size=int(n)))


def estimate_params(mean_sq: float, var_sq: float) -> NakagamiParams:
    """Moment-match (m, Omega) from the mean and variance of s^2.

    Omega = mean(s^2), m = Omega^2 / Var(s^2); m is clamped to
    [0.5, 1e4] (lower bound is the domain of the distribution, upper bound
    keeps m^m representable).
    """
    if not (mean_sq > 0 and math.isfinite(mean_sq)):
        raise ValidationError(f"mean of s^2 must be positive and finite, got {mean_sq}")
    if not (var_sq > 0 and math.isfinite(var_sq)):
        raise ValidationError(f"variance of s^2 must be positive and finite, got {var_sq}")
    m = min(max(mean_sq**2 / var_sq, M_MIN), M_MAX)
    return NakagamiParams(m=m, omega=mean_sq)


def censored_log_likelihood(e, params, eps: float, pairs) -> float:
    """Censored log-likelihood of observed distances for the listed pairs.

    Pairs with e_ij < eps contribute log g(e_ij); pairs with e_ij >= eps
    contribute log(1 - G(eps)).  ``e`` is a DissimilarityMatrix or plain
    square array; ``params`` is a sequence of NakagamiParams matching
    ``pairs`` elementwise.  The reduction keeps the given pair order.
    """
    values = getattr(e, "values", e)
    values = np.asarray(values, dtype=float)
    pairs = list(pairs)
    params = list(params)
    if len(params) != len(pairs):
        raise ValidationError(
            f"got {len(params)} parameter pairs for {len(pairs)} index pairs"
        )
    if not pairs:
        return 0.0
    terms = np.empty(len(pairs))
    for k, ((i, j), p) in enumerate(zip(pairs, params)):
        _check_params(p)
        e_ij = values[i, j]
        if e_ij < eps:
            terms[k] = log_pdf(e_ij, p)
        else:
            terms[k] = log_survival(eps, p)
    return float(np.sum(terms))
