"""
Alpha-stable sampling, stable subordinators and the Levy-regularized
Hadamard kernel.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .general import (FitError, _require, chunked_draw, loglog_fit,
                      substream)

logger = logging.getLogger(__name__)

# Floor on the subordinator value inside the kernel's log factor.
S_MIN = 1e-8
# Upper cut-off of the Levy measure for the literal quadrature reading.
S_MAX = 1e3

@dataclass(frozen=True)
class StableParams:
    """Stable law S(stability, skew, scale, location) in the S1 parametrization."""
    stability: float
    skew: float = 0.
    scale: float = 1.
    location: float = 0.

    def __post_init__(self):
        _require(0 < self.stability <= 2,
                 'stability must lie in (0, 2], got {}'.format(self.stability))
        _require(-1 <= self.skew <= 1,
                 'skew must lie in [-1, 1], got {}'.format(self.skew))
        _require(self.scale > 0, 'scale must be positive')
        _require(np.isfinite(self.location), 'location must be finite')

@dataclass(frozen=True, eq=False)
class SubordinatorPath:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        _require(self.times.shape == self.values.shape,
                 'times and values must have equal lengths')
        _require(self.times[0] == 0 and self.values[0] == 0,
                 'paths start at the origin')
        _require(np.all(np.diff(self.values) >= 0), 'path must be nondecreasing')

@dataclass(frozen=True)
class KernelEstimate:
    mean: float
    stderr: float
    n_samples: int

def stable_draws(rng, params, size):
    """
    Chambers-Mallows-Stuck draws of S(stability, skew, scale, location).

    Parameters
    ----------
    rng : numpy.random.Generator
        Source of the uniform angle and the exponential variate.

    params : StableParams

    size : int

    Returns
    -------
    x : numpy.ndarray

    """
    a, b = params.stability, params.skew
    V = rng.uniform(-np.pi / 2, np.pi / 2, size)
    W = rng.standard_exponential(size)
    if a == 2:
        # Normal with variance 2 * scale**2.
        return params.location + params.scale * 2. * np.sqrt(W) * np.sin(V)
    if a == 1:
        half = np.pi / 2
        X = ((half + b * V) * np.tan(V) -
             b * np.log(half * W * np.cos(V) / (half + b * V))) / half
        return (params.scale * X + params.location +
                b * params.scale * np.log(params.scale) / half)
    t = b * np.tan(np.pi * a / 2)
    B = np.arctan(t) / a
    S = (1 + t * t) ** (1 / (2 * a))
    core = np.maximum(np.cos(V - a * (V + B)), 0.)
    X = (S * np.sin(a * (V + B)) / np.cos(V) ** (1 / a) *
         (core / W) ** ((1 - a) / a))
    return params.scale * X + params.location

def sample_stable(params, n, seed, workers=1):
    """n i.i.d. stable draws; bit-identical for any number of workers."""
    _require(n >= 1, 'n must be >= 1')
    return chunked_draw(lambda rng, size: stable_draws(rng, params, size),
                        n, seed, workers)

def _check_gamma(gamma):
    _require(0 < gamma < 1, 'subordinator index must lie in (0, 1), got '
             '{}'.format(gamma))

def sample_subordinator(gamma, t_end, n_steps, seed):
    """
    Path of the gamma-stable subordinator on [0, t_end].

    Increments over a step dt are dt^(1/gamma) times a totally skewed
    gamma-stable variable, which is supported on [0, inf).
    """
    _check_gamma(gamma)
    _require(t_end > 0, 't_end must be positive')
    _require(n_steps >= 1, 'n_steps must be >= 1')
    times = np.linspace(0., t_end, n_steps + 1)
    dt = t_end / n_steps
    S = stable_draws(substream(seed, 0), StableParams(gamma, 1.), n_steps)
    increments = dt ** (1. / gamma) * np.maximum(S, 0.)
    values = np.concatenate([[0.], np.cumsum(increments)])
    return SubordinatorPath(times, values)

def stable_subordinator_values(gamma, t, n, seed, workers=1):
    """n independent draws of the subordinator value L_t."""
    _check_gamma(gamma)
    _require(t > 0, 't must be positive')
    S = sample_stable(StableParams(gamma, 1.), n, seed, workers)
    return t ** (1. / gamma) * np.maximum(S, 0.)

def hill_estimator(samples, fraction=0.01):
    """Hill tail index from the top `fraction` of |samples|."""
    x = np.sort(np.abs(np.asarray(samples, dtype=float)))[::-1]
    k = int(fraction * len(x))
    _require(1 <= k < len(x), 'fraction leaves no order statistics')
    return 1. / np.mean(np.log(x[:k] / x[k]))

def _kernel_samples(z, alpha, gamma, t, n_mc, seed, workers):
    L = np.maximum(stable_subordinator_values(gamma, t, n_mc, seed, workers),
                   S_MIN)
    return np.log1p(abs(z) + L) ** (-alpha)

def _literal_kernel(z, alpha, gamma):
    def integrand(u):
        s = np.exp(u)
        return np.log1p(abs(z) + s) ** (-alpha) * s ** (-gamma)

    value, err = integrate.quad(integrand, np.log(S_MIN), np.log(S_MAX),
                                limit=200)
    return KernelEstimate(float(value), float(err), 1)

def hadamard_kernel(z, alpha, gamma, t, n_mc, seed, literal=False, workers=1):
    """
    Levy-regularized Hadamard kernel E[(ln(1 + |z| + L_t))^(-alpha)].

    Parameters
    ----------
    z : float
        Kernel argument.

    alpha : float
        Log exponent in [0, 1). Zero gives the constant integrand 1.

    gamma : float
        Subordinator index in (0, 1).

    t : float
        Subordinator time.

    n_mc : int
        Monte Carlo sample count, at least 100.

    seed : int

    literal : bool
        Integrate (ln(1 + |z| + s))^(-alpha) against the Levy density
        s^(-1-gamma) on [S_MIN, S_MAX] by quadrature instead. The result
        does not depend on t.

    workers : int
        Sampling threads.

    Returns
    -------
    est : KernelEstimate

    """
    _require(0 <= alpha < 1, 'alpha must lie in [0, 1), got {}'.format(alpha))
    _check_gamma(gamma)
    _require(t > 0, 't must be positive')
    if literal:
        return _literal_kernel(z, alpha, gamma)
    _require(n_mc >= 100, 'n_mc must be >= 100, got {}'.format(n_mc))
    vals = _kernel_samples(z, alpha, gamma, t, n_mc, seed, workers)
    est = KernelEstimate(float(vals.mean()),
                         float(vals.std(ddof=1) / np.sqrt(n_mc)), int(n_mc))
    logger.debug('kernel z=%g t=%g: %.6g +- %.2g', z, t, est.mean, est.stderr)
    return est

def fit_loglog_slope(t, v):
    """Least-squares slope of log v against log t."""
    slope, _ = loglog_fit(t, v)
    return slope

def variance_scaling_fit(alpha, gamma, t_grid, n_mc, seed, workers=1):
    """
    Slope of log Var[kernel sample at z = 1] against log t.

    alpha may exceed 1 here; the fit is exploratory.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    _require(t_grid.ndim == 1 and len(t_grid) >= 4,
             't_grid needs at least 4 entries')
    _require(np.all(t_grid > 0) and np.all(np.diff(t_grid) > 0),
             't_grid must be positive and increasing')
    _require(alpha > 0, 'alpha must be positive')
    _check_gamma(gamma)
    _require(n_mc >= 100, 'n_mc must be >= 100')
    variances = np.array([
        _kernel_samples(1., alpha, gamma, t, n_mc, seed, workers).var(ddof=1)
        for t in t_grid])
    if np.ptp(variances) == 0:
        raise FitError('kernel variance is the same at every t')
    slope = fit_loglog_slope(t_grid, variances)
    logger.info('variance scaling alpha=%g gamma=%g: slope %.4f vs %.4f',
                alpha, gamma, slope, 2. / alpha - 1.)
    return slope
