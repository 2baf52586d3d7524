"""
Discrete estimators of fractional Sobolev, Besov and Holder norms on a
uniform grid. Double sums run over shifts k = 1..n-1 in increasing order.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np
from scipy import fft

from .core_model import SampledFn, finite_diff
from .general import PreconditionError, _require, trapezoid_weights

logger = logging.getLogger(__name__)

BOUNDARY_TOL = 1e-8

class NormKind(enum.Enum):
    GAGLIARDO = 'gagliardo'
    BESOV = 'besov'
    HOLDER = 'holder'
    SOBOLEV_SPECTRAL = 'sobolev_spectral'
    PENALTY = 'penalty'

@dataclass(frozen=True)
class NormReport:
    value: float
    grid_n: int
    kind: NormKind

def _weights(f):
    return trapezoid_weights(f.grid.n, f.grid.spacing)

def lp_norm(f, p=2.):
    """Trapezoid L^p norm."""
    _require(p >= 1, 'p must be >= 1')
    return float(np.sum(np.abs(f.values) ** p * _weights(f)) ** (1. / p))

def sup_norm(f):
    return float(np.max(np.abs(f.values)))

def gagliardo_seminorm(f, s, p):
    """
    Sobolev-Slobodeckij seminorm

        (sum_{i != j} |f_i - f_j|^p / |x_i - x_j|^(1 + s p) w_i w_j)^(1/p)

    with trapezoid weights w. O(n^2); keep n around 1024 or below.
    """
    _require(0 < s < 1, 's must lie in (0, 1), got {}'.format(s))
    _require(p >= 1, 'p must be >= 1, got {}'.format(p))
    v, w, h = f.values, _weights(f), f.grid.spacing
    total = 0.
    for k in range(1, f.grid.n):
        diff = np.abs(v[k:] - v[:-k]) ** p
        total += np.dot(diff, w[k:] * w[:-k]) / (k * h) ** (1. + s * p)
    return NormReport(float((2. * total) ** (1. / p)), f.grid.n,
                      NormKind.GAGLIARDO)

def besov_increment(f, alpha, p):
    """sup_h h^(-alpha) ||f(. + h) - f||_{L^p(a, b - h)} over grid shifts."""
    v, h, n = f.values, f.grid.spacing, f.grid.n
    best = 0.
    for k in range(1, n):
        w = trapezoid_weights(n - k, h)
        mod = np.sum(np.abs(v[k:] - v[:-k]) ** p * w) ** (1. / p)
        best = max(best, mod / (k * h) ** alpha)
    return float(best)

def besov_norm(f, alpha, p):
    """
    Besov B^alpha_{p, inf} norm: the increment modulus plus the L^p norm.

    Parameters
    ----------
    f : SampledFn

    alpha : float
        Smoothness in (0, 1).

    p : float
        Integrability, at least 1.

    Returns
    -------
    report : NormReport

    """
    _require(0 < alpha < 1, 'alpha must lie in (0, 1), got {}'.format(alpha))
    _require(p >= 1, 'p must be >= 1, got {}'.format(p))
    value = besov_increment(f, alpha, p) + lp_norm(f, p)
    return NormReport(value, f.grid.n, NormKind.BESOV)

def holder_seminorm(f, alpha):
    """Largest |f_i - f_j| / |x_i - x_j|^alpha over all grid pairs."""
    _require(0 < alpha <= 1, 'alpha must lie in (0, 1], got {}'.format(alpha))
    v, h = f.values, f.grid.spacing
    best = 0.
    for k in range(1, f.grid.n):
        best = max(best, float(np.max(np.abs(v[k:] - v[:-k]))) /
                   (k * h) ** alpha)
    return NormReport(best, f.grid.n, NormKind.HOLDER)

def holder_norm(f, beta):
    """C^{0,beta} norm max(2 sup|f|, [f]_beta)."""
    return max(2. * sup_norm(f), holder_seminorm(f, beta).value)

def holder_interpolation_gap(f, g, alpha, eps):
    """
    Both sides of the Holder interpolation inequality for u = f - g.

    With beta = alpha - eps and theta = beta / alpha,

        lhs = ||u||_{C^{0,beta}}
        rhs = (2 sup|u|)^(1 - theta) * ||u||_{C^{0,alpha}}^theta

    where ||u||_{C^{0,b}} = max(2 sup|u|, [u]_b). lhs <= rhs holds pairwise
    on the grid, so it holds for the discrete estimators exactly.
    """
    _require(f.grid == g.grid, 'functions live on different grids')
    _require(0 < alpha <= 1, 'alpha must lie in (0, 1]')
    _require(0 < eps < alpha, 'eps must lie in (0, alpha), got {}'.format(eps))
    u = f.with_values(f.values - g.values)
    beta = alpha - eps
    theta = beta / alpha
    lhs = holder_norm(u, beta)
    rhs = (2. * sup_norm(u)) ** (1. - theta) * holder_norm(u, alpha) ** theta
    return lhs, rhs

def sobolev_embedding_q(d, s, p):
    """Critical exponent q = d p / (d - s p) of W^{s,p} into L^q."""
    _require(int(d) == d and d >= 1, 'd must be a positive integer')
    _require(0 < s < 1, 's must lie in (0, 1)')
    _require(1 <= p < np.inf, 'p must lie in [1, inf)')
    if s * p >= d:
        raise PreconditionError('s*p = {} >= d = {}: no Lebesgue embedding of '
                                'this form'.format(s * p, d))
    return d * p / (d - s * p)

def anisotropic_penalty(alpha):
    """Trapezoid quadrature of |alpha'|^2 / alpha^(5/2)."""
    grid = alpha.grid
    da = finite_diff(SampledFn(grid, alpha.alpha)).values
    w = trapezoid_weights(grid.n, grid.spacing)
    value = float(np.sum(da ** 2 / alpha.alpha ** 2.5 * w))
    return NormReport(value, grid.n, NormKind.PENALTY)

def sine_transform(f):
    """
    Coefficients of f in the orthonormal basis sqrt(2/l) sin(k pi (x-a)/l),
    k = 1..n-2, with the eigenvalues k pi / l of the basis.
    """
    grid = f.grid
    _require(grid.n >= 3, 'sine transform needs at least 3 points')
    if max(abs(f.values[0]), abs(f.values[-1])) > BOUNDARY_TOL:
        raise PreconditionError('function must vanish at both endpoints, got '
                                '{:.3g} and {:.3g}'.format(f.values[0],
                                                           f.values[-1]))
    coeffs = (grid.spacing * fft.dst(f.values[1:-1], type=1) /
              np.sqrt(2. * grid.length))
    modes = np.arange(1, grid.n - 1) * np.pi / grid.length
    return coeffs, modes

def inverse_sine_transform(coeffs, grid):
    interior = fft.idst(np.asarray(coeffs) * np.sqrt(2. * grid.length) /
                        grid.spacing, type=1)
    return np.concatenate([[0.], interior, [0.]])

def sobolev_norm_spectral(f, s):
    """
    Bessel-potential norm (sum_k (1 + lambda_k^2)^s |f_k|^2)^(1/2) over the
    sine coefficients of f.

    Parameters
    ----------
    f : SampledFn
        Must vanish at both endpoints within 1e-8.

    s : float
        Smoothness, s >= 0.

    Returns
    -------
    report : NormReport

    """
    _require(s >= 0, 's must be >= 0, got {}'.format(s))
    coeffs, modes = sine_transform(f)
    value = np.sqrt(np.sum((1. + modes ** 2) ** s * coeffs ** 2))
    return NormReport(float(value), f.grid.n, NormKind.SOBOLEV_SPECTRAL)
