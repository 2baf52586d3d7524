"""
Spectral fractional Poisson problem (-Laplacian)^alpha u = f on an interval
with homogeneous Dirichlet data, solved in the Dirichlet sine eigenbasis.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core_model import Grid1D, SampledFn
from .function_spaces import (inverse_sine_transform, lp_norm, sine_transform,
                              sobolev_norm_spectral)
from .general import PreconditionError, _require, substream

logger = logging.getLogger(__name__)

@dataclass(frozen=True, eq=False)
class SpectralField:
    """Sine coefficients for modes k = 1..K with K = grid.n - 2."""
    grid: Grid1D
    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=float)
        _require(coeffs.shape == (self.grid.n - 2,),
                 'expected {} sine modes'.format(self.grid.n - 2))
        _require(np.all(np.isfinite(coeffs)), 'coefficients must be finite')
        object.__setattr__(self, 'coefficients', coeffs)

    @property
    def wavenumbers(self):
        return np.arange(1, self.grid.n - 1) * np.pi / self.grid.length

    def to_function(self):
        return SampledFn(self.grid, inverse_sine_transform(self.coefficients,
                                                           self.grid))

def sine_coefficients(f):
    coeffs, _ = sine_transform(f)
    return SpectralField(f.grid, coeffs)

def _check_order(alpha):
    _require(0 < alpha <= 1, 'alpha must lie in (0, 1], got {}'.format(alpha))

def solve_frac_poisson(f, alpha):
    """
    Solve (-Laplacian)^alpha u = f with u = 0 at both ends.

    Parameters
    ----------
    f : SampledFn
        Right-hand side; must vanish at the endpoints within 1e-8.

    alpha : float
        Order in (0, 1]. alpha = 1 is the classical Poisson problem.

    Returns
    -------
    u : SampledFn

    """
    _check_order(alpha)
    fh = sine_coefficients(f)
    uh = SpectralField(f.grid, fh.coefficients / fh.wavenumbers ** (2. * alpha))
    return uh.to_function()

def spectral_residual(u, f, alpha):
    """Relative coefficient-space residual of (-Laplacian)^alpha u = f."""
    _check_order(alpha)
    uh = sine_coefficients(u)
    fh = sine_coefficients(f)
    denom = np.linalg.norm(fh.coefficients)
    if denom == 0:
        raise PreconditionError('right-hand side is zero')
    r = uh.wavenumbers ** (2. * alpha) * uh.coefficients - fh.coefficients
    return float(np.linalg.norm(r) / denom)

def regularity_ratio(f, alpha):
    """||u||_{H^{2 alpha}} / ||f||_{L^2} for the spectral solution u."""
    _check_order(alpha)
    denom = lp_norm(f, 2.)
    if denom == 0:
        raise PreconditionError('right-hand side is zero')
    u = solve_frac_poisson(f, alpha)
    ratio = sobolev_norm_spectral(u, 2. * alpha).value / denom
    logger.debug('regularity ratio at alpha=%g: %.10g', alpha, ratio)
    return ratio

def mode_ratio_bound(alpha, length=1.):
    """Closed-form supremum (1 + l1^2)^alpha / l1^(2 alpha), l1 = pi / length."""
    lam = np.pi / length
    return float((1. + lam ** 2) ** alpha / lam ** (2. * alpha))

def band_limited(grid, modes, seed):
    """Random combination of the first `modes` sine modes."""
    _require(1 <= modes <= grid.n - 2, 'modes must lie in [1, n-2]')
    rng = substream(seed, 0)
    coeffs = np.zeros(grid.n - 2)
    coeffs[:modes] = rng.standard_normal(modes)
    return SpectralField(grid, coeffs).to_function()
