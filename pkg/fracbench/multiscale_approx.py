"""
Haar multiresolution analysis, adaptive thresholding driven by an order
field, the associated error bounds, the order-adapted partition and local
order estimation from samples.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np
import pywt
from scipy import ndimage

from .core_model import Grid1D, SampledFn, order_field
from .function_spaces import anisotropic_penalty
from .general import PreconditionError, _require

logger = logging.getLogger(__name__)

ORDER_CLIP = (0.05, 0.95)

@dataclass(frozen=True, eq=False)
class WaveletCoeffs:
    """
    Orthonormal Haar coefficients of samples on a grid of 2^J points.

    detail[j] holds the 2^j coefficients of level j; coefficient k of level j
    is supported on sample indices [k 2^(J-j), (k+1) 2^(J-j)).
    """
    grid: Grid1D
    levels: int
    scaling_coeff: float
    detail: Tuple[np.ndarray, ...]

    @property
    def n_coeffs(self):
        return 1 + sum(len(d) for d in self.detail)

    def energy(self):
        return self.scaling_coeff ** 2 + sum(float(np.sum(d ** 2))
                                             for d in self.detail)

def _levels(n):
    J = int(round(math.log2(n))) if n > 0 else 0
    if J < 1 or 2 ** J != n:
        raise PreconditionError('Haar analysis needs 2^J points with J >= 1, '
                                'got {}'.format(n))
    return J

def haar_decompose(f):
    """Full-depth Haar transform scaled so that sum c^2 = spacing * sum f^2."""
    J = _levels(f.grid.n)
    coeffs = pywt.wavedec(np.array(f.values), 'haar', mode='periodization', level=J)
    r = np.sqrt(f.grid.spacing)
    detail = tuple(np.asarray(c) * r for c in coeffs[1:])
    return WaveletCoeffs(f.grid, J, float(coeffs[0][0] * r), detail)

def haar_reconstruct(c):
    r = np.sqrt(c.grid.spacing)
    coeffs = [np.array([c.scaling_coeff / r])] + [d / r for d in c.detail]
    values = pywt.waverec(coeffs, 'haar', mode='periodization')
    return SampledFn(c.grid, values)

def _min_over_supports(alpha, J):
    return tuple(alpha.reshape(2 ** j, 2 ** (J - j)).min(axis=1)
                 for j in range(J))

def _smoothness_index(beta):
    # The offset keeps ceil from overshooting when 1/(2 beta) is an integer
    # up to rounding.
    return np.ceil(1. / (2. * beta) - 1e-9).astype(int)

@dataclass(frozen=True, eq=False)
class ThresholdPlan:
    """
    Retention thresholds for every Haar detail coefficient.

    Per-level arrays (beta_j, N_j, eps_j, tau_j) use the minimum order over
    the level; the per-coefficient arrays use the minimum over each support
    and drive the thresholding.
    """
    levels: int
    beta_j: np.ndarray
    N_j: np.ndarray
    eps_j: np.ndarray
    tau_j: np.ndarray
    beta_jk: Tuple[np.ndarray, ...]
    N_jk: Tuple[np.ndarray, ...]
    tau_jk: Tuple[np.ndarray, ...]

    def scaled(self, factor):
        """The same plan with every threshold multiplied by factor."""
        _require(factor >= 0, 'threshold factor must be >= 0')
        return replace(self, tau_j=self.tau_j * factor,
                       tau_jk=tuple(t * factor for t in self.tau_jk))

def threshold_plan(alpha, eps=0.):
    """
    Thresholds tau = 2^(-j beta N) with beta the minimum order over each
    support and N = ceil(1 / (2 beta)).

    Parameters
    ----------
    alpha : OrderField
        Order field on a grid of 2^J points.

    eps : float
        Bound slack, 0 <= eps < 2 N_j on every level.

    Returns
    -------
    plan : ThresholdPlan

    """
    _require(eps >= 0, 'eps must be >= 0, got {}'.format(eps))
    J = _levels(alpha.grid.n)
    beta_jk = _min_over_supports(alpha.alpha, J)
    N_jk = tuple(_smoothness_index(b) for b in beta_jk)
    tau_jk = tuple(2. ** (-j * b * N) for j, (b, N) in
                   enumerate(zip(beta_jk, N_jk)))
    beta_j = np.array([b.min() for b in beta_jk])
    N_j = _smoothness_index(beta_j)
    j = np.arange(J)
    tau_j = 2. ** (-j * beta_j * N_j)
    _require(np.all(eps < 2 * N_j), 'eps must stay below 2 N_j on every level')
    return ThresholdPlan(J, beta_j, N_j, np.full(J, float(eps)), tau_j,
                         beta_jk, N_jk, tau_jk)

def adaptive_approx(f, plan):
    """
    Zero every detail coefficient below its threshold and reconstruct.

    Returns
    -------
    approx : SampledFn
        The thresholded reconstruction.

    retained : int
        Kept detail coefficients plus the scaling coefficient.

    error : float
        L2 error from the discarded energy, (sum of discarded c^2)^(1/2).

    """
    c = haar_decompose(f)
    _require(plan.levels == c.levels, 'plan has {} levels but the function '
             'has {}'.format(plan.levels, c.levels))
    kept, discarded, retained = [], 0., 1
    for d, tau in zip(c.detail, plan.tau_jk):
        keep = np.abs(d) >= tau
        discarded += float(np.sum(d[~keep] ** 2))
        retained += int(keep.sum())
        kept.append(np.where(keep, d, 0.))
    approx = haar_reconstruct(replace(c, detail=tuple(kept)))
    logger.debug('kept %d of %d Haar coefficients', retained, c.n_coeffs)
    return approx, retained, float(np.sqrt(discarded))

def error_bound_thm2(plan, alpha):
    """sum_j 2^(-j beta_j (2 N_j - eps_j)) plus the anisotropic penalty."""
    j = np.arange(plan.levels)
    terms = 2. ** (-j * plan.beta_j * (2 * plan.N_j - plan.eps_j))
    return float(np.sum(terms)) + anisotropic_penalty(alpha).value

def error_bound_thm1(n, beta, N, eps, alpha):
    """n^(-beta (2 N - eps)) plus the anisotropic penalty."""
    _require(n >= 1, 'n must be >= 1')
    _require(beta > 0, 'beta must be positive')
    _require(N >= 1, 'N must be >= 1')
    _require(0 <= eps < 2 * N, 'eps must lie in [0, 2N)')
    return float(n) ** (-beta * (2 * N - eps)) + anisotropic_penalty(alpha).value

def fit_bound_constant(errors, bounds):
    """Smallest C with error <= C * bound for every pair."""
    errors = np.asarray(errors, dtype=float)
    bounds = np.asarray(bounds, dtype=float)
    _require(np.all(bounds > 0), 'bounds must be positive')
    return float(np.max(errors / bounds))

def partition_domain(alpha, n, beta):
    """
    Greedy left-to-right partition with cell width near n^(-beta/alpha).

    At each step the target width t is taken at the left end of the cell and
    the remaining length is split into round(remaining / t) equal parts, of
    which one is cut off. A constant order gives the uniform partition.

    Returns
    -------
    cells : list of (left, right) tuples
        Consecutive cells sharing endpoints; the last one ends at b.

    """
    _require(n >= 2, 'n must be >= 2')
    _require(beta > 0, 'beta must be positive')
    a, b = alpha.grid.a, alpha.grid.b
    cells = []
    left = a
    while True:
        t = float(n) ** (-beta / float(alpha.at(left)))
        rem = b - left
        m = max(1, int(round(rem / t)))
        if m == 1:
            cells.append((left, b))
            break
        width = min(max(rem / m, 0.5 * t), 2. * t)
        right = left + width
        cells.append((left, right))
        left = right
    logger.debug('partitioned [%g, %g] into %d cells', a, b, len(cells))
    return cells

def _dyadic_radii(window):
    radii = [1]
    while radii[-1] * 2 <= window:
        radii.append(radii[-1] * 2)
    return np.array(radii)

def local_order_estimate(f, window):
    """
    Pointwise Holder order from the growth of local oscillation.

    osc(x, r) = max - min of f over the r-neighbourhood in grid points is
    taken for dyadic radii r <= window. The increments osc(2r) - osc(r) are
    regressed against r on a log-log scale; the increments remove the offset
    of a singularity sitting between nodes. Only radii whose full window
    fits inside the grid are used; points with fewer than two usable
    increments, and flat signals, give the upper clip. Slopes are clipped
    to [0.05, 0.95].

    Parameters
    ----------
    f : SampledFn

    window : int
        Largest radius in grid points, 4 <= window <= n/4.

    Returns
    -------
    alpha : OrderField
        Bounds are the clip interval.

    """
    n = f.grid.n
    _require(int(window) == window and 4 <= window <= n / 4.,
             'window must be an integer in [4, n/4], got {}'.format(window))
    radii = _dyadic_radii(int(window))
    osc = np.array([ndimage.maximum_filter1d(f.values, 2 * r + 1,
                                             mode='nearest') -
                    ndimage.minimum_filter1d(f.values, 2 * r + 1,
                                             mode='nearest')
                    for r in radii])
    incr = osc[1:] - osc[:-1]
    x = np.log(radii[:-1].astype(float))[:, None]
    i = np.arange(n)
    reach = np.minimum(i, n - 1 - i)
    # An increment counts only where its larger window fits inside the grid.
    use = (incr > 0) & (radii[1:, None] <= reach[None, :])
    y = np.where(use, np.log(np.where(use, incr, 1.)), 0.)
    cnt = use.sum(axis=0)
    sx = np.sum(use * x, axis=0)
    sy = np.sum(y, axis=0)
    sxx = np.sum(use * x ** 2, axis=0)
    sxy = np.sum(use * x * y, axis=0)
    denom = cnt * sxx - sx ** 2
    lo, hi = ORDER_CLIP
    slope = np.full(n, hi)
    ok = (cnt >= 2) & (denom > 0)
    slope[ok] = (cnt[ok] * sxy[ok] - sx[ok] * sy[ok]) / denom[ok]
    est = np.clip(slope, lo, hi)
    return order_field(f.grid, est, lo, hi)
