"""
Variable-order Riemann-Liouville and Caputo derivatives on uniform grids.

Every memory integral is evaluated with the product trapezoid rule: the
integrand's smooth factor is interpolated linearly on each cell and the
singular factor (x - t)^(-alpha) is integrated exactly against it. The order
is frozen at the evaluation point, so each row of a variable-order operator
has its own weights.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import gamma

from .core_model import SampledFn, finite_diff
from .general import PreconditionError, _require, trapezoid_weights

logger = logging.getLogger(__name__)

class DerivKind(enum.Enum):
    RL_CLASSICAL = 'rl_classical'
    RL_TRUNCATED = 'rl_truncated'
    CAPUTO_LEFT = 'caputo_left'
    CAPUTO_RIGHT = 'caputo_right'

@dataclass(frozen=True)
class DerivVariant:
    """Which derivative to take, with its base point or truncation window."""
    kind: DerivKind
    base: Optional[float] = None
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.kind is DerivKind.RL_TRUNCATED:
            _require(self.epsilon is not None and self.epsilon > 0,
                     'truncated RL needs epsilon > 0')

    @classmethod
    def rl_classical(cls, base=None):
        return cls(DerivKind.RL_CLASSICAL, base=base)

    @classmethod
    def rl_truncated(cls, epsilon):
        return cls(DerivKind.RL_TRUNCATED, epsilon=epsilon)

    @classmethod
    def caputo_left(cls, base=None):
        return cls(DerivKind.CAPUTO_LEFT, base=base)

    @classmethod
    def caputo_right(cls):
        return cls(DerivKind.CAPUTO_RIGHT)

    @property
    def is_rl(self):
        return self.kind in (DerivKind.RL_CLASSICAL, DerivKind.RL_TRUNCATED)

def _check_pair(f, alpha):
    _require(f.grid == alpha.grid, 'function and order field live on '
             'different grids')
    _require(np.all((alpha.alpha > 0) & (alpha.alpha < 1)),
             'orders must lie in (0, 1)')

def _check_base(grid, base):
    if base is not None and abs(base - grid.a) > 1e-12 * max(1., abs(grid.a)):
        raise PreconditionError('base point {} must equal the left grid '
                                'endpoint {}'.format(base, grid.a))

def _diff_power(d, lam, p):
    """(d + lam)^p - d^p without cancellation; d may be zero."""
    d = np.asarray(d, dtype=float)
    out = np.empty_like(d)
    zero = d == 0
    out[zero] = lam ** p
    dz = d[~zero]
    out[~zero] = dz ** p * np.expm1(p * np.log1p(lam / dz))
    return out

@lru_cache(maxsize=64)
def _cell_tables(alpha, m):
    """
    Cell weights for distances d = 0..m-1 measured in grid steps.

    P[d] multiplies the far node of the cell [d, d+1] and Q[d] the near one,
    both in units of h^(1 - alpha).
    """
    p1, p2 = 1. - alpha, 2. - alpha
    d = np.arange(m, dtype=float)
    F = _diff_power(d, 1., p1)
    G = _diff_power(d, 1., p2)
    P = G / p2 - d * F / p1
    Q = F / p1 - P
    P.setflags(write=False)
    Q.setflags(write=False)
    return P, Q

def _memory_sum(g, j, alpha, h):
    """int_{x_0}^{x_j} g(t) (x_j - t)^(-alpha) dt by product trapezoid."""
    if j == 0:
        return 0.
    P, Q = _cell_tables(float(alpha), len(g))
    w = Q[:j + 1].copy()
    w[1:] += P[:j]
    w[j] = P[j - 1]
    return h ** (1. - alpha) * np.dot(w, g[j::-1])

@lru_cache(maxsize=64)
def _window_weights(alpha, r):
    """
    Node weights of int_{x-r h}^{x} g(t) (x - t)^(-alpha) dt in units of
    h^(1 - alpha), for a window of r >= 2 steps. The last two entries carry
    the partial cell, whose far end is interpolated between nodes M and M+1.
    """
    M = int(np.floor(r + 1e-12))
    lam = r - M
    if lam < 1e-12:
        lam = 0.
    P, Q = _cell_tables(alpha, M)
    w = np.zeros(M + 2)
    w[:M] += Q
    w[1:M + 1] += P
    if lam > 0:
        p1, p2 = 1. - alpha, 2. - alpha
        F = _diff_power(np.array([M], dtype=float), lam, p1)[0]
        G = _diff_power(np.array([M], dtype=float), lam, p2)[0]
        P_lam = (G / p2 - M * F / p1) / lam
        Q_lam = F / p1 - P_lam
        w[M] += Q_lam + P_lam * (1. - lam)
        w[M + 1] += P_lam * lam
    w.setflags(write=False)
    return w

def _window_sum(g, j, alpha, h, r):
    """Truncated memory integral at node j; None if the window is clipped."""
    w = _window_weights(float(alpha), float(r))
    k = len(w) - 1
    if w[-1] == 0:
        k -= 1
    if j - k < 0:
        return None
    return h ** (1. - alpha) * np.dot(w[:k + 1], g[j::-1][:k + 1])

def _outer_derivative(inner, i, n, h):
    """d/dx of an inner integral known at nodes i-1, i, i+1 (or one side)."""
    if i == 0:
        return (-3. * inner(0) + 4. * inner(1) - inner(2)) / (2. * h)
    if i == n - 1:
        return (3. * inner(n - 1) - 4. * inner(n - 2) + inner(n - 3)) / (2. * h)
    return (inner(i + 1) - inner(i - 1)) / (2. * h)

def caputo_left(f, alpha, a=None):
    """
    Left Caputo derivative with base point a (the left grid endpoint).

    Parameters
    ----------
    f : SampledFn
        Function samples.

    alpha : OrderField
        Order field on the same grid.

    a : float
        Base point. Must equal the left grid endpoint.

    Returns
    -------
    d : SampledFn
        (1/Gamma(1 - alpha(x))) int_a^x f'(t) (x - t)^(-alpha(x)) dt.

    """
    _check_pair(f, alpha)
    _check_base(f.grid, a)
    g = finite_diff(f).values
    h = f.grid.spacing
    out = np.array([_memory_sum(g, i, al, h) for i, al in
                    enumerate(alpha.alpha)])
    return f.with_values(out / gamma(1. - alpha.alpha))

def caputo_right(f, alpha):
    """Right Caputo derivative with the upper limit at the right endpoint."""
    _check_pair(f, alpha)
    g = finite_diff(f).values[::-1]
    h = f.grid.spacing
    al = alpha.alpha[::-1]
    out = np.array([_memory_sum(g, j, al[j], h) for j in range(len(g))])
    return f.with_values(out[::-1] / gamma(1. - alpha.alpha))

def rl_derivative(f, alpha, variant):
    """
    Riemann-Liouville derivative, classical or with a truncated window.

    The inner integral is evaluated with the order frozen at the evaluation
    point x_i on the neighbouring nodes and differenced centrally, one-sided
    at the ends. For the truncated variant, a window that would cross the
    left endpoint is cut there and the point is flagged in `clipped`.

    Parameters
    ----------
    f : SampledFn

    alpha : OrderField

    variant : DerivVariant
        RL_CLASSICAL or RL_TRUNCATED.

    Returns
    -------
    d : SampledFn

    """
    _check_pair(f, alpha)
    _require(variant.is_rl, 'rl_derivative needs an RL variant, got '
             '{}'.format(variant.kind.value))
    grid = f.grid
    n, h = grid.n, grid.spacing
    _require(n >= 3, 'rl_derivative needs at least 3 points')
    g = f.values
    out = np.empty(n)
    clipped = np.zeros(n, dtype=bool)
    if variant.kind is DerivKind.RL_CLASSICAL:
        _check_base(grid, variant.base)
        for i, al in enumerate(alpha.alpha):
            out[i] = _outer_derivative(lambda j: _memory_sum(g, j, al, h),
                                       i, n, h)
        return f.with_values(out / gamma(1. - alpha.alpha))

    eps = variant.epsilon
    _require(eps >= 2 * h * (1 - 1e-12), 'epsilon {} is below two grid steps '
             '({})'.format(eps, 2 * h))
    r = eps / h
    for i, al in enumerate(alpha.alpha):
        hit = []

        def inner(j):
            val = _window_sum(g, j, al, h, r)
            if val is None:
                hit.append(j)
                return _memory_sum(g, j, al, h)
            return val

        out[i] = _outer_derivative(inner, i, n, h)
        clipped[i] = bool(hit)
    logger.debug('truncated RL: %d of %d points clipped', clipped.sum(), n)
    return f.with_values(out / gamma(1. - alpha.alpha),
                         clipped if clipped.any() else None)

def _l1(d, mask):
    w = trapezoid_weights(d.grid.n, d.grid.spacing)
    return float(np.sum(np.abs(d.values) * w * mask))

def _components(f, alpha, variant):
    _require(variant.is_rl, 'the hybrid blend needs an RL variant')
    rl = rl_derivative(f, alpha, variant)
    cr = caputo_right(f, alpha)
    return rl, cr

def _theta(rl, cr, tol):
    mask = rl.unclipped
    m_rl = _l1(rl, mask)
    m_c = _l1(cr, mask)
    if m_rl + m_c < tol:
        return 0.5
    return m_rl / (m_rl + m_c)

def theta_weight(f, alpha, variant, tol=1e-12):
    """
    Blend weight m_RL / (m_RL + m_C) broadcast over the grid.

    The masses are trapezoid L1 norms of the RL and right Caputo derivatives
    over unclipped points. Both vanishing gives 1/2.
    """
    rl, cr = _components(f, alpha, variant)
    return f.with_values(np.full(f.grid.n, _theta(rl, cr, tol)))

def adaptive_hybrid(f, alpha, variant, theta=None, tol=1e-12):
    """
    Adaptive hybrid derivative theta * RL + (1 - theta) * right Caputo.

    Parameters
    ----------
    f : SampledFn

    alpha : OrderField

    variant : DerivVariant
        RL_CLASSICAL or RL_TRUNCATED.

    theta : float
        Forced blend weight in [0, 1]. Computed by theta_weight when None.

    tol : float
        Tie-break threshold on the summed masses.

    Returns
    -------
    d : SampledFn
        Carries the clipping mask of the RL component.

    """
    rl, cr = _components(f, alpha, variant)
    if theta is None:
        theta = _theta(rl, cr, tol)
    _require(0. <= theta <= 1., 'theta must lie in [0, 1], got {}'.format(theta))
    logger.debug('hybrid blend weight %.6g', theta)
    values = theta * rl.values + (1. - theta) * cr.values
    return f.with_values(values, rl.clipped)

def gl_oracle(f, alpha, a=None):
    """
    Grunwald-Letnikov derivative of constant order alpha in (0, 1] from base
    point a, which must be a grid node. Points left of a are set to zero.
    """
    grid = f.grid
    _require(0 < alpha <= 1, 'GL order must lie in (0, 1], got {}'.format(alpha))
    a = grid.a if a is None else a
    pos = (a - grid.a) / grid.spacing
    i0 = int(round(pos))
    _require(0 <= i0 < grid.n and abs(pos - i0) < 1e-9,
             'base point {} is not a node of the grid'.format(a))
    g = f.values[i0:]
    m = len(g)
    k = np.arange(1, m, dtype=float)
    w = np.concatenate([[1.], np.cumprod((k - 1. - alpha) / k)])
    out = np.zeros(grid.n)
    out[i0:] = np.convolve(g, w)[:m] / grid.spacing ** alpha
    return f.with_values(out)
