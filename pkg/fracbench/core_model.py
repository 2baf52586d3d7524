"""
Grids, sampled functions, fractional order fields and the synthetic
function catalog shared by every other module.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .general import PreconditionError, _require, substream

logger = logging.getLogger(__name__)

CATALOG_IDS = ('constant', 'monomial', 'sine', 'cusp', 'weierstrass_varH')

@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of n points on [a, b]."""
    a: float
    b: float
    n: int

    def __post_init__(self):
        _require(np.isfinite(self.a) and np.isfinite(self.b),
                 'grid endpoints must be finite')
        _require(self.a < self.b,
                 'grid needs a < b, got a={} b={}'.format(self.a, self.b))
        _require(self.n >= 2, 'grid needs n >= 2, got {}'.format(self.n))

    @property
    def spacing(self):
        return (self.b - self.a) / (self.n - 1)

    @property
    def length(self):
        return self.b - self.a

    @property
    def points(self):
        return np.linspace(self.a, self.b, self.n)

def _frozen_array(values):
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr

@dataclass(frozen=True, eq=False)
class SampledFn:
    """
    Function values on a grid.

    `clipped` marks points whose result used a window cut at the domain
    boundary. It is None when no point was clipped.
    """
    grid: Grid1D
    values: np.ndarray
    clipped: Optional[np.ndarray] = None

    def __post_init__(self):
        values = _frozen_array(self.values)
        _require(values.shape == (self.grid.n,),
                 'expected {} values, got shape {}'.format(self.grid.n,
                                                          values.shape))
        _require(np.all(np.isfinite(values)), 'sampled values must be finite')
        object.__setattr__(self, 'values', values)
        if self.clipped is not None:
            clipped = np.array(self.clipped, dtype=bool)
            _require(clipped.shape == values.shape,
                     'clipped mask must match the values')
            clipped.setflags(write=False)
            object.__setattr__(self, 'clipped', clipped)

    @property
    def x(self):
        return self.grid.points

    @property
    def unclipped(self):
        """Boolean mask of points computed with a full window."""
        if self.clipped is None:
            return np.ones(self.grid.n, dtype=bool)
        return ~self.clipped

    def with_values(self, values, clipped=None):
        return SampledFn(self.grid, values, clipped)

@dataclass(frozen=True, eq=False)
class OrderField:
    """Fractional order alpha(x) on a grid with 0 < alpha0 <= alpha <= alpha1 < 1."""
    grid: Grid1D
    alpha: np.ndarray
    alpha0: float
    alpha1: float

    def __post_init__(self):
        alpha = _frozen_array(self.alpha)
        _require(alpha.shape == (self.grid.n,),
                 'expected {} orders, got shape {}'.format(self.grid.n,
                                                          alpha.shape))
        _require(0 < self.alpha0 <= self.alpha1 < 1,
                 'order bounds must satisfy 0 < alpha0 <= alpha1 < 1, got '
                 '{} and {}'.format(self.alpha0, self.alpha1))
        _require(np.all(np.isfinite(alpha)) and
                 alpha.min() >= self.alpha0 and alpha.max() <= self.alpha1,
                 'order field leaves [{}, {}]'.format(self.alpha0,
                                                      self.alpha1))
        object.__setattr__(self, 'alpha', alpha)

    @property
    def is_constant(self):
        return bool(np.all(self.alpha == self.alpha[0]))

    @property
    def mean(self):
        return float(self.alpha.mean())

    def at(self, x):
        """Order at arbitrary points, linearly interpolated."""
        return np.interp(x, self.grid.points, self.alpha)

def order_field(grid, values, alpha0=None, alpha1=None):
    """Order field from values; bounds default to the range of values."""
    values = np.broadcast_to(np.asarray(values, dtype=float), (grid.n,))
    if alpha0 is None:
        alpha0 = float(values.min())
    if alpha1 is None:
        alpha1 = float(values.max())
    return OrderField(grid, values, alpha0, alpha1)

def constant_order(grid, value):
    return order_field(grid, np.full(grid.n, float(value)))

def linear_order(grid, start, stop):
    """Order varying linearly from `start` at a to `stop` at b."""
    return order_field(grid, np.linspace(start, stop, grid.n))

@dataclass(frozen=True)
class RunConfig:
    """Settings shared by the experiment runners."""
    seed: int = 42
    grid_n: int = 1024
    tolerance: float = 1e-6
    output_path: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        _require(int(self.seed) == self.seed and 0 <= self.seed < 2**64,
                 'seed must be a 64-bit unsigned integer')
        _require(self.grid_n >= 2, 'grid_n must be >= 2')
        _require(self.tolerance > 0, 'tolerance must be positive')
        _require(self.workers >= 1, 'workers must be >= 1')

def build_grid(a, b, n):
    """
    Build a uniform grid.

    Parameters
    ----------
    a, b : float
        Endpoints with a < b.

    n : int
        Number of points, at least 2.

    Returns
    -------
    grid : Grid1D

    """
    _require(int(n) == n, 'number of points must be an integer, got {}'.format(n))
    return Grid1D(float(a), float(b), int(n))

_DEFAULTS = {
    'constant': {'c': 1.0},
    'monomial': {'degree': 1.0, 'scale': 1.0},
    'sine': {'k': 1.0, 'amplitude': 1.0},
    'cusp': {'center': None, 'exponent': 0.5, 'scale': 1.0},
    'weierstrass_varH': {'h': None, 'h_start': None, 'h_stop': None,
                         'levels': 10, 'amplitude': 1.0},
}

def _resolve_params(name, params):
    _require(name in _DEFAULTS, 'unknown catalog id {!r}; choose from '
             '{}'.format(name, ', '.join(CATALOG_IDS)))
    params = dict(params or {})
    unknown = set(params) - set(_DEFAULTS[name])
    _require(not unknown, 'unknown parameters for {}: {}'.format(
        name, ', '.join(sorted(unknown))))
    out = dict(_DEFAULTS[name])
    out.update(params)
    return out

def _exponent_field(x, grid, p):
    if p['h_start'] is not None or p['h_stop'] is not None:
        _require(p['h_start'] is not None and p['h_stop'] is not None,
                 'a ramp needs both h_start and h_stop')
        _require(p['h'] is None, 'give either h or a ramp, not both')
        u = (x - grid.a) / grid.length
        H = p['h_start'] + (p['h_stop'] - p['h_start']) * u
    else:
        H = np.full(x.shape, 0.5 if p['h'] is None else float(p['h']))
    _require(np.all((H > 0) & (H < 1)), 'local exponent must lie in (0, 1)')
    return H

def synth_function(name, grid, params=None, seed=0):
    """
    Sample a catalog function on a grid.

    Parameters
    ----------
    name : str
        One of constant, monomial, sine, cusp, weierstrass_varH.

    grid : Grid1D
        Sampling grid.

    params : dict
        Flat parameter map; missing keys take their defaults.

    seed : int
        Seed for the random phases of weierstrass_varH. The other functions
        are deterministic.

    Returns
    -------
    f : SampledFn

    """
    p = _resolve_params(name, params)
    x = grid.points
    if name == 'constant':
        values = np.full(grid.n, float(p['c']))
    elif name == 'monomial':
        _require(p['degree'] >= 0,
                 'monomial degree must be >= 0, got {}'.format(p['degree']))
        values = p['scale'] * x ** p['degree']
    elif name == 'sine':
        values = p['amplitude'] * np.sin(p['k'] * np.pi * (x - grid.a) /
                                         grid.length)
    elif name == 'cusp':
        _require(p['exponent'] > 0, 'cusp exponent must be positive')
        center = (grid.a + grid.b) / 2. if p['center'] is None else p['center']
        values = p['scale'] * np.abs(x - center) ** p['exponent']
    else:
        levels = int(p['levels'])
        _require(levels >= 1, 'weierstrass_varH needs levels >= 1')
        H = _exponent_field(x, grid, p)
        phases = substream(seed, 0).uniform(0., 2 * np.pi, size=levels)
        values = np.zeros(grid.n)
        for j in range(1, levels + 1):
            values += 2. ** (-j * H) * np.cos(2. ** j * np.pi * x +
                                              phases[j - 1])
        values *= p['amplitude']
    if not np.all(np.isfinite(values)):
        raise PreconditionError('{} with {} is not finite on the grid'.format(
            name, params))
    logger.debug('synthesized %s on %d points', name, grid.n)
    return SampledFn(grid, values)

# Fixed catalog used by the bound and embedding sweeps.
CATALOG = (
    ('constant', {'c': 1.0}),
    ('constant', {'c': -2.0}),
    ('monomial', {'degree': 1}),
    ('monomial', {'degree': 2}),
    ('monomial', {'degree': 3}),
    ('monomial', {'degree': 0.5}),
    ('sine', {'k': 1}),
    ('sine', {'k': 2}),
    ('sine', {'k': 3}),
    ('sine', {'k': 4}),
    ('sine', {'k': 5}),
    ('cusp', {'exponent': 0.3, 'center': 0.5}),
    ('cusp', {'exponent': 0.5, 'center': 0.3}),
    ('cusp', {'exponent': 0.7, 'center': 0.7}),
    ('weierstrass_varH', {'h': 0.5, 'levels': 6}),
    ('weierstrass_varH', {'h': 0.7, 'levels': 6}),
    ('weierstrass_varH', {'h_start': 0.3, 'h_stop': 0.7, 'levels': 6}),
    ('weierstrass_varH', {'h_start': 0.4, 'h_stop': 0.8, 'levels': 6}),
    ('weierstrass_varH', {'h': 0.6, 'levels': 5}),
    ('weierstrass_varH', {'h': 0.4, 'levels': 5}),
)

def catalog_functions(grid, seed=0):
    """All catalog entries sampled on `grid` as (label, SampledFn) pairs."""
    out = []
    for name, params in CATALOG:
        label = name + ''.join('_{}{}'.format(k, v)
                               for k, v in sorted(params.items()))
        out.append((label, synth_function(name, grid, params, seed)))
    return out

def finite_diff(f):
    """
    Second-order first derivative: central differences inside, one-sided
    second-order stencils at both ends.
    """
    _require(f.grid.n >= 3, 'finite_diff needs at least 3 points')
    return SampledFn(f.grid, np.gradient(f.values, f.grid.spacing,
                                         edge_order=2))
