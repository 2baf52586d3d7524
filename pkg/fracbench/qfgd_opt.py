"""
Quantum fractional gradient descent (QFGD) and its baselines.

Each coordinate's gradient is rescaled by the one-term Caputo factor
|w_i - c_i|^(1 - alpha) / Gamma(2 - alpha) around a reference point c, and
alpha-stable noise of temperature T is added to the step.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy.special import gamma

from .general import _require, substream
from .levy_stable import StableParams, stable_draws

logger = logging.getLogger(__name__)

class LossKind(enum.Enum):
    QUADRATIC = 'quadratic'
    ROSENBROCK = 'rosenbrock'
    MULTISCALE_RIPPLE = 'multiscale_ripple'

@dataclass(frozen=True, eq=False)
class LossSpec:
    """
    Benchmark loss with an analytic gradient and a known minimizer.

    The ripple is the quadratic bowl plus
    sum_m a_m sum_i (1 - cos(omega_m (w_i - center_i))), which keeps the bowl
    center as the unique minimizer while sum_m a_m omega_m^2 < curvature.
    """
    kind: LossKind
    dim: int
    center: np.ndarray
    curvature: float = 1.
    amplitudes: Tuple[float, ...] = ()
    frequencies: Tuple[float, ...] = ()

    def __post_init__(self):
        _require(self.dim >= 1, 'dim must be >= 1')
        center = np.broadcast_to(np.asarray(self.center, dtype=float),
                                 (self.dim,)).copy()
        center.setflags(write=False)
        object.__setattr__(self, 'center', center)
        _require(self.curvature > 0, 'curvature must be positive')
        if self.kind is LossKind.ROSENBROCK:
            _require(self.dim >= 2, 'rosenbrock needs dim >= 2')
        if self.kind is LossKind.MULTISCALE_RIPPLE:
            a = np.asarray(self.amplitudes, dtype=float)
            om = np.asarray(self.frequencies, dtype=float)
            _require(a.shape == om.shape and a.size >= 1,
                     'ripple needs matching amplitudes and frequencies')
            _require(np.all(a > 0), 'ripple amplitudes must be positive')
            _require(np.sum(a * om ** 2) < self.curvature,
                     'ripple too strong: sum a w^2 = {:.4g} must stay below the '
                     'curvature {:.4g}'.format(np.sum(a * om ** 2),
                                               self.curvature))

    @classmethod
    def quadratic(cls, dim, center=0., curvature=1.):
        return cls(LossKind.QUADRATIC, dim, center, curvature)

    @classmethod
    def rosenbrock(cls, dim):
        return cls(LossKind.ROSENBROCK, dim, np.ones(dim))

    @classmethod
    def multiscale_ripple(cls, dim, curvature=1.,
                          amplitudes=(5e-3, 4e-4, 3e-5),
                          frequencies=(3., 9., 27.), center=0.):
        return cls(LossKind.MULTISCALE_RIPPLE, dim, center, curvature,
                   tuple(amplitudes), tuple(frequencies))

    @property
    def minimizer(self):
        return self.center

    def value(self, w):
        w = np.asarray(w, dtype=float)
        if self.kind is LossKind.ROSENBROCK:
            return float(np.sum(100. * (w[1:] - w[:-1] ** 2) ** 2 +
                                (1. - w[:-1]) ** 2))
        u = w - self.center
        out = 0.5 * self.curvature * float(np.dot(u, u))
        for a, om in zip(self.amplitudes, self.frequencies):
            out += a * float(np.sum(1. - np.cos(om * u)))
        return out

    def gradient(self, w):
        w = np.asarray(w, dtype=float)
        if self.kind is LossKind.ROSENBROCK:
            g = np.zeros_like(w)
            t = w[1:] - w[:-1] ** 2
            g[:-1] = -400. * w[:-1] * t - 2. * (1. - w[:-1])
            g[1:] += 200. * t
            return g
        u = w - self.center
        g = self.curvature * u
        for a, om in zip(self.amplitudes, self.frequencies):
            g = g + a * om * np.sin(om * u)
        return g

@dataclass(frozen=True)
class OrderRamp:
    """Order schedule moving linearly from start to stop over n_ramp steps."""
    start: float = 0.8
    stop: float = 0.5
    n_ramp: int = 3

    def __call__(self, k):
        if self.n_ramp <= 0:
            return self.stop
        u = min(k, self.n_ramp) / self.n_ramp
        return self.start + (self.stop - self.start) * u

def ramp_order(start=0.8, stop=0.5, n_ramp=3):
    return OrderRamp(start, stop, n_ramp)

def _check_order(alpha):
    _require(0 < alpha <= 1, 'gradient order must lie in (0, 1], got '
             '{}'.format(alpha))

@dataclass(frozen=True)
class OptConfig:
    """
    Optimizer settings.

    alpha_order is a fixed order or a schedule k -> alpha_k. noise_index
    defaults to the gradient order of the step. ref_point defaults to the
    initial iterate and step_clip to 10 eta |grad L(w0)|.
    """
    eta: float
    T: float = 0.
    alpha_order: Union[float, Callable[[int], float]] = 1.
    noise_index: Optional[float] = None
    stable_skew: float = 0.
    ref_point: Optional[np.ndarray] = field(default=None, compare=False)
    max_iter: int = 100
    grad_tol: float = 1e-8
    seed: int = 42
    step_clip: Optional[float] = None
    hybrid_rl: bool = False

    def __post_init__(self):
        _require(self.eta > 0, 'eta must be positive')
        _require(self.T >= 0, 'T must be >= 0')
        if not callable(self.alpha_order):
            _check_order(self.alpha_order)
        if self.noise_index is not None:
            _require(0 < self.noise_index <= 2, 'noise index must lie in (0, 2]')
        _require(-1 <= self.stable_skew <= 1, 'stable_skew must lie in [-1, 1]')
        _require(self.max_iter >= 0, 'max_iter must be >= 0')
        _require(self.grad_tol >= 0, 'grad_tol must be >= 0')
        if self.step_clip is not None:
            _require(0 < self.step_clip < np.inf,
                     'step_clip must be positive and finite')

    def order_at(self, k):
        alpha = self.alpha_order(k) if callable(self.alpha_order) \
            else self.alpha_order
        _check_order(alpha)
        return float(alpha)

@dataclass(frozen=True)
class OptRecord:
    iteration: int
    w: np.ndarray = field(compare=False)
    loss: float
    grad_norm: float
    error: float

@dataclass(frozen=True)
class OptTrace:
    records: Tuple[OptRecord, ...]

    def __len__(self):
        return len(self.records)

    @property
    def errors(self):
        return np.array([r.error for r in self.records])

    @property
    def losses(self):
        return np.array([r.loss for r in self.records])

    @property
    def iterates(self):
        return np.array([r.w for r in self.records])

def frac_gradient(loss, w, alpha_order, c):
    """
    Fractional gradient g_i = dL/dw_i |w_i - c_i|^(1 - alpha) / Gamma(2 - alpha).

    At w_i = c_i the factor is 0 for alpha < 1. alpha = 1 gives the gradient.
    """
    _check_order(alpha_order)
    w = np.asarray(w, dtype=float)
    factor = np.abs(w - np.asarray(c, dtype=float)) ** (1. - alpha_order) / \
        gamma(2. - alpha_order)
    return loss.gradient(w) * factor

def _resolve(cfg, loss, w0):
    w0 = np.asarray(w0, dtype=float)
    _require(w0.shape == (loss.dim,), 'w0 must have {} entries'.format(loss.dim))
    changes = {}
    if cfg.ref_point is None:
        changes['ref_point'] = w0.copy()
    if cfg.step_clip is None:
        clip = 10. * cfg.eta * float(np.linalg.norm(loss.gradient(w0)))
        changes['step_clip'] = clip if clip > 0 else 10. * cfg.eta
    return replace(cfg, **changes) if changes else cfg

def qfgd_step(w, loss, cfg, rng, k=0):
    """
    One step w - eta g + sqrt(2 eta T) xi, norm-clipped at step_clip.

    Parameters
    ----------
    w : numpy.ndarray
        Current iterate.

    loss : LossSpec

    cfg : OptConfig
        Unset ref_point and step_clip are taken from w.

    rng : numpy.random.Generator
        Noise source; only consumed when T > 0.

    k : int
        Iteration index for order schedules.

    Returns
    -------
    w_next : numpy.ndarray

    """
    w = np.asarray(w, dtype=float)
    cfg = _resolve(cfg, loss, w)
    alpha = cfg.order_at(k)
    c = np.broadcast_to(np.asarray(cfg.ref_point, dtype=float), w.shape)
    g = frac_gradient(loss, w, alpha, c)
    if cfg.hybrid_rl and alpha < 1:
        g = g + loss.value(c) * np.abs(w - c) ** (-alpha) / gamma(1. - alpha)
    step = -cfg.eta * g
    if cfg.T > 0:
        index = alpha if cfg.noise_index is None else cfg.noise_index
        xi = stable_draws(rng, StableParams(index, cfg.stable_skew), w.size)
        step = step + np.sqrt(2. * cfg.eta * cfg.T) * xi
    norm = float(np.linalg.norm(step))
    if norm > cfg.step_clip:
        step = step * (cfg.step_clip / norm)
    return w + step

def _record(loss, w, k):
    return OptRecord(k, w.copy(), loss.value(w),
                     float(np.linalg.norm(loss.gradient(w))),
                     float(np.linalg.norm(w - loss.minimizer)))

def run_qfgd(loss, w0, cfg):
    """
    Iterate qfgd_step until |grad L| < grad_tol or max_iter steps.

    Returns
    -------
    trace : OptTrace
        At most max_iter + 1 records, starting with w0.

    """
    cfg = _resolve(cfg, loss, w0)
    rng = substream(cfg.seed, 0)
    w = np.asarray(w0, dtype=float).copy()
    records = [_record(loss, w, 0)]
    for k in range(cfg.max_iter):
        if records[-1].grad_norm < cfg.grad_tol:
            logger.debug('converged after %d iterations', k)
            break
        w = qfgd_step(w, loss, cfg, rng, k)
        records.append(_record(loss, w, k + 1))
    return OptTrace(tuple(records))

def run_baselines(loss, w0, cfg):
    """
    Gradient descent (alpha = 1, T = 0) and fixed-order fractional descent
    (the order of step 0, T = 0) under the same settings.
    """
    gd = run_qfgd(loss, w0, replace(cfg, alpha_order=1., T=0.))
    fno_like = run_qfgd(loss, w0, replace(cfg, alpha_order=cfg.order_at(0),
                                          T=0.))
    return gd, fno_like
