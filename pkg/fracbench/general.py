import logging
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

logger = logging.getLogger(__name__)

# Draws per counter-based substream. Fixed so that results do not depend on
# the number of workers.
CHUNK_SIZE = 65536

class FracbenchError(Exception):
    """Base class for errors raised by fracbench."""

class PreconditionError(FracbenchError, ValueError):
    """An input violates the precondition of an operation."""

class FitError(PreconditionError):
    """A regression was asked to fit degenerate data."""

class OutputError(FracbenchError, IOError):
    """Results could not be written."""

def _make_dir(d):
    """Make directory d if it doesn't exist"""
    try:
        os.makedirs(d)
    except OSError:
        pass

def _require(condition, message):
    if not condition:
        raise PreconditionError(message)

def _check_seed(seed):
    _require(int(seed) == seed and seed >= 0,
             'seed must be a non-negative integer, got {}'.format(seed))
    return int(seed)

def trapezoid_weights(n, spacing):
    """
    Composite trapezoid weights for n equispaced points.

    Parameters
    ----------
    n : int
        Number of points. A single point gets weight zero.

    spacing : float
        Distance between neighbouring points.

    Returns
    -------
    w : numpy.ndarray
        Quadrature weights summing to (n - 1) * spacing.

    """
    w = np.full(n, float(spacing))
    w[0] = w[-1] = spacing / 2.
    if n == 1:
        w[0] = 0.
    return w

def substream(seed, chunk=0):
    """Random generator for chunk `chunk` of the stream keyed by `seed`."""
    ss = np.random.SeedSequence(_check_seed(seed), spawn_key=(int(chunk),))
    return np.random.default_rng(ss)

def chunked_draw(draw, n, seed, workers=1):
    """
    Draw n values in fixed-size chunks, each from its own substream.

    Parameters
    ----------
    draw : callable
        draw(rng, size) returns a 1D array of `size` values.

    n : int
        Total number of values.

    seed : int
        Stream key. Chunk i uses substream(seed, i).

    workers : int
        Number of threads. The output is identical for every value.

    Returns
    -------
    values : numpy.ndarray
        Concatenation of the chunks in chunk order.

    """
    _require(n >= 1, 'need at least one draw, got {}'.format(n))
    _require(workers >= 1, 'workers must be >= 1, got {}'.format(workers))
    seed = _check_seed(seed)
    sizes = [min(CHUNK_SIZE, n - start) for start in range(0, n, CHUNK_SIZE)]

    def job(i):
        return draw(substream(seed, i), sizes[i])

    if workers > 1 and len(sizes) > 1:
        logger.debug('drawing %d chunks on %d threads', len(sizes), workers)
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(job, range(len(sizes))))
    else:
        parts = [job(i) for i in range(len(sizes))]
    return np.concatenate(parts)

def loglog_fit(x, y):
    """Least-squares line through (log x, log y); returns (slope, intercept)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise FitError('need matching arrays with at least two points')
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise FitError('log-log fit needs positive finite values')
    if np.ptp(y) == 0:
        raise FitError('all responses are equal; slope is not identifiable')
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(intercept)
