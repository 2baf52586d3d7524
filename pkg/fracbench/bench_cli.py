"""
Command-line front end, the convergence experiments and CSV output.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd

from . import (core_model, elliptic_spectral, frac_deriv, function_spaces,
               levy_stable, multiscale_approx, prokhorov_metric, qfgd_opt)
from .core_model import RunConfig
from .general import (FitError, OutputError, PreconditionError, _make_dir,
                      _require, loglog_fit)

logger = logging.getLogger(__name__)

CSV_COLUMNS = ['experiment', 'method', 'iteration', 'n', 'error', 'seed']

# Six octaves on the default 1024-point grid: the finest octave spans 32
# points and the estimator window stays below it.
FIG1_PARAMS = {'h_start': 0.3, 'h_stop': 0.7, 'levels': 6}
FIG1_WINDOW = 4
FIG1_LEVELS = (1, 2, 3, 4, 5)

FIG2_DIM = 8
FIG2_ITERATIONS = 7
FIG2_REF_OFFSET = 8.5
FIG2_ORDER = 0.8

SWEEP_DIMS = (2, 8, 32)

@dataclass(frozen=True)
class CsvRow:
    experiment: str
    method: str
    iteration: int
    n: int
    error: float
    seed: int

    def __post_init__(self):
        _require(np.isfinite(self.error) and self.error >= 0,
                 'row error must be finite and >= 0, got {}'.format(self.error))

@dataclass(frozen=True)
class DecayFit:
    rate: float
    prefactor: float
    target_rate: float

def emit_csv(rows, path):
    """
    Write rows with the fixed header, LF line endings and 17 significant
    digits. `path` may also be an open text stream.
    """
    df = pd.DataFrame([asdict(r) for r in rows], columns=CSV_COLUMNS)
    if isinstance(path, str):
        d = os.path.dirname(os.path.abspath(path))
        _make_dir(d)
    try:
        df.to_csv(path, index=False, float_format='%.17g',
                  lineterminator='\n')
    except OSError as e:
        raise OutputError('cannot write {}: {}'.format(path, e)) from e

def fit_decay(errors, ns, alpha):
    """
    Fit e_n = prefactor * n^(-rate) by least squares in log-log scale.

    Parameters
    ----------
    errors : array-like
        At least three positive errors.

    ns : array-like
        Matching positive abscissae.

    alpha : float
        Order whose target rate 2 - alpha is reported next to the fit.

    Returns
    -------
    fit : DecayFit

    """
    errors = np.asarray(errors, dtype=float)
    if errors.size < 3:
        raise FitError('need at least 3 errors, got {}'.format(errors.size))
    if np.any(errors <= 0):
        raise FitError('errors must be positive')
    slope, intercept = loglog_fit(ns, errors)
    return DecayFit(-slope, float(np.exp(intercept)), 2. - alpha)

def decay_fits(rows, alpha):
    """fit_decay of every method's error sequence against its iteration."""
    fits = {}
    for method in dict.fromkeys(r.method for r in rows):
        sel = [r for r in rows if r.method == method]
        fits[method] = fit_decay([r.error for r in sel],
                                 [r.iteration for r in sel], alpha)
    return fits

def _log_fits(name, fits):
    for method, fit in fits.items():
        logger.info('%s %s: decay rate %.4f, prefactor %.4g, target %.4f',
                    name, method, fit.rate, fit.prefactor, fit.target_rate)

def _fig1_signal(cfg):
    grid = core_model.build_grid(0., 1., cfg.grid_n)
    f = core_model.synth_function('weierstrass_varH', grid, FIG1_PARAMS,
                                  cfg.seed)
    H = np.linspace(FIG1_PARAMS['h_start'], FIG1_PARAMS['h_stop'], grid.n)
    return grid, f, float(H.mean())

def run_fig1(cfg):
    """
    Adaptive against constant-order thresholding of the multifractal
    surrogate over refinement levels L = 1..5, with thresholds scaled by
    2^-L. Errors are relative L2 errors.
    """
    grid, f, h_mean = _fig1_signal(cfg)
    norm = np.sqrt(multiscale_approx.haar_decompose(f).energy())
    plans = {
        'adaptive': multiscale_approx.threshold_plan(
            multiscale_approx.local_order_estimate(f, FIG1_WINDOW)),
        'traditional': multiscale_approx.threshold_plan(
            core_model.constant_order(grid, h_mean)),
    }
    rows = []
    for method, plan in plans.items():
        for level in FIG1_LEVELS:
            _, _, err = multiscale_approx.adaptive_approx(
                f, plan.scaled(2. ** -level))
            rows.append(CsvRow('fig1', method, level, grid.n, err / norm,
                               cfg.seed))
    final = {r.method: r.error for r in rows if r.iteration == FIG1_LEVELS[-1]}
    logger.info('fig1 final error ratio adaptive/traditional: %.4f',
                final['adaptive'] / final['traditional'])
    _log_fits('fig1', decay_fits(rows, h_mean))
    return rows

def fig2_problem(seed, dim=FIG2_DIM):
    """Loss, start point and QFGD settings of the optimizer comparison."""
    loss = qfgd_opt.LossSpec.multiscale_ripple(dim)
    w0 = np.linspace(0.5, 1.5, dim)
    # QFGD adapts its order from 0.8 down to 0.5 over the first steps;
    # fno_like keeps the step-0 order without noise.
    order = qfgd_opt.ramp_order(FIG2_ORDER, 0.5, 3)
    cfg = qfgd_opt.OptConfig(
        eta=0.2, T=1e-8, alpha_order=order,
        noise_index=1.5, ref_point=loss.minimizer - FIG2_REF_OFFSET,
        max_iter=FIG2_ITERATIONS, grad_tol=0., seed=seed)
    return loss, w0, cfg

def _descent_rows(cfg, dim, experiment):
    loss, w0, opt = fig2_problem(cfg.seed, dim)
    traces = {'qfgd': qfgd_opt.run_qfgd(loss, w0, opt)}
    traces['gd'], traces['fno_like'] = qfgd_opt.run_baselines(loss, w0, opt)
    rows = []
    for method in ('qfgd', 'fno_like', 'gd'):
        errors = traces[method].errors
        for k in range(1, FIG2_ITERATIONS + 1):
            rows.append(CsvRow(experiment, method, k, dim,
                               errors[k] / errors[0], cfg.seed))
    return rows

def run_fig2(cfg):
    """QFGD, fixed-order fractional descent and GD on the ripple loss."""
    rows = _descent_rows(cfg, FIG2_DIM, 'fig2')
    _log_fits('fig2', decay_fits(rows, FIG2_ORDER))
    return rows

def run_dim_sweep(cfg, dims=SWEEP_DIMS):
    """
    The optimizer comparison repeated for several dimensions. Rows carry the
    dimension in `n`; fitted rates are logged for inspection only.
    """
    rows = []
    for dim in dims:
        _require(int(dim) == dim and dim >= 1,
                 'dimension must be a positive integer, got {}'.format(dim))
        part = _descent_rows(cfg, int(dim), 'sweep')
        _log_fits('sweep dim={}'.format(dim), decay_fits(part, FIG2_ORDER))
        rows += part
    return rows

def _parse_params(items):
    params = {}
    for item in items or []:
        try:
            key, value = item.split('=')
            params[key] = float(value)
        except ValueError:
            raise PreconditionError('cannot parse parameter {!r}; expected '
                                    'key=value'.format(item))
    return params

def _parse_order(spec, grid):
    try:
        parts = [float(p) for p in spec.split(':')]
    except ValueError:
        raise PreconditionError('cannot parse order spec {!r}'.format(spec))
    if len(parts) == 1:
        return core_model.constant_order(grid, parts[0])
    _require(len(parts) == 2, 'order spec is a value or start:stop')
    return core_model.linear_order(grid, parts[0], parts[1])

def _unit_grid(cfg):
    return core_model.build_grid(0., 1., cfg.grid_n)

def _row(experiment, method, value, n, cfg):
    return CsvRow(experiment, method, 0, n, abs(float(value)), cfg.seed)

def _cmd_deriv(args, cfg):
    grid = _unit_grid(cfg)
    f = core_model.synth_function(args.func, grid, _parse_params(args.param),
                                  cfg.seed)
    lines = [('variant', args.variant)]
    if args.variant == 'gl':
        try:
            order = float(args.alpha_spec)
        except ValueError:
            raise PreconditionError('the gl variant needs a constant order, '
                                    'got {!r}'.format(args.alpha_spec))
        d = frac_deriv.gl_oracle(f, order)
    else:
        alpha = _parse_order(args.alpha_spec, grid)
        if args.epsilon is None:
            rl = frac_deriv.DerivVariant.rl_classical()
        else:
            rl = frac_deriv.DerivVariant.rl_truncated(args.epsilon)
        if args.variant == 'rl':
            d = frac_deriv.rl_derivative(f, alpha, rl)
        elif args.variant == 'caputo_left':
            d = frac_deriv.caputo_left(f, alpha)
        elif args.variant == 'caputo_right':
            d = frac_deriv.caputo_right(f, alpha)
        else:
            theta = frac_deriv.theta_weight(f, alpha, rl,
                                            tol=cfg.tolerance).values[0]
            lines.append(('theta', theta))
            d = frac_deriv.adaptive_hybrid(f, alpha, rl, theta=theta,
                                           tol=cfg.tolerance)
    mask = d.unclipped
    l2 = np.sqrt(np.sum(d.values[mask] ** 2) * grid.spacing)
    lines += [('l2_norm', l2), ('max_abs', np.max(np.abs(d.values[mask]))),
              ('value_at_b', d.values[-1]), ('clipped', int((~mask).sum()))]
    rows = [_row('deriv', '{}:{}'.format(args.variant, k), v, grid.n, cfg)
            for k, v in lines[1:] if k != 'value_at_b']
    return rows, lines

def _cmd_kernel(args, cfg):
    est = levy_stable.hadamard_kernel(args.z, args.alpha, args.gamma, args.t,
                                      args.n_mc, cfg.seed,
                                      literal=args.literal,
                                      workers=cfg.workers)
    lines = [('mean', est.mean), ('stderr', est.stderr), ('n', est.n_samples)]
    rows = [_row('kernel', 'mean', est.mean, est.n_samples, cfg),
            _row('kernel', 'stderr', est.stderr, est.n_samples, cfg)]
    if args.scaling:
        t_grid = [0.25, 0.5, 1., 2., 4.]
        for alpha in (0.8, 1.2):
            slope = levy_stable.variance_scaling_fit(
                alpha, args.gamma, t_grid, args.n_mc, cfg.seed, cfg.workers)
            target = 2. / alpha - 1.
            lines += [('slope_alpha{}'.format(alpha), slope),
                      ('target_alpha{}'.format(alpha), target)]
            rows.append(_row('kernel', 'slope_deviation_alpha{}'.format(alpha),
                             slope - target, args.n_mc, cfg))
    return rows, lines

def _cmd_norms(args, cfg):
    grid = _unit_grid(cfg)
    if args.kind == 'penalty':
        report = function_spaces.anisotropic_penalty(
            _parse_order(args.alpha_spec, grid))
    else:
        f = core_model.synth_function(args.func, grid,
                                      _parse_params(args.param), cfg.seed)
        if args.kind == 'gagliardo':
            report = function_spaces.gagliardo_seminorm(f, args.s, args.p)
        elif args.kind == 'besov':
            report = function_spaces.besov_norm(f, args.alpha, args.p)
        elif args.kind == 'holder':
            report = function_spaces.holder_seminorm(f, args.alpha)
        else:
            report = function_spaces.sobolev_norm_spectral(f, args.s)
    lines = [('kind', report.kind.value), ('value', report.value),
             ('grid_n', report.grid_n)]
    return [_row('norms', report.kind.value, report.value, grid.n, cfg)], lines

def _cmd_approx(args, cfg):
    n = 2 ** args.levels if args.levels else cfg.grid_n
    grid = core_model.build_grid(0., 1., n)
    f = core_model.synth_function(args.func, grid, _parse_params(args.param),
                                  cfg.seed)
    if args.alpha_spec == 'estimate':
        alpha = multiscale_approx.local_order_estimate(f, args.window)
    else:
        alpha = _parse_order(args.alpha_spec, grid)
    plan = multiscale_approx.threshold_plan(alpha, args.eps).scaled(args.scale)
    _, retained, err = multiscale_approx.adaptive_approx(f, plan)
    beta = float(plan.beta_j.min())
    N = int(plan.N_j.max())
    bound2 = multiscale_approx.error_bound_thm2(plan, alpha)
    bound1 = multiscale_approx.error_bound_thm1(retained, beta, N, args.eps,
                                                alpha)
    lines = [('retained', retained), ('error', err), ('bound_thm2', bound2),
             ('bound_thm1', bound1)]
    rows = [_row('approx', k, v, grid.n, cfg) for k, v in lines]
    return rows, lines

def _cmd_prokhorov(args, cfg):
    mu = prokhorov_metric.parse_measure(args.mu)
    nu = prokhorov_metric.parse_measure(args.nu)
    d = prokhorov_metric.frac_prokhorov(mu, nu, args.alpha, cfg.tolerance)
    return ([_row('prokhorov', 'distance', d, len(mu) + len(nu), cfg)],
            [('distance', d)])

def _cmd_qfgd(args, cfg):
    kinds = {'quadratic': lambda: qfgd_opt.LossSpec.quadratic(args.dim),
             'rosenbrock': lambda: qfgd_opt.LossSpec.rosenbrock(args.dim),
             'multiscale_ripple':
                 lambda: qfgd_opt.LossSpec.multiscale_ripple(args.dim)}
    loss = kinds[args.loss]()
    order = args.alpha if args.alpha_stop is None else \
        qfgd_opt.ramp_order(args.alpha, args.alpha_stop, args.n_ramp)
    opt = qfgd_opt.OptConfig(
        eta=args.eta, T=args.T, alpha_order=order,
        noise_index=args.noise_index,
        ref_point=loss.minimizer - args.ref_offset, max_iter=args.N,
        grad_tol=args.grad_tol, seed=cfg.seed)
    w0 = np.linspace(0.5, 1.5, args.dim)
    trace = qfgd_opt.run_qfgd(loss, w0, opt)
    rows = [CsvRow('qfgd', args.loss, r.iteration, args.dim, r.error, cfg.seed)
            for r in trace.records]
    last = trace.records[-1]
    lines = [('iterations', last.iteration), ('loss', last.loss),
             ('grad_norm', last.grad_norm), ('error', last.error)]
    return rows, lines

def _cmd_elliptic(args, cfg):
    grid = _unit_grid(cfg)
    f = elliptic_spectral.band_limited(grid, args.modes, cfg.seed)
    u = elliptic_spectral.solve_frac_poisson(f, args.alpha)
    ratio = elliptic_spectral.regularity_ratio(f, args.alpha)
    residual = elliptic_spectral.spectral_residual(u, f, args.alpha)
    bound = elliptic_spectral.mode_ratio_bound(args.alpha)
    lines = [('ratio', ratio), ('bound', bound), ('residual', residual)]
    return [_row('elliptic', k, v, grid.n, cfg) for k, v in lines], lines

def _rate_lines(figure, rows):
    if figure == 'fig1':
        alpha = 0.5 * (FIG1_PARAMS['h_start'] + FIG1_PARAMS['h_stop'])
    else:
        alpha = FIG2_ORDER
    lines = []
    for n in dict.fromkeys(r.n for r in rows):
        suffix = '_dim{}'.format(n) if figure == 'sweep' else ''
        fits = decay_fits([r for r in rows if r.n == n], alpha)
        lines += [('rate_{}{}'.format(m, suffix), fit.rate)
                  for m, fit in fits.items()]
    lines.append(('target_rate', 2. - alpha))
    return lines

def _cmd_bench(args, cfg):
    runner = {'fig1': run_fig1, 'fig2': run_fig2,
              'sweep': run_dim_sweep}[args.figure]
    rows = runner(cfg)
    if cfg.output_path is None:
        emit_csv(rows, sys.stdout)
        return [], []
    return rows, ([('rows', len(rows)), ('out', cfg.output_path)] +
                  _rate_lines(args.figure, rows))

def _build_parser():
    parser = argparse.ArgumentParser(prog='fracbench', description=(
        'Fractional calculus numerics and convergence benchmarks. Every '
        'subcommand is deterministic given --seed.'))
    parser.add_argument('--seed', type=int, default=42, help='Random seed.')
    parser.add_argument('--out', default=None, help='CSV output path.')
    parser.add_argument('--grid-n', type=int, default=1024,
                        help='Number of grid points.')
    parser.add_argument('--tol', type=float, default=1e-6, help='Tolerance.')
    parser.add_argument('--workers', type=int, default=1,
                        help='Threads for Monte Carlo sampling.')
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='Log more (repeat for debug output).')
    sub = parser.add_subparsers(dest='command')
    sub.required = True

    p = sub.add_parser('deriv', help='Fractional derivative of a catalog '
                       'function.')
    p.add_argument('--func', default='sine', choices=core_model.CATALOG_IDS)
    p.add_argument('--param', action='append', help='Catalog key=value.')
    p.add_argument('--alpha-spec', default='0.5',
                   help='Order as a value or start:stop.')
    p.add_argument('--variant', default='hybrid',
                   choices=['rl', 'caputo_left', 'caputo_right', 'hybrid',
                            'gl'])
    p.add_argument('--epsilon', type=float, default=None,
                   help='Truncation window of the RL part.')
    p.set_defaults(func_=_cmd_deriv)

    p = sub.add_parser('kernel', help='Levy-regularized Hadamard kernel.')
    p.add_argument('--z', type=float, default=1.)
    p.add_argument('--alpha', type=float, default=0.5)
    p.add_argument('--gamma', type=float, default=0.5)
    p.add_argument('--t', type=float, default=1.)
    p.add_argument('--n-mc', type=int, default=100000)
    p.add_argument('--literal', action='store_true',
                   help='Quadrature against the Levy density instead.')
    p.add_argument('--scaling', action='store_true',
                   help='Also fit the variance scaling for alpha 0.8, 1.2.')
    p.set_defaults(func_=_cmd_kernel)

    p = sub.add_parser('norms', help='Function space norms.')
    p.add_argument('--kind', default='gagliardo',
                   choices=[k.value for k in function_spaces.NormKind])
    p.add_argument('--func', default='sine', choices=core_model.CATALOG_IDS)
    p.add_argument('--param', action='append')
    p.add_argument('--s', type=float, default=0.5)
    p.add_argument('--p', type=float, default=2.)
    p.add_argument('--alpha', type=float, default=0.5)
    p.add_argument('--alpha-spec', default='0.4:0.8',
                   help='Order field for the penalty.')
    p.set_defaults(func_=_cmd_norms)

    p = sub.add_parser('approx', help='Adaptive Haar approximation.')
    p.add_argument('--func', default='weierstrass_varH',
                   choices=core_model.CATALOG_IDS)
    p.add_argument('--param', action='append')
    p.add_argument('--alpha-spec', default='estimate',
                   help='Order as a value, start:stop or "estimate".')
    p.add_argument('--window', type=int, default=FIG1_WINDOW)
    p.add_argument('--eps', type=float, default=0.)
    p.add_argument('--levels', type=int, default=None,
                   help='Use a grid of 2^levels points.')
    p.add_argument('--scale', type=float, default=1.,
                   help='Factor applied to every threshold.')
    p.set_defaults(func_=_cmd_approx)

    p = sub.add_parser('prokhorov', help='Fractional Prokhorov distance.')
    p.add_argument('mu', help='Measure as atom:weight,...')
    p.add_argument('nu', help='Measure as atom:weight,...')
    p.add_argument('--alpha', type=float, default=1.)
    p.set_defaults(func_=_cmd_prokhorov)

    p = sub.add_parser('qfgd', help='Run QFGD on a benchmark loss.')
    p.add_argument('--loss', default='multiscale_ripple',
                   choices=[k.value for k in qfgd_opt.LossKind])
    p.add_argument('--dim', type=int, default=FIG2_DIM)
    p.add_argument('--eta', type=float, default=0.2)
    p.add_argument('--T', type=float, default=0.)
    p.add_argument('--alpha', type=float, default=0.8)
    p.add_argument('--alpha-stop', type=float, default=None,
                   help='Ramp the order from --alpha to this value.')
    p.add_argument('--n-ramp', type=int, default=3)
    p.add_argument('--noise-index', type=float, default=None)
    p.add_argument('--ref-offset', type=float, default=FIG2_REF_OFFSET,
                   help='Reference point is the minimizer minus this.')
    p.add_argument('--N', type=int, default=FIG2_ITERATIONS)
    p.add_argument('--grad-tol', type=float, default=1e-8)
    p.add_argument('--csv', default=None, help='Same as --out.')
    p.set_defaults(func_=_cmd_qfgd)

    p = sub.add_parser('elliptic', help='Spectral fractional Poisson solve.')
    p.add_argument('--alpha', type=float, default=0.5)
    p.add_argument('--modes', type=int, default=8)
    p.set_defaults(func_=_cmd_elliptic)

    p = sub.add_parser('bench', help='Reproduce a convergence figure; sweep '
                       'repeats fig2 for dimensions 2, 8 and 32.')
    p.add_argument('figure', choices=['fig1', 'fig2', 'sweep'])
    p.set_defaults(func_=_cmd_bench)
    return parser

def _configure_logging(verbose):
    level = max(logging.WARNING - 10 * verbose, logging.DEBUG)
    logging.getLogger('fracbench').setLevel(level)

def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    out = getattr(args, 'csv', None) or args.out
    try:
        cfg = RunConfig(seed=args.seed, grid_n=args.grid_n,
                        tolerance=args.tol, output_path=out,
                        workers=args.workers)
        rows, lines = args.func_(args, cfg)
        for key, value in lines:
            print('{}: {}'.format(key, value))
        if cfg.output_path is not None:
            emit_csv(rows, cfg.output_path)
    except OutputError as e:
        print('error: {}'.format(e), file=sys.stderr)
        return 2
    except PreconditionError as e:
        print('error: {}'.format(e), file=sys.stderr)
        return 1
    return 0

if __name__ == '__main__':
    sys.exit(main())
