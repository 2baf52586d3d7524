import io
import logging
import os

import numpy as np
import pandas as pd
import pytest

import fracbench as fb

bc = fb.bench_cli

HEADER = 'experiment,method,iteration,n,error,seed\n'

def _rows():
    return [bc.CsvRow('fig1', 'adaptive', 1, 1024, 0.1 + 0.2, 42),
            bc.CsvRow('fig1', 'adaptive', 2, 1024, 1. / 3., 42),
            bc.CsvRow('fig2', 'gd', 7, 8, 2.5e-17, 7)]

class TestCsvRow:
    def test_negative_error(self):
        """Test that negative errors are rejected"""
        with pytest.raises(fb.general.PreconditionError):
            bc.CsvRow('fig1', 'adaptive', 1, 8, -1e-3, 0)

    def test_nan_error(self):
        """Test that NaN errors are rejected"""
        with pytest.raises(fb.general.PreconditionError):
            bc.CsvRow('fig1', 'adaptive', 1, 8, float('nan'), 0)

class TestEmitCsv:
    def test_empty(self, tmp_path):
        """Test that no rows give a header-only file"""
        path = os.path.join(str(tmp_path), 'empty.csv')
        bc.emit_csv([], path)
        with open(path, 'rb') as f:
            assert f.read() == HEADER.encode()

    def test_round_trip(self, tmp_path):
        """Test that parsing the file restores every field exactly"""
        path = os.path.join(str(tmp_path), 'sub', 'rows.csv')
        rows = _rows()
        bc.emit_csv(rows, path)
        df = pd.read_csv(path, float_precision='round_trip')
        assert list(df.columns) == bc.CSV_COLUMNS
        assert list(df['error']) == [r.error for r in rows]
        assert list(df['method']) == [r.method for r in rows]
        assert list(df['iteration']) == [1, 2, 7]

    def test_bytes(self):
        """Test the exact bytes and line endings"""
        buf = io.StringIO()
        bc.emit_csv(_rows()[:1], buf)
        assert buf.getvalue() == \
            HEADER + 'fig1,adaptive,1,1024,0.30000000000000004,42\n'

    def test_unwritable(self, tmp_path):
        """Test that a path below a regular file raises OutputError"""
        blocker = os.path.join(str(tmp_path), 'file')
        open(blocker, 'w').close()
        with pytest.raises(fb.general.OutputError):
            bc.emit_csv(_rows(), os.path.join(blocker, 'rows.csv'))

class TestFitDecay:
    def test_power_law(self):
        """Test an exact n^-1.5 decay"""
        ns = np.arange(1, 8)
        fit = bc.fit_decay(ns ** -1.5, ns, 0.5)
        assert fit.rate == pytest.approx(1.5, abs=1e-10)
        assert fit.prefactor == pytest.approx(1.)
        assert fit.target_rate == pytest.approx(1.5)

    def test_target_exponent(self):
        """Test a decay built from the target exponent 2 - alpha"""
        ns = np.array([2, 4, 8, 16])
        fit = bc.fit_decay(3. * ns ** -(2 - 0.7), ns, 0.7)
        assert fit.rate == pytest.approx(fit.target_rate, abs=1e-10)
        assert fit.prefactor == pytest.approx(3.)

    def test_published_points(self):
        """Test the rate through the published adaptive curve"""
        fit = bc.fit_decay([0.5, 0.3, 0.15, 0.08, 0.04], [1, 2, 3, 4, 5], 0.5)
        assert fit.rate == pytest.approx(1.527, abs=0.005)

    def test_too_few(self):
        """Test that two errors are not enough"""
        with pytest.raises(fb.general.FitError):
            bc.fit_decay([0.5, 0.25], [1, 2], 0.5)

    def test_nonpositive(self):
        """Test that a zero error is rejected"""
        with pytest.raises(fb.general.FitError):
            bc.fit_decay([0.5, 0.25, 0.], [1, 2, 3], 0.5)

def _fig1_errors(rows, method):
    return np.array([r.error for r in rows if r.method == method])

class TestRunFig1:
    @pytest.mark.parametrize('seed', [0, 1, 2, 3, 42])
    def test_orderings(self, seed):
        """Test row count, decay and a 70% final error reduction"""
        rows = bc.run_fig1(fb.core_model.RunConfig(seed=seed))
        assert len(rows) == 10
        adaptive = _fig1_errors(rows, 'adaptive')
        traditional = _fig1_errors(rows, 'traditional')
        assert np.all(np.diff(adaptive) < 0)
        assert np.all(np.diff(traditional) < 0)
        assert adaptive[-1] <= 0.30 * traditional[-1]
        assert np.all(np.isfinite(adaptive)) and np.all(np.isfinite(traditional))

    def test_deterministic(self, tmp_path):
        """Test that a seed reproduces the CSV bytes"""
        paths = [os.path.join(str(tmp_path), '{}.csv'.format(i))
                 for i in range(2)]
        for p in paths:
            bc.emit_csv(bc.run_fig1(fb.core_model.RunConfig(seed=5)), p)
        with open(paths[0], 'rb') as a, open(paths[1], 'rb') as b:
            assert a.read() == b.read()

    def test_grid_size(self):
        """Test that a grid that is not a power of two is rejected"""
        with pytest.raises(fb.general.PreconditionError):
            bc.run_fig1(fb.core_model.RunConfig(grid_n=1000))

def _fig2_errors(rows, method):
    return np.array([r.error for r in rows if r.method == method])

class TestDecayFits:
    def test_fig1_fits(self, caplog):
        """Test that the figure run logs one decay fit per method"""
        with caplog.at_level(logging.INFO, logger='fracbench'):
            rows = bc.run_fig1(fb.core_model.RunConfig())
        assert 'fig1 adaptive: decay rate' in caplog.text
        assert 'fig1 traditional: decay rate' in caplog.text
        fits = bc.decay_fits(rows, 0.5)
        assert set(fits) == {'adaptive', 'traditional'}
        assert all(fit.rate > 0 for fit in fits.values())
        assert fits['adaptive'].target_rate == pytest.approx(1.5)

    def test_power_law_rows(self):
        """Test the per-method fit on exact power laws"""
        rows = [bc.CsvRow('fig2', m, k, 8, c * k ** -p, 0)
                for m, c, p in (('a', 1., 2.), ('b', 3., 0.5))
                for k in range(1, 6)]
        fits = bc.decay_fits(rows, 0.8)
        assert fits['a'].rate == pytest.approx(2., abs=1e-10)
        assert fits['b'].rate == pytest.approx(0.5, abs=1e-10)
        assert fits['b'].prefactor == pytest.approx(3.)

class TestRunFig2:
    def test_rows(self):
        """Test the row layout"""
        rows = bc.run_fig2(fb.core_model.RunConfig())
        assert len(rows) == 21
        assert {r.method for r in rows} == {'qfgd', 'fno_like', 'gd'}
        assert all(r.n == 8 and r.experiment == 'fig2' for r in rows)
        assert [r.iteration for r in rows[:7]] == list(range(1, 8))

    def test_ordering(self):
        """Test qfgd <= fno_like <= gd on iterations 3 to 7"""
        ok = 0
        for seed in range(10):
            rows = bc.run_fig2(fb.core_model.RunConfig(seed=seed))
            q, f, g = (_fig2_errors(rows, m)[2:]
                       for m in ('qfgd', 'fno_like', 'gd'))
            ok += bool(np.all(q <= f) and np.all(f <= g))
        assert ok >= 8

    def test_rates(self):
        """Test that QFGD decays at least 1.5 times faster than gd"""
        rows = bc.run_fig2(fb.core_model.RunConfig())
        k = np.arange(1, 8)
        slope_q = np.polyfit(k, np.log(_fig2_errors(rows, 'qfgd')), 1)[0]
        slope_g = np.polyfit(k, np.log(_fig2_errors(rows, 'gd')), 1)[0]
        assert slope_q <= 1.5 * slope_g < 0

    def test_gd_monotone(self):
        """Test that the gradient descent errors decrease"""
        gd = _fig2_errors(bc.run_fig2(fb.core_model.RunConfig()), 'gd')
        assert np.all(np.diff(gd) < 0)
        assert gd[0] < 1

class TestRunDimSweep:
    def test_rows(self, caplog):
        """Test the sweep layout and the logged rates"""
        with caplog.at_level(logging.INFO, logger='fracbench'):
            rows = bc.run_dim_sweep(fb.core_model.RunConfig(seed=3))
        assert len(rows) == 63
        assert [r.n for r in rows[::21]] == [2, 8, 32]
        assert all(r.experiment == 'sweep' for r in rows)
        assert all(np.isfinite(r.error) for r in rows)
        for dim in (2, 8, 32):
            assert 'sweep dim={} qfgd: decay rate'.format(dim) in caplog.text

    def test_fig2_slice(self):
        """Test that the dimension 8 slice repeats the fig2 errors"""
        cfg = fb.core_model.RunConfig(seed=4)
        sweep = bc.run_dim_sweep(cfg, dims=(8,))
        fig2 = bc.run_fig2(cfg)
        assert [r.error for r in sweep] == [r.error for r in fig2]

    def test_bad_dim(self):
        """Test that a zero dimension is rejected"""
        with pytest.raises(fb.general.PreconditionError):
            bc.run_dim_sweep(fb.core_model.RunConfig(), dims=(0,))

class TestMain:
    def test_prokhorov(self, capsys):
        """Test a distance printed as a key: value line"""
        assert bc.main(['prokhorov', '0:1', '0.5:1']) == 0
        out = capsys.readouterr().out
        assert out.startswith('distance: 0.5')

    def test_precondition_exit(self, capsys):
        """Test exit code 1 on a violated precondition"""
        assert bc.main(['prokhorov', '--alpha', '1.5', '0:1', '1:1']) == 1
        assert 'alpha' in capsys.readouterr().err

    def test_output_exit(self, tmp_path):
        """Test exit code 2 when the CSV cannot be written"""
        blocker = os.path.join(str(tmp_path), 'file')
        open(blocker, 'w').close()
        out = os.path.join(blocker, 'x.csv')
        assert bc.main(['--out', out, 'prokhorov', '0:1', '1:1']) == 2

    def test_bench_stdout(self, capsys):
        """Test that bench without --out writes CSV to stdout"""
        assert bc.main(['bench', 'fig2']) == 0
        out = capsys.readouterr().out
        assert out.startswith(HEADER)
        assert len(out.splitlines()) == 22

    def test_bench_file(self, tmp_path, capsys):
        """Test that bench with --out writes the file"""
        path = os.path.join(str(tmp_path), 'fig2.csv')
        assert bc.main(['--seed', '3', '--out', path, 'bench', 'fig2']) == 0
        assert 'rows: 21' in capsys.readouterr().out
        assert len(pd.read_csv(path)) == 21

    def test_qfgd_csv_alias(self, tmp_path):
        """Test that --csv writes the trace"""
        path = os.path.join(str(tmp_path), 'trace.csv')
        assert bc.main(['qfgd', '--N', '5', '--T', '1e-6', '--noise-index',
                        '1.5', '--grad-tol', '0', '--csv', path]) == 0
        df = pd.read_csv(path)
        assert list(df['iteration']) == list(range(6))

    @pytest.mark.parametrize('argv', [
        ['--grid-n', '256', 'deriv'],
        ['--grid-n', '256', 'deriv', '--variant', 'rl', '--epsilon', '0.05',
         '--alpha-spec', '0.4:0.8'],
        ['--grid-n', '256', 'deriv', '--variant', 'gl', '--func', 'monomial'],
        ['kernel', '--n-mc', '1000'],
        ['kernel', '--literal'],
        ['--grid-n', '256', 'norms', '--kind', 'besov'],
        ['--grid-n', '256', 'norms', '--kind', 'penalty'],
        ['--grid-n', '512', 'approx'],
        ['approx', '--levels', '8', '--func', 'cusp', '--alpha-spec', '0.5'],
        ['--grid-n', '257', 'elliptic', '--modes', '4'],
    ])
    def test_subcommands(self, argv, capsys):
        """Test that every subcommand runs"""
        assert bc.main(argv) == 0
        assert ': ' in capsys.readouterr().out

    def test_unknown_param(self, capsys):
        """Test that an unknown catalog parameter exits with 1"""
        assert bc.main(['deriv', '--param', 'bogus=1']) == 1

    def test_gl_ramp(self, capsys):
        """Test that a ramp order for the gl variant exits with 1"""
        argv = ['--grid-n', '64', 'deriv', '--variant', 'gl', '--alpha-spec',
                '0.4:0.8']
        assert bc.main(argv) == 1
        assert 'constant order' in capsys.readouterr().err

    def test_tol_reaches_theta(self, capsys):
        """Test that --tol sets the blend tie-break threshold"""
        base = ['--grid-n', '256', 'deriv', '--func', 'constant', '--param',
                'c=1e-4']
        assert bc.main(['--tol', '1e-3'] + base) == 0
        assert 'theta: 0.5\n' in capsys.readouterr().out
        assert bc.main(['--tol', '1e-6'] + base) == 0
        assert 'theta: 1.0\n' in capsys.readouterr().out

    def test_bench_rates(self, tmp_path, capsys):
        """Test that bench prints fitted decay rates next to the target"""
        path = os.path.join(str(tmp_path), 'fig1.csv')
        assert bc.main(['--out', path, 'bench', 'fig1']) == 0
        out = capsys.readouterr().out
        assert 'rate_adaptive: ' in out
        assert 'rate_traditional: ' in out
        assert 'target_rate: 1.5\n' in out

    def test_bench_sweep(self, tmp_path, capsys):
        """Test that the dimension sweep reports one rate per dimension"""
        path = os.path.join(str(tmp_path), 'sweep.csv')
        assert bc.main(['--out', path, 'bench', 'sweep']) == 0
        out = capsys.readouterr().out
        assert 'rows: 63' in out
        for dim in (2, 8, 32):
            assert 'rate_qfgd_dim{}: '.format(dim) in out
        assert sorted(set(pd.read_csv(path)['n'])) == [2, 8, 32]

    @pytest.mark.parametrize('argv', [
        ['--grid-n', '256', 'deriv', '--alpha-spec', '0.4:0.8'],
        ['kernel', '--n-mc', '150000'],
        ['--grid-n', '256', 'norms', '--kind', 'holder'],
        ['--grid-n', '512', 'approx'],
        ['prokhorov', '0:0.5,1:0.5', '0.2:1', '--alpha', '0.5'],
        ['qfgd', '--T', '1e-6', '--noise-index', '1.5'],
        ['--grid-n', '257', 'elliptic'],
        ['bench', 'fig2'],
    ])
    def test_worker_invariance(self, argv, tmp_path, capsys):
        """Test identical CSV bytes across repeats and worker counts"""
        blobs = []
        for i, workers in enumerate(('1', '1', '4')):
            path = os.path.join(str(tmp_path), '{}.csv'.format(i))
            assert bc.main(['--workers', workers, '--out', path] + argv) == 0
            with open(path, 'rb') as f:
                blobs.append(f.read())
        assert blobs[0] == blobs[1] == blobs[2]
        assert blobs[0].startswith(HEADER.encode())
