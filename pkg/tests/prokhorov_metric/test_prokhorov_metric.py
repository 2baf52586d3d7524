import logging

import numpy as np
import pytest

import fracbench as fb

pm = fb.prokhorov_metric

def _random_measure(rng, max_atoms=8):
    k = int(rng.integers(1, max_atoms + 1))
    atoms = np.unique(np.round(rng.uniform(0., 3., k), 6))
    weights = rng.dirichlet(np.ones(len(atoms)))
    weights[-1] = 1. - weights[:-1].sum()
    return pm.DiscreteMeasure(atoms, weights)

def _chain():
    mu = pm.DiscreteMeasure.point_mass(0.)
    nu = pm.DiscreteMeasure([0., 5.], [0.9, 0.1])
    lam = pm.DiscreteMeasure([0., 5., 10.], [0.8, 0.1, 0.1])
    return mu, nu, lam

class TestDiscreteMeasure:
    def test_weights_sum(self):
        """Test that weights must sum to one"""
        with pytest.raises(fb.general.PreconditionError):
            pm.DiscreteMeasure([0., 1.], [0.5, 0.6])

    def test_increasing(self):
        """Test that atoms must be strictly increasing"""
        with pytest.raises(fb.general.PreconditionError):
            pm.DiscreteMeasure([1., 0.], [0.5, 0.5])

    def test_parse(self):
        """Test parsing atom:weight lists in any order"""
        mu = pm.parse_measure('2:0.25, 0:0.75')
        assert list(mu.atoms) == [0., 2.]
        assert list(mu.weights) == [0.75, 0.25]
        assert len(mu) == 2

    def test_parse_error(self):
        """Test that a malformed entry is rejected"""
        with pytest.raises(fb.general.PreconditionError):
            pm.parse_measure('0-1')

class TestFracProkhorov:
    def test_identical(self):
        """Test that a measure is at distance 0 from itself"""
        mu = pm.DiscreteMeasure([0., 1., 2.], [0.2, 0.3, 0.5])
        assert pm.frac_prokhorov(mu, mu, 0.7) == 0.

    @pytest.mark.parametrize('alpha', [0.3, 0.6, 1.])
    def test_close_point_masses(self, alpha):
        """Test delta_0 against delta_0.5"""
        d = pm.frac_prokhorov(pm.DiscreteMeasure.point_mass(0.),
                              pm.DiscreteMeasure.point_mass(0.5), alpha)
        assert d == pytest.approx(0.5, abs=1e-3)

    def test_far_point_masses(self):
        """Test that the mass term caps the distance at 1"""
        d = pm.frac_prokhorov(pm.DiscreteMeasure.point_mass(0.),
                              pm.DiscreteMeasure.point_mass(2.), 0.5)
        assert d == pytest.approx(1., abs=1e-3)

    def test_chain_values(self):
        """Test the distances of a small mass moving away"""
        mu, nu, lam = _chain()
        assert pm.frac_prokhorov(mu, nu, 0.5) == pytest.approx(0.01, abs=1e-5)
        assert pm.frac_prokhorov(mu, lam, 0.5) == pytest.approx(0.04, abs=1e-5)
        assert pm.frac_prokhorov(mu, nu, 1.) == pytest.approx(0.1, abs=1e-5)

    def test_monotone_in_alpha(self):
        """Test that the distance does not decrease with alpha"""
        mu = pm.DiscreteMeasure.point_mass(0.)
        for t in np.arange(1, 10) / 10.:
            nu = pm.DiscreteMeasure.point_mass(t)
            values = [pm.frac_prokhorov(mu, nu, a) for a in (0.2, 0.5, 0.8, 1.)]
            assert np.all(np.diff(values) >= -2e-6)

    def test_diameter_bound(self):
        """Test d <= max(1, diameter)"""
        rng = np.random.default_rng(1)
        for _ in range(20):
            mu, nu = _random_measure(rng), _random_measure(rng)
            both = np.concatenate([mu.atoms, nu.atoms])
            d = pm.frac_prokhorov(mu, nu, 0.5)
            assert 0 <= d <= max(1., np.ptp(both)) + 1e-6

    def test_bracket(self):
        """Test that feasibility flips within one tolerance"""
        tol = 1e-6
        mu = pm.DiscreteMeasure([0., 1.], [0.6, 0.4])
        nu = pm.DiscreteMeasure([0.3, 1.7], [0.5, 0.5])
        d = pm.frac_prokhorov(mu, nu, 0.8, tol)
        feasible = pm._feasible_factory(mu, nu, 0.8)
        assert feasible(d + tol)
        assert not feasible(d - tol)

    def test_too_many_atoms(self):
        """Test that more than 16 atoms in total are rejected"""
        mu = pm.DiscreteMeasure(np.arange(9.), np.full(9, 1. / 9))
        with pytest.raises(fb.general.PreconditionError):
            pm.frac_prokhorov(mu, mu, 1.)

    def test_bad_alpha(self):
        """Test that alpha outside (0, 1] is rejected"""
        mu = pm.DiscreteMeasure.point_mass(0.)
        with pytest.raises(fb.general.PreconditionError):
            pm.frac_prokhorov(mu, mu, 1.5)

class TestMetricAxioms:
    def test_duplicates(self):
        """Test that repeated measures are at distance 0"""
        mu = pm.DiscreteMeasure([0., 1.], [0.5, 0.5])
        nu = pm.DiscreteMeasure.point_mass(0.5)
        assert pm.frac_prokhorov(mu, pm.parse_measure('0:0.5,1:0.5'), 1.) == 0.
        report = pm.metric_axioms_check([mu, mu, nu], 1.)
        assert report.total == 0
        assert report.n_measures == 3

    def test_random_triples_classical(self):
        """Test the triangle inequality at alpha = 1 on random triples"""
        rng = np.random.default_rng(12345)
        triangle = symmetry = 0
        for _ in range(200):
            report = pm.metric_axioms_check(
                [_random_measure(rng) for _ in range(3)], 1., tol=1e-6)
            triangle += report.triangle
            symmetry += report.symmetry
        assert triangle == 0
        assert symmetry == 0

    def test_random_triples_quasi(self):
        """Test the relaxed triangle inequality at alpha = 1/2"""
        rng = np.random.default_rng(54321)
        for _ in range(50):
            report = pm.metric_axioms_check(
                [_random_measure(rng) for _ in range(3)], 0.5)
            assert report.quasi_triangle == 0
            assert report.negativity == report.identity == 0
            assert report.quasi_constant == 2.

    def test_strict_violation(self, caplog):
        """Test that alpha < 1 can break the plain triangle inequality"""
        with caplog.at_level(logging.WARNING, logger='fracbench'):
            report = pm.metric_axioms_check(list(_chain()), 0.5)
        assert report.triangle >= 1
        assert report.quasi_triangle == 0
        assert 'triangle' in caplog.text

    def test_too_few(self):
        """Test that two measures are rejected"""
        mu = pm.DiscreteMeasure.point_mass(0.)
        with pytest.raises(fb.general.PreconditionError):
            pm.metric_axioms_check([mu, mu], 1.)
