"""Tests for environments, potentials and the reversible measure"""

import math

import numpy as np
import pytest

from sinaispectra.domain.environment import (
    DisorderLaw,
    Environment,
    Potential,
    dirichlet_form,
    environment_of,
    generator_inner_product,
    potential_of,
    rescale,
    reversible_measure,
    sample_environment,
)
from sinaispectra.domain.exceptions import ConfigurationError, EllipticityError, WindowError
from tests.builders import EnvironmentBuilder


class TestDisorderLaw:
    """Tests for disorder law parsing and moments"""

    def test_from_spec_parses_kind_and_parameter(self):
        """Should parse 'kind:parameter' strings"""
        # Act
        law = DisorderLaw.from_spec("two_point:0.3")

        # Assert
        assert law.kind == "two_point"
        assert law.parameter == 0.3

    def test_from_spec_rejects_unknown_kind(self):
        """Should raise ConfigurationError for an unknown law"""
        with pytest.raises(ConfigurationError, match="Unknown disorder law"):
            DisorderLaw.from_spec("gaussian:0.3")

    def test_uniform_rejects_kappa_outside_range(self):
        """Should require 0 < kappa < 1/2"""
        with pytest.raises(ConfigurationError, match="kappa"):
            DisorderLaw.symmetric_uniform(0.6)

    def test_two_point_variance(self, two_point_law):
        """Should give sigma^2 = ln(7/3)^2 for p = 0.3"""
        assert two_point_law.sigma2 == pytest.approx(math.log(7 / 3) ** 2)

    def test_half_is_degenerate(self):
        """Should flag two_point(0.5) as the degenerate law"""
        assert DisorderLaw.two_point(0.5).is_degenerate
        assert not DisorderLaw.two_point(0.3).is_degenerate


class TestSampleEnvironment:
    """Tests for seeded environment sampling"""

    def test_degenerate_law_gives_half_everywhere(self):
        """Should give omega = 1/2 on every site for two_point(0.5)"""
        # Act
        env = sample_environment(DisorderLaw.two_point(0.5), (-5, 5), seed=1)

        # Assert
        assert np.all(env.omega == 0.5)

    def test_same_seed_same_environment(self, two_point_law):
        """Should reproduce the same draws for the same seed"""
        # Act
        first = sample_environment(two_point_law, (-10, 10), seed=7)
        second = sample_environment(two_point_law, (-10, 10), seed=7)

        # Assert
        assert np.array_equal(first.omega, second.omega)
        assert first.window == (-10, 10)

    def test_log_ratio_is_centered(self, two_point_law):
        """Should have ln(omega/(1-omega)) centered within 3 standard errors"""
        # Arrange
        env = sample_environment(two_point_law, (0, 999_999), seed=11)

        # Act
        logs = np.log(env.omega / (1.0 - env.omega))

        # Assert
        se = logs.std() / math.sqrt(logs.size)
        assert abs(logs.mean()) <= 3.0 * se

    def test_empty_window_raises(self, two_point_law):
        """Should reject a window with x_hi < x_lo"""
        with pytest.raises(WindowError, match="Empty window"):
            sample_environment(two_point_law, (3, 2), seed=0)

    @pytest.mark.parametrize("kappa", [0.0, -0.1, 0.5])
    def test_explicit_invalid_kappa_raises(self, two_point_law, kappa):
        """Should reject an explicit kappa outside (0, 1/2) instead of using the law's"""
        with pytest.raises(ConfigurationError, match="kappa must lie in"):
            sample_environment(two_point_law, (-2, 2), seed=1, kappa=kappa)

    def test_explicit_kappa_is_recorded(self, two_point_law):
        """Should keep an explicit kappa smaller than the law's margin"""
        # Act
        env = sample_environment(two_point_law, (-2, 2), seed=1, kappa=0.2)

        # Assert
        assert env.kappa == 0.2
        assert two_point_law.kappa == pytest.approx(0.3)


class TestEnvironment:
    """Tests for Environment validation"""

    def test_rejects_omega_outside_ellipticity(self):
        """Should raise ConfigurationError naming the offending site"""
        with pytest.raises(ConfigurationError, match="site 1 violates kappa"):
            Environment(x_lo=0, omega=np.array([0.5, 0.95]), kappa=0.1)

    def test_restrict_keeps_sites(self, seeded_environment):
        """Should restrict to a sub-window with the same jump probabilities"""
        # Act
        sub = seeded_environment.restrict(-3, 4)

        # Assert
        assert sub.window == (-3, 4)
        assert np.array_equal(sub.omega, seeded_environment.omega_at(np.arange(-3, 5)))


class TestPotential:
    """Tests for potential_of and environment_of"""

    def test_flat_environment_has_zero_potential(self, flat_environment):
        """Should give V = 0 for omega = 1/2"""
        assert np.allclose(potential_of(flat_environment).values, 0.0)

    def test_constant_drift_potential(self, drifting_environment):
        """Should give V(3) = 3 ln(7/3) for omega = 0.3 on [0, 3]"""
        # Act
        potential = potential_of(drifting_environment)

        # Assert
        assert potential.x_lo == -1
        assert float(potential.value_at(0)) == 0.0
        assert float(potential.value_at(3)) == pytest.approx(3 * math.log(7 / 3))

    def test_environment_of_inverts_increments(self):
        """Should recover omega = 0.3 from increments ln(7/3)"""
        # Arrange
        values = np.arange(5) * math.log(7 / 3)

        # Act
        env = environment_of(Potential(x_lo=-1, values=values), kappa=0.1)

        # Assert
        assert env.window == (0, 3)
        assert np.allclose(env.omega, 0.3)

    def test_round_trip_recovers_environment(self, seeded_environment):
        """Should recover the environment from its potential"""
        # Act
        recovered = environment_of(potential_of(seeded_environment), seeded_environment.kappa)

        # Assert
        assert recovered.window == seeded_environment.window
        assert np.allclose(recovered.omega, seeded_environment.omega, rtol=0, atol=1e-12)

    def test_environment_of_rejects_steep_increment(self):
        """Should raise EllipticityError when an increment exceeds ln((1-kappa)/kappa)"""
        with pytest.raises(EllipticityError):
            environment_of(Potential(x_lo=0, values=np.array([0.0, 5.0])), kappa=0.1)


class TestRescale:
    """Tests for the rescaled potential"""

    def test_linear_potential_at_half(self):
        """Should give V_4(1/2) = 2/sqrt(4) = 1 for V(k) = k"""
        # Arrange
        potential = Potential(x_lo=0, values=np.arange(5.0))

        # Act
        rescaled = rescale(potential, 4, interval=(0.0, 1.0))

        # Assert
        assert float(rescaled.value_at(0.5)) == pytest.approx(1.0)
        assert float(rescaled.value_at(0.375)) == pytest.approx((1.0 + 2.0) / 4.0)

    def test_uncovered_interval_raises(self):
        """Should raise WindowError when the potential does not cover [-N, N]"""
        potential = Potential(x_lo=0, values=np.arange(5.0))
        with pytest.raises(WindowError, match="does not cover"):
            rescale(potential, 4)


class TestReversibleMeasure:
    """Tests for the reversible measure and the Dirichlet form"""

    def test_flat_measure_is_two(self, flat_environment):
        """Should give mu = 2 for omega = 1/2"""
        assert np.allclose(reversible_measure(flat_environment).weights, 2.0)

    def test_drift_measure_value(self, drifting_environment):
        """Should give mu(1) = (3/7)/0.3 = 10/7 for omega = 0.3"""
        assert float(np.exp(reversible_measure(drifting_environment).log_at(1))) == (
            pytest.approx(10 / 7)
        )

    def test_measure_times_omega_is_exp_minus_potential(self, seeded_environment):
        """Should satisfy mu(x) omega_x = exp(-V(x))"""
        # Arrange
        measure = reversible_measure(seeded_environment)
        potential = potential_of(seeded_environment)

        # Act
        lhs = measure.weights * seeded_environment.omega
        rhs = np.exp(-potential.value_at(seeded_environment.sites))

        # Assert
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=0)

    def test_dirichlet_form_matches_inner_product(self, seeded_environment):
        """Should give (f, Lf)_mu = Dirichlet form for f vanishing on the window edges"""
        # Arrange
        rng = np.random.default_rng(0)
        f = np.zeros(len(seeded_environment))
        f[1:-1] = rng.normal(size=len(seeded_environment) - 2)

        # Act
        form = dirichlet_form(seeded_environment, f)
        inner = generator_inner_product(seeded_environment, f)

        # Assert
        assert inner == pytest.approx(form, rel=1e-10)

    def test_builder_increments(self):
        """Should build an environment whose potential has the given increments"""
        # Arrange
        increments = [0.5, -1.0, 0.25]

        # Act
        env = EnvironmentBuilder().on_window(1, 3).with_increments(increments).build()

        # Assert
        assert np.allclose(potential_of(env).increments(), increments)
