"""
Tests for the constitutive models
"""

import math

import numpy as np
import pytest

from modules.constitutive import (
    ConstitutiveModel, ModelKind, ShearState, apparent_viscosity, builtin_model,
    shear_index, stress_power, validate, zero_shear_ratio,
)
from modules.errors import DomainError, ParameterError, SingularityError

AT_REST = ShearState(0.0, 0.0)


class TestPresets:

    def test_model1_values(self):
        model = builtin_model(ModelKind.MODEL1)
        assert model.alpha == 21.3
        assert model.gamma == pytest.approx(1.74)
        assert model.n_const == -0.28

    def test_lookup_by_name(self):
        assert builtin_model("2b").kind is ModelKind.MODEL2B
        assert builtin_model("Model2A").kind is ModelKind.MODEL2A

    def test_unknown_name(self):
        with pytest.raises(ParameterError):
            ModelKind.parse("model3")

    def test_presets_validate(self, any_model):
        assert validate(any_model).ok


class TestShearIndex:

    def test_newtonian_is_zero(self):
        assert shear_index(builtin_model(ModelKind.NEWTONIAN), 0.7) == 0.0

    def test_model2a_closed_form(self):
        model = builtin_model(ModelKind.MODEL2A)
        assert shear_index(model, 0.0) == 0.0
        assert shear_index(model, 1.0) == pytest.approx(0.5 * (math.exp(-3.3) - 1.0))

    def test_model2b_closed_form(self):
        model = builtin_model(ModelKind.MODEL2B)
        assert shear_index(model, 0.0) == 0.0
        assert shear_index(model, 1.0) == pytest.approx(0.44 * (1.0 / 32.0 - 1.0))

    @pytest.mark.parametrize("c", [-0.01, 1.2])
    def test_concentration_outside_unit_interval(self, c):
        with pytest.raises(DomainError):
            shear_index(builtin_model(ModelKind.MODEL1), c)

    def test_array_input(self):
        n = shear_index(builtin_model(ModelKind.MODEL2A), np.array([0.1, 0.2, 0.3]))
        assert isinstance(n, np.ndarray)
        assert np.all(np.diff(n) < 0)


class TestViscosity:

    def test_newtonian_is_one(self):
        model = builtin_model(ModelKind.NEWTONIAN)
        mu = apparent_viscosity(model, 1.0, 0.0, np.array([0.1, 0.5]), ShearState(np.array([3.0, -2.0]), 1.0))
        np.testing.assert_array_equal(mu, 1.0)

    def test_model1_at_rest(self):
        model = builtin_model(ModelKind.MODEL1)
        assert apparent_viscosity(model, 1.0, 125.28, 0.1, AT_REST) == pytest.approx(math.exp(2.13))

    def test_model2a_large_zero_shear_viscosity(self):
        model = builtin_model(ModelKind.MODEL2A)
        mu = apparent_viscosity(model, 7.1e-9, 1.0e-6, 0.1, AT_REST)
        n = 0.5 * math.expm1(-0.33)
        assert mu == pytest.approx(math.exp(n * math.log(7.1e-9)))
        assert 13.0 < mu < 15.0

    def test_shear_thinning(self):
        model = builtin_model(ModelKind.MODEL1)
        s = np.linspace(0.0, 5.0, 11)
        mu = apparent_viscosity(model, 1.0, 125.28, 0.2, ShearState(s, 0.0))
        assert np.all(np.diff(mu) < 0)

    def test_shear_thinning_sampled(self, any_model):
        rng = np.random.default_rng(11)
        c = rng.uniform(0.0, 1.0, size=200)
        gentle = ShearState(rng.normal(size=200), rng.normal(size=200))
        scale = 1.0 + rng.uniform(0.0, 3.0, size=200)
        harder = ShearState(gentle.s_theta * scale, gentle.s_z * scale)
        mu_gentle = apparent_viscosity(any_model, any_model.beta, 10.0, c, gentle)
        mu_harder = apparent_viscosity(any_model, any_model.beta, 10.0, c, harder)
        assert np.all(mu_harder <= mu_gentle * (1.0 + 1e-12))

    def test_model1_low_shear_value(self):
        mu = apparent_viscosity(builtin_model(ModelKind.MODEL1), 1.0, 125.28, 0.0, ShearState(0.1, 0.0))
        assert mu == pytest.approx(2.2528 ** -0.28)
        assert abs(mu - 0.7943) < 5e-3

    @pytest.mark.parametrize("kind", [ModelKind.MODEL2A, ModelKind.MODEL2B])
    def test_index_models_unit_viscosity_without_species(self, kind):
        model = builtin_model(kind)
        shear = ShearState(np.array([0.0, 0.5, 3.0]), np.array([1.0, -2.0, 0.0]))
        mu = apparent_viscosity(model, model.beta, 1.0e-6, 0.0, shear)
        np.testing.assert_array_equal(mu, 1.0)

    def test_chemical_thickening(self):
        model = builtin_model(ModelKind.MODEL1)
        c = np.linspace(0.1, 0.3, 5)
        mu = apparent_viscosity(model, 1.0, 125.28, c, ShearState(1.0, 0.5))
        assert np.all(np.diff(mu) > 0)

    def test_both_shear_components_count(self):
        model = builtin_model(ModelKind.MODEL1)
        theta_only = apparent_viscosity(model, 1.0, 10.0, 0.1, ShearState(0.6, 0.8))
        combined = apparent_viscosity(model, 1.0, 10.0, 0.1, ShearState(1.0, 0.0))
        assert theta_only == pytest.approx(combined)

    def test_negative_parameters(self):
        with pytest.raises(ParameterError):
            apparent_viscosity(builtin_model(ModelKind.MODEL1), 1.0, -1.0, 0.1, AT_REST)

    def test_zero_shear_singularity(self):
        with pytest.raises(SingularityError):
            apparent_viscosity(builtin_model(ModelKind.MODEL1), 0.0, 1.0, 0.1, AT_REST)

    def test_zero_base_is_fine_for_newtonian(self):
        assert apparent_viscosity(builtin_model(ModelKind.NEWTONIAN), 0.0, 0.0, 0.1, AT_REST) == 1.0

    def test_zero_shear_ratio_only_for_model1(self):
        assert zero_shear_ratio(builtin_model(ModelKind.MODEL2B), 0.3) == 1.0
        assert zero_shear_ratio(builtin_model(ModelKind.MODEL1), 0.0) == 1.0

    def test_stress_power_non_negative(self, any_model):
        rng = np.random.default_rng(7)
        shear = ShearState(rng.normal(size=50), rng.normal(size=50))
        c = rng.uniform(0.0, 1.0, size=50)
        mu = apparent_viscosity(any_model, 1.0, 10.0, c, shear)
        assert np.all(stress_power(mu, shear) >= 0)


class TestValidate:

    def test_negative_gamma(self):
        model = builtin_model(ModelKind.MODEL1).with_overrides(gamma=-1.0)
        report = validate(model)
        assert not report
        assert "gamma negative" in report.violations

    def test_missing_exponent(self):
        model = ConstitutiveModel(ModelKind.MODEL1, alpha=1.0, beta=1.0, gamma=1.0)
        assert "n missing" in validate(model).violations

    def test_missing_sigma(self):
        model = ConstitutiveModel(ModelKind.MODEL2B, alpha=1.0, beta=1.0, gamma=1.0)
        assert "sigma missing" in validate(model).violations

    def test_non_finite(self):
        model = builtin_model(ModelKind.MODEL2A).with_overrides(alpha=float('nan'))
        assert "alpha not finite" in validate(model).violations

    def test_warnings_do_not_fail(self):
        model = builtin_model(ModelKind.MODEL1).with_overrides(beta=0.0, n_const=0.1)
        report = validate(model)
        assert report.ok
        assert "zero-shear singularity possible when n<0" in report.warnings
        assert "shear index positive (shear-thickening)" in report.warnings
