"""Constitutive-model tests: frozen oracle values, properties, derivatives.

High-precision reference values are recomputed live with mpmath (an
independent evaluation path from the numpy implementation); integral and
derivative checks use quadrature/finite-difference oracles.
"""

import numpy as np
import pytest
from hypothesis import given, strategies as st
from mpmath import mp, mpf, power

from poreshock import materials as mat

mp.dps = 40


def mp_cold_pressure(m, rho):
    x = mpf(rho) / mpf(m.rho0)
    term = power(x, mpf(7) / 3) - power(x, mpf(5) / 3)
    corr = 1 + mpf(3) / 4 * (mpf(m.K0p) - 4) * (power(x, mpf(2) / 3) - 1)
    return mpf(3) / 2 * mpf(m.K0) * term * corr


class TestColdPressure:
    def test_zero_at_reference_density(self, m):
        assert mat.cold_pressure(m, m.rho0) == 0.0

    def test_matches_high_precision_oracle_at_compression(self, m):
        got = mat.cold_pressure(m, 1.1 * m.rho0)
        want = float(mp_cold_pressure(m, 1.1 * m.rho0))
        assert got == pytest.approx(want, rel=1e-13)
        assert got == pytest.approx(1.883e9, rel=1e-3)

    def test_tension_below_reference_density(self, m):
        got = mat.cold_pressure(m, 0.95 * m.rho0)
        assert got < 0.0
        assert got == pytest.approx(float(mp_cold_pressure(m, 0.95 * m.rho0)),
                                    rel=1e-13)

    def test_strictly_increasing_on_compression_branch(self, m):
        rho = np.linspace(m.rho0, 2 * m.rho0, 1000)
        p = mat.cold_pressure(m, rho)
        assert np.all(np.diff(p) > 0.0)

    def test_rejects_nonpositive_density(self, m):
        with pytest.raises(ValueError):
            mat.cold_pressure(m, -1.0)
        with pytest.raises(ValueError):
            mat.cold_pressure(m, np.nan)

    def test_derivative_matches_centered_differences(self, m):
        rho = np.geomspace(0.6 * m.rho0, 2.8 * m.rho0, 64)
        h = rho * 1e-7
        fd = (mat.cold_pressure(m, rho + h) - mat.cold_pressure(m, rho - h)) / (2 * h)
        an = mat.cold_pressure_derivative(m, rho)
        assert np.allclose(an, fd, rtol=1e-6)

    def test_derivative_at_reference_is_bulk_modulus_over_density(self, m):
        assert mat.cold_pressure_derivative(m, m.rho0) == pytest.approx(
            m.K0 / m.rho0, rel=1e-12)


class TestGruneisen:
    def test_reference_value(self, m):
        assert mat.gruneisen(m, m.rho0) == pytest.approx(1.870111, rel=1e-12)

    def test_infinite_compression_limit(self, m):
        assert mat.gruneisen(m, 1e9 * m.rho0) == pytest.approx(m.Gamma0, rel=1e-6)

    def test_double_density(self, m):
        want = m.Gamma0 + m.gamma1 / 2 + m.gamma2 / 4
        assert mat.gruneisen(m, 2 * m.rho0) == pytest.approx(want, rel=1e-14)


class TestShearModulus:
    def test_reference_conditions(self, m):
        assert mat.shear_modulus(m, 0.0, m.T0) == pytest.approx(5.314e9, rel=1e-14)

    def test_pressure_hardening(self, m):
        want = 5.314e9 + 3.3774e9
        assert mat.shear_modulus(m, 1e9, m.T0) == pytest.approx(want, rel=1e-14)

    def test_floor_clamps_hot_states(self, m):
        # far above melt the raw value is negative; the floor holds
        g = mat.shear_modulus(m, 0.0, 10000.0)
        assert g == pytest.approx(0.01 * m.G0)


class TestMeltCurve:
    def test_reference_pressure(self, m):
        assert mat.melt_temperature(m, m.pref) == pytest.approx(478.0, rel=1e-14)

    def test_one_scale_above_reference(self, m):
        want = float(mpf(478) * power(2, 1 / mpf("2.8855")))
        got = mat.melt_temperature(m, m.pref + m.a_melt)
        assert got == pytest.approx(want, rel=1e-13)
        assert got == pytest.approx(607.8, abs=0.05)

    @given(st.floats(min_value=1e5, max_value=99e9),
           st.floats(min_value=1e5, max_value=1e9))
    def test_monotone_increasing_in_pressure(self, p, dp):
        m = mat.rdx()
        assert mat.melt_temperature(m, p + dp) > mat.melt_temperature(m, p)

    def test_deep_tension_is_clamped_positive(self, m):
        assert mat.melt_temperature(m, -10e9) > 0.0


class TestJohnsonCook:
    def test_reference_conditions_give_A(self, m):
        got = mat.yield_stress_jc(m, 0.0, m.epsdot0, m.Tref, 0.0)
        assert got == pytest.approx(0.3e9, rel=1e-14)

    def test_hardening_oracle(self, m):
        want = float(mpf("0.3e9") + mpf("0.1e9") * power(mpf("0.1"), mpf("0.1")))
        got = mat.yield_stress_jc(m, 0.1, m.epsdot0, m.Tref, 0.0)
        assert got == pytest.approx(want, rel=1e-13)

    def test_zero_at_melt(self, m):
        p = 2e9
        tm = mat.melt_temperature(m, p)
        assert mat.yield_stress_jc(m, 0.2, m.epsdot0, tm, p) == 0.0
        assert mat.yield_stress_jc(m, 0.2, m.epsdot0, tm + 500.0, p) == 0.0

    def test_rate_bracket_clamped_below_reference_rate(self, m):
        slow = mat.yield_stress_jc(m, 0.0, 1e-3 * m.epsdot0, m.Tref, 0.0)
        assert slow == pytest.approx(0.3e9, rel=1e-14)

    def test_rejects_negative_strain(self, m):
        with pytest.raises(ValueError):
            mat.yield_stress_jc(m, -0.1, m.epsdot0, 300.0, 0.0)
        with pytest.raises(ValueError):
            mat.yield_stress_jc(m, 0.1, -1.0, 300.0, 0.0)

    @given(eps=st.floats(0.0, 2.0), scale=st.floats(1.0, 1e4),
           T=st.floats(200.0, 470.0), p=st.floats(0.0, 20e9))
    def test_nonnegative_and_rate_monotone(self, eps, scale, T, p):
        m = mat.rdx()
        base = mat.yield_stress_jc(m, eps, m.epsdot0, T, p)
        faster = mat.yield_stress_jc(m, eps, scale * m.epsdot0, T, p)
        assert base >= 0.0
        assert faster >= base * (1.0 - 1e-12)

    @given(eps=st.floats(0.0, 2.0), deps=st.floats(1e-6, 1.0),
           T=st.floats(200.0, 470.0))
    def test_hardening_monotone_in_strain(self, eps, deps, T):
        m = mat.rdx()
        lo = mat.yield_stress_jc(m, eps, m.epsdot0, T, 0.0)
        hi = mat.yield_stress_jc(m, eps + deps, m.epsdot0, T, 0.0)
        assert hi >= lo * (1.0 - 1e-12)

    @given(T=st.floats(298.0, 460.0), dT=st.floats(1.0, 100.0))
    def test_thermal_softening_monotone(self, T, dT):
        m = mat.rdx()
        warm = mat.yield_stress_jc(m, 0.1, m.epsdot0, T + dT, 0.0)
        cool = mat.yield_stress_jc(m, 0.1, m.epsdot0, T, 0.0)
        assert warm <= cool * (1.0 + 1e-12)


class TestMieGruneisen:
    def test_zero_at_reference(self, m):
        assert mat.pressure_mie_gruneisen(m, m.rho0, 0.0, 0.0) == 0.0

    def test_thermal_term_composition(self, m):
        want = 1.870111 * m.rho0 * 1e5
        got = mat.pressure_mie_gruneisen(m, m.rho0, 1e5, 0.0)
        assert got == pytest.approx(want, rel=1e-6)

    def test_cold_curve_when_energies_balance(self, m):
        rho = 1.3 * m.rho0
        assert mat.pressure_mie_gruneisen(m, rho, 7.7e5, 7.7e5) == pytest.approx(
            mat.cold_pressure(m, rho), rel=1e-14)

    @given(de=st.floats(-1e6, 1e6))
    def test_linear_in_thermal_energy(self, de):
        m = mat.rdx()
        rho = 1.2 * m.rho0
        slope = mat.gruneisen(m, rho) * rho
        base = mat.pressure_mie_gruneisen(m, rho, 0.0, 0.0)
        got = mat.pressure_mie_gruneisen(m, rho, de, 0.0)
        assert got == pytest.approx(base + slope * de, rel=1e-10, abs=1e-3)

    def test_rejects_nonfinite_energy(self, m):
        with pytest.raises(ValueError):
            mat.pressure_mie_gruneisen(m, m.rho0, np.inf, 0.0)


class TestColdEnergy:
    def test_reference_value_is_e0(self, m):
        assert mat.cold_energy_hydro(m, m.rho0) == pytest.approx(0.0, abs=1e-6)

    def test_positive_on_compression(self, m):
        rho = np.linspace(1.01, 2.5, 40) * m.rho0
        assert np.all(mat.cold_energy_hydro(m, rho) > 0.0)

    def test_matches_fine_trapezoid_oracle(self, m):
        # independent quadrature: dense trapezoid on the same integrand
        rho1 = 1.2 * m.rho0
        grid = np.linspace(m.rho0, rho1, 200001)
        integrand = mat.cold_pressure(m, grid) / grid ** 2
        want = np.trapezoid(integrand, grid)
        got = mat.cold_energy_hydro(m, rho1)
        assert got == pytest.approx(want, rel=1e-8)

    def test_tension_side_also_positive(self, m):
        assert mat.cold_energy_hydro(m, 0.8 * m.rho0) > 0.0

    def test_outside_table_falls_back_to_quadrature(self, m):
        rho = 3.5 * m.rho0
        grid = np.linspace(m.rho0, rho, 400001)
        want = np.trapezoid(mat.cold_pressure(m, grid) / grid ** 2, grid)
        assert mat.cold_energy_hydro(m, rho) == pytest.approx(want, rel=1e-7)

    def test_fundamental_theorem_against_cold_pressure(self, m):
        # d(e_c)/drho * rho^2 == p_c
        rho = np.geomspace(0.7 * m.rho0, 2.6 * m.rho0, 48)
        h = rho * 2e-6
        de = (mat.cold_energy_hydro(m, rho + h)
              - mat.cold_energy_hydro(m, rho - h)) / (2 * h)
        assert np.allclose(de * rho ** 2, mat.cold_pressure(m, rho),
                           rtol=1e-6, atol=20.0)


class TestTemperature:
    def test_reference(self, m):
        assert mat.temperature_from_state(m, 5.0, 5.0) == m.T0

    def test_linear_law(self, m):
        assert mat.temperature_from_state(m, m.cv * 100.0, 0.0) == pytest.approx(
            m.T0 + 100.0)

    def test_tabulated_heat_capacity(self, m):
        got = mat.temperature_from_state(m, 1980.0 * 500.0, 0.0)
        assert got == pytest.approx(m.T0 + 500.0, rel=1e-14)


class TestSoundSpeed:
    def test_hydrodynamic_reference(self, m):
        want = np.sqrt(m.K0 / m.rho0)
        assert mat.bulk_sound_speed(m, m.rho0, 0.0) == pytest.approx(want, rel=1e-12)
        assert want == pytest.approx(2687.0, abs=1.0)

    def test_shear_stiffening(self, m):
        c0 = mat.bulk_sound_speed(m, m.rho0, 0.0)
        c1 = mat.bulk_sound_speed(m, m.rho0, m.G0)
        assert c1 > c0

    def test_reference_with_shear(self, m):
        want = np.sqrt((m.K0 + 4.0 * m.G0 / 3.0) / m.rho0)
        assert mat.bulk_sound_speed(m, m.rho0, m.G0) == pytest.approx(want, rel=1e-12)


class TestModelValidation:
    def test_rejects_bad_reference_density(self):
        with pytest.raises(ValueError):
            mat.rdx(rho0=-1.0)

    def test_rejects_bad_taylor_quinney(self):
        with pytest.raises(ValueError):
            mat.rdx(beta=1.5)

    def test_overrides(self, m):
        m2 = m.with_overrides(beta=0.8)
        assert m2.beta == 0.8
        assert m2.K0 == m.K0
