"""Benchmark Hamiltonians: values, gradients, and construction guards."""

import math

import numpy as np
import pytest

import mgwave as mg
from mgwave.errors import ModelDefinitionError


class TestHarmonic:
    def test_minimum(self):
        m = mg.harmonic_excited()
        q0 = tuple(mg.TABLE_HARMONIC.q0)
        assert float(m.potential(q0)) == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(m.gradient(q0), 0.0, atol=1e-12)

    def test_value_at_origin_quadratic_form_oracle(self):
        m = mg.harmonic_excited()
        K, q0 = mg.TABLE_HARMONIC.K, mg.TABLE_HARMONIC.q0
        oracle = 0.5 * q0 @ K @ q0
        assert oracle == pytest.approx(139.307, abs=1e-3)
        assert float(m.potential((0.0, 0.0, 0.0))) == pytest.approx(oracle, rel=1e-12)

    def test_gradient_at_origin_matvec_oracle(self):
        m = mg.harmonic_excited()
        K, q0 = mg.TABLE_HARMONIC.K, mg.TABLE_HARMONIC.q0
        grad = np.array([float(x) for x in m.gradient((0.0, 0.0, 0.0))])
        assert np.allclose(grad, -K @ q0, rtol=1e-12)
        assert np.allclose(grad, [14.378, -7.665, -17.759], atol=1e-3)

    def test_inverse_mass_is_frequency_diagonal(self):
        m = mg.harmonic_excited()
        assert np.allclose(m.inv_mass, np.diag([2.0, 1.0, 2.5]))
        assert np.allclose(m.inv_mass_diagonal, [2.0, 1.0, 2.5])

    def test_non_spd_force_matrix_rejected(self):
        with pytest.raises(ModelDefinitionError):
            mg.HarmonicParams(
                K=np.array([[1.0, 2.0], [2.0, 1.0]]),  # eigenvalues 3, -1
                q0=np.zeros(2),
                omegas=np.ones(2),
            )


class TestSecrestJohnson:
    def test_values(self):
        m = mg.secrest_johnson()
        assert float(m.potential((0.0, 0.0))) == pytest.approx(1.0, rel=1e-14)
        assert float(m.potential((0.0, 24.0))) == pytest.approx(math.exp(-7.2), rel=1e-12)

    def test_morse_asymptote(self):
        m = mg.secrest_johnson()
        # far up the stretch coordinate the Morse term approaches the well depth
        assert float(m.potential((200.0, 400.0))) == pytest.approx(20.0, abs=1e-6)

    def test_masses(self):
        m = mg.secrest_johnson()
        assert np.allclose(m.inv_mass, np.diag([1.0, 1.5]))


class TestHenonHeiles:
    def test_origin(self):
        m = mg.henon_heiles(dims=4)
        z = (0.0,) * 4
        assert float(m.potential(z)) == 0.0
        assert np.allclose(m.gradient(z), 0.0)

    def test_direct_sum_oracle_d8(self):
        lam = 0.111803
        m = mg.henon_heiles(dims=8, coupling=lam)
        q = (2.0,) * 8
        # quadratic part 8*(4/2)=16 plus 7 coupling terms (8 - 8/3) each
        oracle = 16.0 + lam * 7 * (8.0 - 8.0 / 3.0)
        assert oracle == pytest.approx(16.0 + lam * 112.0 / 3.0, rel=1e-14)
        assert float(m.potential(q)) == pytest.approx(oracle, rel=1e-12)

    def test_scalar_oracle_d2(self):
        lam = 0.111803
        m = mg.henon_heiles(dims=2, coupling=lam)
        assert float(m.potential((1.0, 1.0))) == pytest.approx(1.0 + 2 * lam / 3.0, rel=1e-12)

    def test_too_few_dims_rejected(self):
        with pytest.raises(ModelDefinitionError):
            mg.henon_heiles(dims=1)


class TestModelGuards:
    def test_wrong_gradient_rejected_by_fd_check(self):
        with pytest.raises(ModelDefinitionError, match="finite differences"):
            mg.Model(
                label="broken",
                dims=1,
                inv_mass=np.eye(1),
                potential=lambda q: q[0] ** 2,
                gradient=lambda q: (q[0],),  # should be 2*q
            )

    def test_asymmetric_inverse_mass_rejected(self):
        with pytest.raises(ModelDefinitionError, match="symmetric"):
            mg.Model(
                label="bad",
                dims=2,
                inv_mass=np.array([[1.0, 0.2], [0.0, 1.0]]),
                potential=lambda q: q[0] ** 2 + q[1] ** 2,
                gradient=lambda q: (2 * q[0], 2 * q[1]),
            )

    def test_indefinite_inverse_mass_rejected(self):
        with pytest.raises(ModelDefinitionError, match="positive definite"):
            mg.Model(
                label="bad",
                dims=1,
                inv_mass=np.array([[-1.0]]),
                potential=lambda q: q[0] ** 2,
                gradient=lambda q: (2 * q[0],),
            )

    def test_full_inverse_mass_kinetic(self):
        w = np.array([[1.0, 0.3], [0.3, 2.0]])
        m = mg.Model(
            label="coupled",
            dims=2,
            inv_mass=w,
            potential=lambda q: q[0] ** 2 + q[1] ** 2,
            gradient=lambda q: (2 * q[0], 2 * q[1]),
        )
        assert m.inv_mass_diagonal is None
        p = (1.5, -0.5)
        expected = 0.5 * np.array(p) @ w @ np.array(p)
        assert float(m.kinetic(p)) == pytest.approx(expected, rel=1e-14)


class TestInitialStates:
    def test_harmonic_moments(self, grid_3d_table):
        st_ = mg.initial_state_for("harmonic", grid_3d_table)
        assert np.abs(mg.expect_position(st_)).max() < 1e-9
        assert np.abs(mg.expect_momentum(st_)).max() < 1e-9

    def test_scattering_moments(self):
        g = mg.make_grid(
            [128, 128], [0.0, 24.0], [28.0 / 128, 48.0 / 128], [0.0, -3.56]
        )
        st_ = mg.initial_state_for("scattering", g)
        assert np.allclose(mg.expect_position(st_), [0.0, 24.0], atol=1e-8)
        assert np.allclose(mg.expect_momentum(st_), [0.0, -3.56], atol=1e-8)

    def test_hh_norm_on_coarse_grid(self):
        d = 4
        g = mg.make_grid([8] * d, [2.0] * d, [10.0 / 8] * d, [0.0] * d)
        # the published coarse grid clips the far Gaussian tail at ~1e-6 of
        # the peak, which the factory reports; the norm is still exact
        with pytest.warns(mg.TruncationWarning):
            st_ = mg.initial_state_for("henon-heiles", g)
        assert st_.norm() == pytest.approx(1.0, abs=1e-10)

    def test_unknown_label_rejected(self, grid_1d):
        with pytest.raises(ModelDefinitionError):
            mg.initial_state_for("mystery", grid_1d)
