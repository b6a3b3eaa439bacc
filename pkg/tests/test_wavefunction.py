"""States, moments, energies, resampling, and the checkpoint format."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import mgwave as mg
from mgwave.errors import (
    DegenerateStateError,
    IncompatibleGridError,
    TruncationWarning,
)

from conftest import random_state


class TestGaussianState:
    def test_unit_norm_and_moments(self, grid_1d):
        st_ = mg.gaussian_state(grid_1d, [0.7], [-1.1], [1.0])
        assert st_.norm() == pytest.approx(1.0, abs=1e-14)
        assert mg.expect_position(st_)[0] == pytest.approx(0.7, abs=1e-9)
        assert mg.expect_momentum(st_)[0] == pytest.approx(-1.1, abs=1e-9)

    def test_truncation_warning_on_small_grid(self):
        g = mg.make_grid([8], [0.0], [0.25], [0.0])  # range 2, sigma 1
        with pytest.warns(TruncationWarning):
            mg.gaussian_state(g, [0.0], [0.0], [1.0])

    def test_shape_mismatch_rejected(self, grid_1d):
        with pytest.raises(IncompatibleGridError):
            mg.gaussian_state(grid_1d, [0.0, 0.0], [0.0], [1.0])

    @settings(max_examples=25, deadline=None)
    @given(d=st.floats(-2.0, 2.0))
    def test_displaced_overlap_analytic(self, d):
        # <g(0)|g(d)| for unit-width Gaussians: |overlap| = exp(-d^2/4)
        g = mg.make_grid([64], [0.0], [0.25], [0.0])
        a = mg.gaussian_state(g, [0.0], [0.0], [1.0])
        b = mg.gaussian_state(g, [d], [0.0], [1.0])
        assert abs(mg.inner_product(a, b)) == pytest.approx(
            math.exp(-d * d / 4.0), abs=1e-9
        )

    def test_momentum_displaced_overlap_analytic(self):
        # |<g(p=0)|g(p=dp)>| = exp(-sigma^2 dp^2 / 4) for width sigma
        sigma, dp = math.sqrt(8.0), 0.56
        g = mg.make_grid([128], [0.0], [0.375], [0.0])
        a = mg.gaussian_state(g, [0.0], [0.0], [sigma])
        b = mg.gaussian_state(g, [0.0], [dp], [sigma])
        assert abs(mg.inner_product(a, b)) == pytest.approx(
            math.exp(-(sigma**2) * dp**2 / 4.0), abs=1e-9
        )


class TestExpectations:
    def test_ground_state_energy_sum(self, grid_3d_table):
        # uncoupled oscillators (omega/2)(p^2+q^2): coherent ground state
        # energy is hbar*sum(omega)/2 = 2.75 for the tabulated frequencies
        model = mg.harmonic_ground()
        st_ = mg.initial_state_for("harmonic-ground", grid_3d_table)
        assert mg.expect_energy(st_, model) == pytest.approx(2.75, abs=1e-9)

    def test_excited_surface_initial_energy(self, grid_3d_table):
        # <V> = q0.K.q0/2 + hbar*tr(K)/4, <T> = hbar*sum(omega)/4
        model = mg.harmonic_excited()
        params = mg.TABLE_HARMONIC
        st_ = mg.initial_state_for("harmonic", grid_3d_table)
        expected = (
            0.5 * params.q0 @ params.K @ params.q0
            + 0.25 * np.trace(params.K)
            + 0.25 * params.omegas.sum()
        )
        assert mg.expect_energy(st_, model) == pytest.approx(expected, abs=1e-6)

    def test_energy_representation_independent(self, grid_1d):
        model = mg.harmonic_ground([1.0])
        st_ = mg.gaussian_state(grid_1d, [0.5], [0.3], [1.0])
        e_q = mg.expect_energy(st_, model)
        e_p = mg.expect_energy(mg.to_momentum(st_), model)
        assert e_q == pytest.approx(e_p, rel=1e-12)

    def test_zero_state_rejected(self, grid_1d):
        zero = mg.WaveState(np.zeros(grid_1d.counts, complex), mg.POSITION, grid_1d)
        with pytest.raises(DegenerateStateError):
            mg.expect_position(zero)

    def test_cross_grid_inner_product_rejected(self, grid_1d):
        a = random_state(grid_1d, 1)
        g2 = grid_1d.with_centers(q_ctr=[0.5])
        b = mg.WaveState(a.data.copy(), mg.POSITION, g2)
        with pytest.raises(IncompatibleGridError):
            mg.inner_product(a, b)


class TestPhysicalNormFactor:
    def test_center_independent(self):
        g1 = mg.make_grid([16, 8], [0.0, 0.0], [0.5, 0.7], [0.0, 0.0])
        g2 = g1.with_centers(q_ctr=[3.3, -2.1], p_ctr=[1.0, 4.0])
        assert mg.physical_norm_factor(g1) == mg.physical_norm_factor(g2)

    def test_value(self):
        g = mg.make_grid([64], [0.0], [0.25], [0.0])
        assert mg.physical_norm_factor(g) == pytest.approx(
            math.sqrt(math.sqrt(2 * math.pi) / 64), rel=1e-15
        )


class TestResample:
    def test_identity_on_same_grid(self, grid_1d):
        st_ = mg.gaussian_state(grid_1d, [0.3], [0.2], [1.0])
        back = mg.resample(st_, grid_1d)
        assert np.abs(back.data - st_.data).max() < 1e-12

    def test_refinement_matches_analytic_gaussian(self):
        src = mg.make_grid([32], [0.0], [0.5], [0.0])
        tgt = mg.make_grid([64], [0.1], [0.2], [0.0])
        st_ = mg.gaussian_state(src, [0.0], [0.8], [1.2])
        fine = mg.resample(st_, tgt)
        q = mg.axis_coordinates(tgt, mg.POSITION, 0)
        analytic = (math.pi * 1.2**2) ** -0.25 * np.exp(
            -(q**2) / (2 * 1.2**2) + 1j * 0.8 * q
        )
        c_p = tgt.dp[0] / math.sqrt(2 * math.pi)
        phys = fine.data * math.sqrt(c_p) / mg.physical_norm_factor(src)
        # global phase of the stored convention is fixed by construction;
        # compare absolute values and the physical norm
        assert np.abs(np.abs(phys) - np.abs(analytic)).max() < 1e-8
        assert fine.norm() * mg.physical_norm_factor(tgt) == pytest.approx(
            st_.norm() * mg.physical_norm_factor(src), rel=1e-10
        )

    def test_physical_norm_preserved_under_refinement(self):
        src = mg.make_grid([32], [0.4], [0.5], [-0.3])
        tgt = mg.make_grid([128], [0.4], [0.12], [0.0])
        st_ = mg.gaussian_state(src, [0.4], [0.6], [1.0])
        fine = mg.resample(st_, tgt)
        assert fine.norm() * mg.physical_norm_factor(tgt) == pytest.approx(
            st_.norm() * mg.physical_norm_factor(src), rel=1e-9
        )

    def test_extrapolation_warns(self):
        src = mg.make_grid([32], [0.0], [0.5], [0.0])
        tgt = mg.make_grid([32], [20.0], [0.5], [0.0])
        st_ = mg.gaussian_state(src, [0.0], [0.0], [1.0])
        with pytest.warns(TruncationWarning):
            mg.resample(st_, tgt)


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        g = mg.make_grid([8, 6], [0.1, -0.2], [0.5, 0.7], [1.0, -1.5], hbar=0.9)
        st_ = random_state(g, seed=3)
        path = tmp_path / "state.mgwf"
        mg.save_state(st_, path)
        loaded = mg.load_state(path)
        assert loaded.grid == st_.grid
        assert loaded.representation == st_.representation
        assert np.array_equal(loaded.data, st_.data)

    def test_momentum_representation_round_trip(self, tmp_path):
        g = mg.make_grid([8], [0.0], [0.5], [0.25])
        k = mg.to_momentum(random_state(g, 4))
        path = tmp_path / "k.mgwf"
        mg.save_state(k, path)
        loaded = mg.load_state(path)
        assert loaded.representation == mg.MOMENTUM
        assert np.array_equal(loaded.data, k.data)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.mgwf"
        path.write_bytes(b"NOPE!" + b"\x00" * 64)
        with pytest.raises(ValueError, match="MGWF1"):
            mg.load_state(path)

    def test_save_is_deterministic(self, tmp_path):
        g = mg.make_grid([8], [0.3], [0.5], [0.0])
        st_ = random_state(g, seed=9)
        p1, p2 = tmp_path / "a.mgwf", tmp_path / "b.mgwf"
        mg.save_state(st_, p1)
        mg.save_state(st_, p2)
        assert p1.read_bytes() == p2.read_bytes()
