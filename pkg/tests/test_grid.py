"""Grid geometry and the center-shifted Fourier transforms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import mgwave as mg
from mgwave.errors import IncompatibleGridError, InvalidArgumentError

from conftest import random_grid, random_state, slow_to_momentum


class TestMakeGrid:
    def test_spacing_lock(self):
        g = mg.make_grid([32], [0.0], [0.4375], [0.0])
        assert g.dp[0] == pytest.approx(2 * math.pi / (32 * 0.4375), rel=1e-15)
        assert g.dq[0] * g.dp[0] * g.counts[0] == pytest.approx(2 * math.pi, rel=1e-15)

    def test_spacing_lock_respects_hbar(self):
        g = mg.make_grid([16], [0.0], [0.5], [0.0], hbar=0.7)
        assert g.dq[0] * g.dp[0] * 16 == pytest.approx(2 * math.pi * 0.7, rel=1e-15)

    def test_length_mismatch_rejected(self):
        with pytest.raises(InvalidArgumentError):
            mg.make_grid([8, 8], [0.0], [0.5, 0.5], [0.0, 0.0])

    def test_bad_spacing_names_dimension(self):
        with pytest.raises(InvalidArgumentError, match="dimension 1"):
            mg.make_grid([8, 8], [0.0, 0.0], [0.5, -0.5], [0.0, 0.0])

    def test_single_point_rejected(self):
        with pytest.raises(InvalidArgumentError):
            mg.make_grid([1], [0.0], [0.5], [0.0])

    def test_axis_coordinates_formula(self):
        g = mg.make_grid([8], [1.25], [0.5], [-2.0])
        q = mg.axis_coordinates(g, mg.POSITION, 0)
        assert np.allclose(q, 1.25 + (np.arange(8) - 4.0) * 0.5)
        p = mg.axis_coordinates(g, mg.MOMENTUM, 0)
        assert np.allclose(p, -2.0 + (np.arange(8) - 4.0) * g.dp[0])

    def test_centers_stay_continuous(self):
        # centers must never be snapped onto the lattice
        g = mg.make_grid([8], [0.123456], [0.5], [0.654321])
        g2 = g.with_centers(q_ctr=[0.1001], p_ctr=[7.77])
        assert g2.q_ctr == (0.1001,)
        assert g2.p_ctr == (7.77,)
        assert g2.same_lattice(g)

    def test_multi_index_iteration_row_major(self):
        idx = list(mg.MultiIndexSet((2, 3)))
        assert idx == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]


class TestTransformOracle:
    @pytest.mark.parametrize("counts,seed", [((4,), 1), ((8,), 2), ((4, 8), 3), ((8, 8), 4)])
    def test_matches_direct_summation(self, counts, seed):
        rng = np.random.default_rng(seed)
        g = random_grid(rng, dims=len(counts))
        g = mg.make_grid(counts, g.q_ctr, g.dq, g.p_ctr, hbar=g.hbar)
        st_ = random_state(g, seed=seed)
        fast = mg.to_momentum(st_)
        slow = slow_to_momentum(st_)
        assert np.abs(fast.data - slow.data).max() < 1e-13

    def test_inverse_matches_adjoint_of_direct_summation(self):
        rng = np.random.default_rng(11)
        g = random_grid(rng, dims=1)
        g = mg.make_grid([8], g.q_ctr, g.dq, g.p_ctr, hbar=g.hbar)
        st_ = random_state(g, seed=11)
        back = mg.to_position(slow_to_momentum(st_))
        assert np.abs(back.data - st_.data).max() < 1e-13

    def test_retargeted_center_matches_direct_summation(self):
        g = mg.make_grid([8], [0.3], [0.7], [0.1], hbar=1.3)
        st_ = random_state(g, seed=5)
        fast = mg.to_momentum(st_, [2.5])
        slow = slow_to_momentum(mg.WaveState(st_.data, mg.POSITION, g.with_centers(p_ctr=[2.5])))
        assert np.abs(fast.data - slow.data).max() < 1e-13


class TestUnitarity:
    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000), dims=st.integers(1, 3))
    def test_round_trip_is_identity(self, seed, dims):
        rng = np.random.default_rng(seed)
        g = random_grid(rng, dims=dims)
        st_ = random_state(g, seed=seed)
        back = mg.to_position(mg.to_momentum(st_))
        assert np.abs(back.data - st_.data).max() < 1e-12
        assert back.norm() == pytest.approx(1.0, abs=1e-13)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_norm_preserved_with_moved_centers(self, seed):
        rng = np.random.default_rng(seed)
        g = random_grid(rng, dims=2)
        st_ = random_state(g, seed=seed)
        k = mg.to_momentum(st_, rng.normal(scale=4.0, size=2))
        assert k.norm() == pytest.approx(1.0, abs=1e-13)
        back = mg.to_position(k, rng.normal(scale=4.0, size=2))
        assert back.norm() == pytest.approx(1.0, abs=1e-13)

    def test_inner_products_preserved(self):
        g = mg.make_grid([16], [0.4], [0.6], [-1.0])
        a = random_state(g, seed=1)
        b = random_state(g, seed=2)
        ka, kb = mg.to_momentum(a), mg.to_momentum(b)
        assert mg.inner_product(ka, kb) == pytest.approx(mg.inner_product(a, b), abs=1e-13)


class TestGaussianAnalytic:
    def test_momentum_profile_matches_analytic(self):
        # |psi_tilde(p)| of a Gaussian with width sigma is a Gaussian with
        # width hbar/sigma centered at p0, independent of the grid centers
        hbar, sigma, q0, p0 = 1.0, 1.3, 0.8, -0.9
        g = mg.make_grid([64], [q0], [0.25], [p0], hbar=hbar)
        st_ = mg.gaussian_state(g, [q0], [p0], [sigma])
        k = mg.to_momentum(st_)
        p = mg.axis_coordinates(k.grid, mg.MOMENTUM, 0)
        analytic = (math.pi * (hbar / sigma) ** 2) ** -0.25 * np.exp(
            -((p - p0) ** 2) * sigma**2 / (2 * hbar**2)
        )
        # scale coefficients to physical values of a unit-physical-norm state
        c_q = g.dq[0] / math.sqrt(2 * math.pi * hbar)
        phys = np.abs(k.data) * math.sqrt(c_q) / mg.physical_norm_factor(g)
        assert np.abs(phys - analytic).max() < 1e-8

    def test_wrong_representation_rejected(self):
        g = mg.make_grid([8], [0.0], [0.5], [0.0])
        st_ = random_state(g)
        k = mg.to_momentum(st_)
        with pytest.raises(IncompatibleGridError):
            mg.to_momentum(k)
        with pytest.raises(IncompatibleGridError):
            mg.to_position(st_)
