"""Shared helpers: brute-force reference transforms and state factories."""

import math

import numpy as np
import pytest

from mgwave import MOMENTUM, POSITION, WaveState, make_grid


def slow_to_momentum(state):
    """O(N^2) direct summation of the center-shifted discrete transform.

    psi_tilde^K = N^(-1/2) sum_J exp(-2*pi*i*<K,J>) exp(-i*t_KJ/hbar) psi^J
    with the phase time
    t_KJ = sum_l [ (p_ctr,l - dp_l N_l/2)(q_ctr,l - dq_l N_l/2)
                   + p_ctr,l j_l dq_l + q_ctr,l k_l dp_l
                   - pi hbar (j_l + k_l) ].
    Deliberately naive; the production path must reproduce it exactly.
    """
    g = state.grid
    hbar = g.hbar
    counts = g.counts
    out = np.zeros(counts, dtype=complex)
    root_n = math.sqrt(g.size)
    for kk in np.ndindex(counts):
        acc = 0.0 + 0.0j
        for jj in np.ndindex(counts):
            t_kj = 0.0
            dft = 0.0
            for l in range(g.dims):
                t_kj += (g.p_ctr[l] - g.dp[l] * counts[l] / 2.0) * (
                    g.q_ctr[l] - g.dq[l] * counts[l] / 2.0
                )
                t_kj += g.p_ctr[l] * jj[l] * g.dq[l]
                t_kj += g.q_ctr[l] * kk[l] * g.dp[l]
                t_kj -= math.pi * hbar * (jj[l] + kk[l])
                dft += jj[l] * kk[l] / counts[l]
            acc += np.exp(-2j * math.pi * dft - 1j * t_kj / hbar) * state.data[jj]
        out[kk] = acc / root_n
    return WaveState(out, MOMENTUM, g)


def random_state(grid, seed=0):
    rng = np.random.default_rng(seed)
    data = rng.normal(size=grid.counts) + 1j * rng.normal(size=grid.counts)
    data /= np.linalg.norm(data.ravel())
    return WaveState(np.ascontiguousarray(data), POSITION, grid)


def random_grid(rng, dims=1, max_count=8):
    counts = [int(rng.integers(2, max_count + 1)) for _ in range(dims)]
    q_ctr = rng.normal(scale=3.0, size=dims)
    p_ctr = rng.normal(scale=3.0, size=dims)
    dq = rng.uniform(0.2, 1.5, size=dims)
    hbar = float(rng.uniform(0.5, 2.0))
    return make_grid(counts, q_ctr, dq, p_ctr, hbar=hbar)


@pytest.fixture
def grid_1d():
    return make_grid([32], [0.0], [0.4375], [0.0])


@pytest.fixture
def grid_3d_table():
    return make_grid([32, 32, 32], [0.0] * 3, [0.4375] * 3, [0.0] * 3)
