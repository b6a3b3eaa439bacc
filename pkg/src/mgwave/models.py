"""Benchmark Hamiltonians: potential, analytic gradient, and kinetic form.

All three model systems use their own dimensionless natural units with
hbar = 1; numerically everything here is unit-free.  Potentials and
gradients are vectorized: they accept a tuple of D arrays broadcastable
against each other (an open mesh of grid axes, or plain scalars).
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Optional

import numpy as np

from .errors import ModelDefinitionError
from .grid import GridSpec
from .state import WaveState
from .wavefunction import gaussian_state

__all__ = [
    "Model",
    "HarmonicParams",
    "harmonic_excited",
    "harmonic_ground",
    "secrest_johnson",
    "henon_heiles",
    "initial_state_for",
    "TABLE_HARMONIC",
]


@dataclasses.dataclass(frozen=True)
class Model:
    """A separable Hamiltonian H = T(p) + V(q) with analytic gradient of V."""

    label: str
    dims: int
    inv_mass: np.ndarray  # symmetric positive definite D x D
    potential: Callable
    gradient: Callable
    hessian_at_minimum: Optional[np.ndarray] = None
    minimum: Optional[np.ndarray] = None

    def __post_init__(self):
        w = np.asarray(self.inv_mass, dtype=float)
        if w.shape != (self.dims, self.dims):
            raise ModelDefinitionError("inverse-mass matrix has wrong shape")
        if not np.allclose(w, w.T, rtol=0, atol=1e-14 * max(1.0, abs(w).max())):
            raise ModelDefinitionError("inverse-mass matrix must be symmetric")
        try:
            np.linalg.cholesky(w)
        except np.linalg.LinAlgError as exc:
            raise ModelDefinitionError("inverse-mass matrix must be positive definite") from exc
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "inv_mass", w)
        self._check_gradient()

    def _check_gradient(self, n_points=16, step=1e-5, rtol=1e-6):
        """Central finite differences must agree with the analytic gradient."""
        rng = np.random.default_rng(1234)
        base = self.minimum if self.minimum is not None else np.zeros(self.dims)
        for _ in range(n_points):
            q = np.asarray(base, dtype=float) + rng.normal(scale=1.0, size=self.dims)
            g = np.array([float(gl) for gl in self.gradient(tuple(q))])
            fd = np.empty(self.dims)
            for l in range(self.dims):
                qp, qm = q.copy(), q.copy()
                qp[l] += step
                qm[l] -= step
                fd[l] = (self.potential(tuple(qp)) - self.potential(tuple(qm))) / (2 * step)
            scale = max(np.abs(g).max(), 1.0)
            if np.abs(fd - g).max() > rtol * scale:
                raise ModelDefinitionError(
                    f"model {self.label!r}: analytic gradient disagrees with "
                    f"finite differences at q={q}"
                )

    @property
    def inv_mass_diagonal(self) -> Optional[np.ndarray]:
        """The diagonal of inv_mass if the matrix is diagonal, else None."""
        w = self.inv_mass
        if np.count_nonzero(w - np.diag(np.diagonal(w))) == 0:
            return np.diagonal(w)
        return None

    def kinetic(self, p_mesh) -> np.ndarray:
        """T(p) = p^T inv_mass p / 2 on a broadcastable momentum mesh."""
        diag = self.inv_mass_diagonal
        if diag is not None:
            return 0.5 * sum(diag[l] * p_mesh[l] ** 2 for l in range(self.dims))
        total = 0.0
        for l in range(self.dims):
            for m in range(self.dims):
                total = total + 0.5 * self.inv_mass[l, m] * p_mesh[l] * p_mesh[m]
        return total


@dataclasses.dataclass(frozen=True)
class HarmonicParams:
    """Force-constant matrix, displacement, and per-mode frequencies."""

    K: np.ndarray
    q0: np.ndarray
    omegas: np.ndarray

    def __post_init__(self):
        K = np.asarray(self.K, dtype=float)
        q0 = np.asarray(self.q0, dtype=float)
        om = np.asarray(self.omegas, dtype=float)
        if K.shape != (len(q0), len(q0)) or om.shape != q0.shape:
            raise ModelDefinitionError("inconsistent harmonic parameter shapes")
        if not np.allclose(K, K.T, rtol=0, atol=1e-14 * max(1.0, abs(K).max())):
            raise ModelDefinitionError("force-constant matrix must be symmetric")
        if np.linalg.eigvalsh(K).min() <= 0:
            raise ModelDefinitionError("force-constant matrix must be positive definite")
        for a in (K, q0, om):
            a.flags.writeable = False
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "q0", q0)
        object.__setattr__(self, "omegas", om)


def _table_harmonic_params() -> HarmonicParams:
    K = np.array(
        [
            [1.997, -0.04, -0.017],
            [-0.04, 1.015, 0.04],
            [-0.017, 0.04, 2.48],
        ]
    )
    return HarmonicParams(K=K, q0=np.array([-7.0, 7.0, 7.0]), omegas=np.array([2.0, 1.0, 2.5]))


TABLE_HARMONIC = _table_harmonic_params()


def harmonic_excited(params: HarmonicParams | None = None) -> Model:
    """Displaced, Duschinsky-coupled harmonic surface (default parameter table)."""
    if params is None:
        params = TABLE_HARMONIC
    K, q0 = params.K, params.q0
    d = len(q0)

    def potential(q):
        dq = [q[l] - q0[l] for l in range(d)]
        v = 0.0
        for l in range(d):
            v = v + 0.5 * K[l, l] * dq[l] ** 2
            for m in range(l + 1, d):
                v = v + K[l, m] * dq[l] * dq[m]
        return v

    def gradient(q):
        dq = [q[l] - q0[l] for l in range(d)]
        return tuple(sum(K[l, m] * dq[m] for m in range(d)) for l in range(d))

    return Model(
        label="harmonic",
        dims=d,
        inv_mass=np.diag(params.omegas),
        potential=potential,
        gradient=gradient,
        hessian_at_minimum=K,
        minimum=q0,
    )


def harmonic_ground(omegas=None) -> Model:
    """Uncoupled oscillator sum (omega_l/2)(p_l^2 + q_l^2); eigenstate checks."""
    if omegas is None:
        omegas = TABLE_HARMONIC.omegas
    om = np.asarray(omegas, dtype=float)
    params = HarmonicParams(K=np.diag(om), q0=np.zeros(len(om)), omegas=om)
    model = harmonic_excited(params)
    return dataclasses.replace(model, label="harmonic-ground")


def secrest_johnson() -> Model:
    """Collinear He-H2 scattering surface: Morse stretch plus exponential wall."""
    beta, well, alpha = 0.158, 20.0, 0.3

    def potential(q):
        q1, q2 = q
        return well * (1.0 - np.exp(-beta * q1)) ** 2 + np.exp(-alpha * (q2 - q1))

    def gradient(q):
        q1, q2 = q
        e1 = np.exp(-beta * q1)
        wall = np.exp(-alpha * (q2 - q1))
        return (2.0 * well * beta * e1 * (1.0 - e1) + alpha * wall, -alpha * wall)

    return Model(
        label="scattering",
        dims=2,
        inv_mass=np.diag([1.0, 1.5]),  # m1 = 1, m2 = 2/3
        potential=potential,
        gradient=gradient,
    )


def henon_heiles(dims: int = 8, coupling: float = 0.111803) -> Model:
    """Chain Henon-Heiles potential with nearest-neighbor cubic couplings."""
    if dims < 2:
        raise ModelDefinitionError("Henon-Heiles model needs at least 2 dimensions")
    kappa = 1.0
    lam = float(coupling)

    def potential(q):
        v = 0.5 * kappa * sum(q[l] ** 2 for l in range(dims))
        for l in range(dims - 1):
            v = v + lam * (q[l] ** 2 * q[l + 1] - q[l + 1] ** 3 / 3.0)
        return v

    def gradient(q):
        out = []
        for l in range(dims):
            g = kappa * q[l]
            if l < dims - 1:
                g = g + lam * 2.0 * q[l] * q[l + 1]
            if l > 0:
                g = g + lam * (q[l - 1] ** 2 - q[l] ** 2)
            out.append(g)
        return tuple(out)

    return Model(
        label="henon-heiles",
        dims=dims,
        inv_mass=np.eye(dims),
        potential=potential,
        gradient=gradient,
        hessian_at_minimum=kappa * np.eye(dims),
        minimum=np.zeros(dims),
    )


def initial_state_for(label: str, grid: GridSpec) -> WaveState:
    """The published initial wavepacket for each benchmark system."""
    d = grid.dims
    if label in ("harmonic", "harmonic-ground"):
        sigma = np.full(d, np.sqrt(grid.hbar))
        return gaussian_state(grid, np.zeros(d), np.zeros(d), sigma)
    if label == "scattering":
        if d != 2:
            raise ModelDefinitionError("scattering initial state is two-dimensional")
        sigma = np.array([np.sqrt(grid.hbar), np.sqrt(8.0)])
        return gaussian_state(grid, np.array([0.0, 24.0]), np.array([0.0, -3.56]), sigma)
    if label == "henon-heiles":
        return gaussian_state(grid, np.full(d, 2.0), np.zeros(d), np.ones(d))
    raise ModelDefinitionError(f"unknown model label {label!r}")
