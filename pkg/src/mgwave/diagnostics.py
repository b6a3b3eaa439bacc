"""Run-level analyses: reversibility, convergence order, stability bound,
autocorrelation functions and damped spectra.

Error norms between states on different (possibly moved) grids are taken
after resampling onto a common frame, in the physical L2 norm; on a shared
grid this reduces to the plain coefficient 2-norm distance.
"""

from __future__ import annotations

import dataclasses
import math
import warnings

import numpy as np

from .errors import InvalidArgumentError, TruncationWarning, UnsupportedModelError
from .models import Model
from .propagator import CompositionScheme, DiagnosticSeries, propagate
from .state import WaveState
from .wavefunction import inner_product, physical_norm_factor, resample

__all__ = [
    "DiagnosticSeries",
    "ConvergenceTable",
    "state_distance",
    "reversibility_error",
    "convergence_study",
    "verlet_threshold",
    "autocorrelation",
    "spectrum",
]


def state_distance(a: WaveState, b: WaveState, frame=None) -> float:
    """Physical L2 distance between two normalized states.

    Both states are normalized to unit physical norm, interpolated onto
    `frame` (default: a's grid), and differenced there.  For unit-norm
    states already sharing a grid this equals ||a - b|| of the coefficient
    tensors.
    """
    if frame is None:
        frame = a.grid
    # comparing states whose frames have moved apart is the whole point here;
    # the periodic-continuation values of a decayed state are negligible
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        ra = resample(a, frame)
        rb = resample(b, frame)
    ca = ra.data / (a.norm() * physical_norm_factor(a.grid))
    cb = rb.data / (b.norm() * physical_norm_factor(b.grid))
    return physical_norm_factor(frame) * float(np.linalg.norm((ca - cb).ravel()))


def reversibility_error(
    state0: WaveState,
    model: Model,
    mode: str,
    scheme: CompositionScheme,
    dt: float,
    n_steps: int,
    flavor: str = "TVT",
) -> float:
    """Distance between psi_0 and its forward-then-backward propagated image.

    Backward propagation is the same code path with dt negated.  If the
    round trip does not return to the starting grid exactly, the comparison
    happens after resampling onto the initial frame.
    """
    fwd = propagate(
        state0, model, mode, scheme, dt, n_steps, sample_every=n_steps, compute_energy=False
    )
    back = propagate(
        fwd.final_state, model, mode, scheme, -dt, n_steps,
        sample_every=n_steps, compute_energy=False,
    )
    fb = back.final_state
    g0, g1 = state0.grid, fb.grid
    if g0.same_lattice(g1) and g0.q_ctr == g1.q_ctr and g0.p_ctr == g1.p_ctr:
        return float(np.linalg.norm((fb.data - state0.data).ravel()))
    return state_distance(fb, state0, frame=state0.grid)


@dataclasses.dataclass(frozen=True)
class ConvergenceTable:
    """Self-convergence errors ||psi^(dt) - psi^(dt/2)|| over a dt-halving sweep."""

    dts: np.ndarray
    errors: np.ndarray
    fitted_order: float
    floor_estimate: float
    fit_mask: np.ndarray

    def __post_init__(self):
        if len(self.dts) != len(self.errors):
            raise InvalidArgumentError("dts and errors must share length")
        ratios = self.dts[:-1] / self.dts[1:]
        if len(ratios) and not np.allclose(ratios, 2.0, rtol=1e-12):
            raise InvalidArgumentError("dts must form a halving sequence")
        finite = self.errors[np.isfinite(self.errors)]
        if (finite < 0).any():
            raise InvalidArgumentError("errors must be nonnegative")


def convergence_study(
    model: Model,
    mode: str,
    scheme: CompositionScheme,
    dt_max: float,
    n_halvings: int,
    t_f: float,
    state0: WaveState,
    flavor: str = "TVT",
) -> ConvergenceTable:
    """Propagate to t_f with dt = dt_max/2^j, j = 0..n_halvings, and fit the order.

    The log-log slope is fitted only on the segment above the roundoff
    floor: starting from the largest dt, points are dropped once the error
    ratio between successive halvings falls below 2^(m/2), m the scheme's
    nominal order.  Diverged runs contribute NaN rows and are excluded.
    """
    if n_halvings < 3:
        raise InvalidArgumentError("need at least 3 halvings to fit an order")
    n0 = t_f / dt_max
    if abs(n0 - round(n0)) > 1e-9 * max(1.0, abs(n0)):
        raise InvalidArgumentError("t_f must be an integer multiple of dt_max")
    n0 = round(n0)
    finals = []
    dts = []
    for j in range(n_halvings + 1):
        dt = dt_max / 2**j
        n = n0 * 2**j
        rep = propagate(
            state0, model, mode, scheme, dt, n,
            sample_every=n, flavor=flavor, compute_energy=False,
        )
        finals.append(None if rep.aborted else rep.final_state)
        dts.append(dt)
    errors = np.full(n_halvings, np.nan)
    for j in range(n_halvings):
        if finals[j] is not None and finals[j + 1] is not None:
            errors[j] = state_distance(finals[j], finals[j + 1], frame=state0.grid)
    dts = np.array(dts[:-1])
    mask = np.zeros(n_halvings, dtype=bool)
    cutoff = 2.0 ** (scheme.order / 2.0)
    for j in range(n_halvings):
        if not np.isfinite(errors[j]) or errors[j] <= 0:
            continue
        if j > 0 and mask[j - 1] and np.isfinite(errors[j - 1]):
            if errors[j - 1] / errors[j] < cutoff:
                break
        mask[j] = True
    if mask.sum() >= 2:
        slope = float(np.polyfit(np.log(dts[mask]), np.log(errors[mask]), 1)[0])
    else:
        slope = float("nan")
    finite = errors[np.isfinite(errors)]
    floor = float(finite.min()) if len(finite) else float("nan")
    return ConvergenceTable(
        dts=dts, errors=errors, fitted_order=slope, floor_estimate=floor, fit_mask=mask
    )


def _jacobi_eigh(matrix: np.ndarray, tol: float = 1e-10):
    """Eigenvalues and eigenvectors of a real symmetric matrix, cyclic Jacobi."""
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    vecs = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), vecs
    scale = max(abs(a).max(), 1e-300)
    for _ in range(100):
        off = math.sqrt(np.sum(np.square(a - np.diag(a.diagonal()))))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a = 0.5 * (a + a.T)  # keep exact symmetry against roundoff
                vecs = vecs @ rot
    return a.diagonal().copy(), vecs


def verlet_threshold(model: Model) -> float:
    """Largest stable substep 2/Omega_max of the grid-center leapfrog updates.

    Omega_max^2 is the top eigenvalue of W^(1/2) H W^(1/2), with H the
    potential's Hessian at its minimum and W the inverse-mass matrix.
    """
    if model.hessian_at_minimum is None:
        raise UnsupportedModelError(
            f"model {model.label!r} exposes no quadratic expansion at a minimum"
        )
    h = np.asarray(model.hessian_at_minimum, dtype=float)
    diag = model.inv_mass_diagonal
    if diag is not None:
        sqrt_w = np.diag(np.sqrt(diag))
    else:
        # inv_mass is SPD, so its principal matrix square root is well defined
        evals, evecs = _jacobi_eigh(model.inv_mass)
        sqrt_w = (evecs * np.sqrt(np.maximum(evals, 0.0))) @ evecs.T
    omega_sq = _jacobi_eigh(sqrt_w @ h @ sqrt_w)[0].max()
    if omega_sq <= 0:
        raise UnsupportedModelError("quadratic expansion has no positive curvature")
    return 2.0 / math.sqrt(omega_sq)


def autocorrelation(states, reference: WaveState) -> np.ndarray:
    """<psi_0|psi_t> for each sampled state, resampled to the reference frame."""
    out = np.empty(len(states), dtype=complex)
    gr = reference.grid
    for i, st in enumerate(states):
        g = st.grid
        if not (g.same_lattice(gr) and g.q_ctr == gr.q_ctr and g.p_ctr == gr.p_ctr):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TruncationWarning)
                st = resample(st, gr)
        out[i] = inner_product(reference, st)
    return out


def spectrum(
    autocorr: np.ndarray,
    dt_sample: float,
    t_damp: float = 30.0,
    hbar: float = 1.0,
) -> np.ndarray:
    """Damped Fourier transform of an autocorrelation sampled at t_n = n*dt.

    intensity(E) = Re sum_n w_n exp(i E t_n / hbar) exp[-(t_n/t_damp)^2]
    C(t_n) dt with trapezoid weights w_n, over the energy mesh
    E in [0, pi*hbar/dt] at 4x zero-padding-equivalent resolution.
    Returns an (n_E, 2) array of (energy, unnormalized intensity) rows.
    """
    c = np.asarray(autocorr, dtype=complex)
    n = len(c)
    if n < 2:
        raise InvalidArgumentError("autocorrelation needs at least 2 samples")
    if dt_sample <= 0 or t_damp <= 0:
        raise InvalidArgumentError("dt_sample and t_damp must be positive")
    t = np.arange(n) * dt_sample
    damped = c * np.exp(-((t / t_damp) ** 2))
    weights = np.ones(n)
    weights[0] = weights[-1] = 0.5
    energies = np.linspace(0.0, math.pi * hbar / dt_sample, 2 * n + 1)
    phases = np.exp(1j * np.outer(energies, t) / hbar)
    intensity = (phases @ (weights * damped)).real * dt_sample
    return np.column_stack([energies, intensity])
