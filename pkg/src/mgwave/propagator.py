"""Split-operator steps on fixed and moving grids, and composed propagation.

Three step modes share one structure:

* ``fixed``       -- the grid never moves (conventional split-operator).
* ``naive``       -- propagate on a frozen grid for a full step, then recenter
                     the grid on the new expectation values.  Norm-preserving
                     but not time-reversible.
* ``reversible``  -- each kinetic/potential sub-flow moves the corresponding
                     grid center by its exact Ehrenfest increment while it
                     evolves the wavefunction, which restores symmetry and
                     time reversibility.

Any symmetric (palindromic) composition of the second-order step raises the
order of accuracy to an arbitrary even order.
"""

from __future__ import annotations

import dataclasses
import time
import warnings

import numpy as np

from . import grid as _gridmod
from ._kernels import apply_axis_phases, apply_phase
from .errors import (
    InvalidArgumentError,
    ModelDomainError,
    TruncationWarning,
    UnsupportedSchemeError,
)
from .grid import momentum_axes, position_axes, to_momentum, to_position
from .models import Model
from .state import POSITION, WaveState
from .wavefunction import (
    _open_mesh,
    expect_energy,
    expect_momentum,
    expect_position,
    inner_product,
    resample,
)

__all__ = [
    "CompositionScheme",
    "compose_scheme",
    "available_schemes",
    "step_V_fixed",
    "step_T_fixed",
    "step_V_adaptive",
    "step_T_adaptive",
    "strang_step",
    "naive_step",
    "propagate",
    "DiagnosticSeries",
    "PropagationReport",
    "MODES",
    "FLAVORS",
]

MODES = ("fixed", "naive", "reversible")
FLAVORS = ("TVT", "VTV")


# -- composition schemes ------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class CompositionScheme:
    """Palindromic substep coefficients summing to one."""

    name: str
    order: int
    coefficients: tuple[float, ...]

    def __post_init__(self):
        c = self.coefficients
        if abs(sum(c) - 1.0) > 1e-12:
            raise InvalidArgumentError("composition coefficients must sum to 1")
        if any(c[i] != c[-1 - i] for i in range(len(c) // 2)):
            raise InvalidArgumentError("composition coefficients must be palindromic")

    @property
    def n_steps(self) -> int:
        return len(self.coefficients)

    @property
    def max_abs_coefficient(self) -> float:
        return max(abs(g) for g in self.coefficients)


def _palindrome(half_with_center):
    head = list(half_with_center[:-1])
    return tuple(head + [half_with_center[-1]] + head[::-1])


def _suzuki_fractal(order):
    gammas = [1.0]
    m = 2
    while m < order:
        p = 1.0 / (4.0 - 4.0 ** (1.0 / (m + 1)))
        scaled = [p * g for g in gammas]
        gammas = scaled + scaled + [(1.0 - 4.0 * p) * g for g in gammas] + scaled + scaled
        m += 2
    return tuple(gammas)


def _yoshida_triple_jump(order):
    gammas = [1.0]
    m = 2
    while m < order:
        p = 1.0 / (2.0 - 2.0 ** (1.0 / (m + 1)))
        gammas = [p * g for g in gammas] + [(1.0 - 2.0 * p) * g for g in gammas] + [
            p * g for g in gammas
        ]
        m += 2
    return tuple(gammas)


# Published minimal-error symmetric compositions of a symmetric second-order
# step: the 9-stage sixth-order and 17-stage eighth-order tables of Kahan &
# Li (Math. Comput. 66, 1089 (1997)) and the 35-stage tenth-order table of
# Sofroniou & Spaletta (Optim. Methods Softw. 20, 597 (2005)).
_KAHAN_LI_6 = _palindrome(
    [
        0.39216144400731413927925056,
        0.33259913678935943859974864,
        -0.70624617255763935980996482,
        0.08221359629355080023149045,
        0.79854399093482996339895035,
    ]
)
_KAHAN_LI_8 = _palindrome(
    [
        0.13020248308889008087881763,
        0.56116298177510838456196441,
        -0.38947496264484728640807860,
        0.15884190655515560089621075,
        -0.39590389413323757733623154,
        0.18453964097831570709183254,
        0.25837438768632204729397911,
        0.29501172360931029887096624,
        -0.60550853383003451169892108,
    ]
)
_SOFRONIOU_SPALETTA_10 = _palindrome(
    [
        0.07879572252168641926390768,
        0.31309610341510852776481247,
        0.02791838323507806610952027,
        -0.22959284159390709415121340,
        0.13096206107716486317465686,
        -0.26973340565451071434460973,
        0.07497334315589143566613711,
        0.11199342399981020488957508,
        0.36613344954622675119314812,
        -0.39910563013603589787862981,
        0.10308739852747107731580277,
        0.41143087395589023782070412,
        -0.00486636058313526176219566,
        -0.39203335370863990644808194,
        0.05194250296244964703718290,
        0.05066509075992449633587434,
        0.04967437063972987905456880,
        0.04931773575959453791768001,
    ]
)


def available_schemes():
    return {
        "strang": (2,),
        "suzuki": (4, 6, 8, 10),
        "yoshida": (4, 6, 8, 10),
        "optimal": (4, 6, 8, 10),
    }


def compose_scheme(name: str, order: int) -> CompositionScheme:
    """Coefficient table for a named symmetric composition of a given order."""
    key = (name, order)
    if key == ("strang", 2):
        coeffs = (1.0,)
    elif name == "suzuki" and order in (4, 6, 8, 10):
        coeffs = _suzuki_fractal(order)
    elif name == "yoshida" and order in (4, 6, 8, 10):
        coeffs = _yoshida_triple_jump(order)
    elif key == ("optimal", 4):
        coeffs = _suzuki_fractal(4)  # Suzuki's fractal is the optimal order-4 scheme
    elif key == ("optimal", 6):
        coeffs = _KAHAN_LI_6
    elif key == ("optimal", 8):
        coeffs = _KAHAN_LI_8
    elif key == ("optimal", 10):
        coeffs = _SOFRONIOU_SPALETTA_10
    else:
        raise UnsupportedSchemeError(
            f"no scheme {name!r} of order {order}; available: {available_schemes()}"
        )
    return CompositionScheme(name=name, order=order, coefficients=coeffs)


# -- exact sub-flows ----------------------------------------------------------

def _potential_tensor(model: Model, g) -> np.ndarray:
    v = np.broadcast_to(model.potential(_open_mesh(position_axes(g))), g.counts)
    if not np.isfinite(v).all():
        raise ModelDomainError("potential is non-finite on the current grid")
    return v


class _PotentialPhaseCache:
    """Caches exp(-i*dt*V/hbar) tensors for a frozen grid (fixed-mode runs).

    Composition schemes revisit a handful of distinct substep sizes, so on a
    static grid the complex phase tensors can be reused across steps.
    """

    def __init__(self, model, g, budget_bytes=1 << 30):
        self.model = model
        self.grid = g
        self.v = _potential_tensor(model, g)
        self.hbar = g.hbar
        self.max_entries = max(2, budget_bytes // (16 * self.v.size))
        self._phases = {}

    def phase(self, dt: float) -> np.ndarray:
        ph = self._phases.get(dt)
        if ph is None:
            ph = np.exp((-1j * dt / self.hbar) * self.v)
            if len(self._phases) < self.max_entries:
                self._phases[dt] = ph
        return ph


def step_V_fixed(state: WaveState, dt: float, model: Model, _cache=None) -> WaveState:
    """Pointwise multiply by exp(-i*dt*V(q)/hbar); the grid does not move."""
    if state.representation != POSITION:
        raise InvalidArgumentError("potential step needs the position representation")
    data = state.data.copy()
    if _cache is not None:
        data *= _cache.phase(dt)
    else:
        v = _potential_tensor(model, state.grid)
        apply_phase(data, (-dt / state.grid.hbar) * v)
    return WaveState(data, POSITION, state.grid)


def _apply_kinetic_phase(kstate: WaveState, dt: float, model: Model) -> None:
    g = kstate.grid
    diag = model.inv_mass_diagonal
    axes = momentum_axes(g)
    if diag is not None:
        angles = [(-dt / g.hbar) * 0.5 * diag[l] * axes[l] ** 2 for l in range(g.dims)]
        apply_axis_phases(kstate.data, angles)
    else:
        kin = np.broadcast_to(model.kinetic(_open_mesh(axes)), g.counts)
        apply_phase(kstate.data, (-dt / g.hbar) * kin)


def step_T_fixed(state: WaveState, dt: float, model: Model) -> WaveState:
    """Kinetic phase in the momentum representation; centers unchanged."""
    k = to_momentum(state, state.grid.p_ctr)
    _apply_kinetic_phase(k, dt, model)
    return to_position(k, state.grid.q_ctr)


def step_V_adaptive(state: WaveState, dt: float, model: Model) -> WaveState:
    """Potential sub-flow with the exact momentum-center update.

    The wavefunction picks up the usual potential phase; simultaneously the
    momentum grid center moves by -dt * <grad V>, which is the exact mean-
    momentum increment for a purely potential Hamiltonian.  The gradient
    expectation uses the weights of the incoming state (the phase multiply
    commutes with grad V, so before/after is mathematically identical).
    """
    if state.representation != POSITION:
        raise InvalidArgumentError("potential step needs the position representation")
    g = state.grid
    w = np.abs(state.data) ** 2
    total = w.sum()
    mesh = _open_mesh(position_axes(g))
    grads = model.gradient(mesh)
    g_mean = np.array([float((w * comp).sum()) / total for comp in grads])
    v = _potential_tensor(model, g)
    data = state.data.copy()
    apply_phase(data, (-dt / g.hbar) * v)
    new_p = tuple(p - dt * gm for p, gm in zip(g.p_ctr, g_mean))
    return WaveState(data, POSITION, g.with_centers(p_ctr=new_p))


def step_T_adaptive(state: WaveState, dt: float, model: Model) -> WaveState:
    """Kinetic sub-flow with the exact position-center update.

    Transform with the current centers, apply the kinetic phase, shift the
    position center by dt * m^-1 * p_ctr (the exact free drift of the mean
    position), and transform back onto the shifted q-grid.
    """
    if state.representation != POSITION:
        raise InvalidArgumentError("kinetic step starts from the position representation")
    g = state.grid
    k = to_momentum(state, g.p_ctr)
    _apply_kinetic_phase(k, dt, model)
    drift = model.inv_mass @ np.asarray(g.p_ctr)
    new_q = tuple(q + dt * dr for q, dr in zip(g.q_ctr, drift))
    return to_position(k, new_q)


def strang_step(
    state: WaveState,
    dt: float,
    model: Model,
    mode: str = "fixed",
    flavor: str = "TVT",
    _cache=None,
) -> WaveState:
    """One symmetric second-order step, T(dt/2) V(dt) T(dt/2) or the mirror."""
    if flavor not in FLAVORS:
        raise InvalidArgumentError(f"unknown splitting flavor {flavor!r}")
    if mode == "fixed":
        step_v = lambda s, h: step_V_fixed(s, h, model, _cache=_cache)
        step_t = lambda s, h: step_T_fixed(s, h, model)
    elif mode == "reversible":
        step_v = lambda s, h: step_V_adaptive(s, h, model)
        step_t = lambda s, h: step_T_adaptive(s, h, model)
    else:
        raise InvalidArgumentError(
            f"strang_step handles modes 'fixed' and 'reversible', not {mode!r}"
        )
    if flavor == "TVT":
        state = step_t(state, dt / 2.0)
        state = step_v(state, dt)
        state = step_t(state, dt / 2.0)
    else:
        state = step_v(state, dt / 2.0)
        state = step_t(state, dt)
        state = step_v(state, dt / 2.0)
    return state


def naive_step(
    state: WaveState,
    dt: float,
    model: Model,
    inner: CompositionScheme,
    flavor: str = "TVT",
) -> WaveState:
    """Frozen-grid composed step followed by recentering on the new means."""
    cache = _PotentialPhaseCache(model, state.grid)
    for gamma in inner.coefficients:
        state = strang_step(state, gamma * dt, model, "fixed", flavor, _cache=cache)
    q_new = expect_position(state)
    p_new = expect_momentum(state)
    k = to_momentum(state, tuple(p_new))
    return to_position(k, tuple(q_new))


# -- composed propagation -----------------------------------------------------

@dataclasses.dataclass(frozen=True)
class DiagnosticSeries:
    """Per-sample observables recorded during a propagation."""

    times: np.ndarray
    norm: np.ndarray
    energy: np.ndarray
    q_ctr: np.ndarray
    p_ctr: np.ndarray
    expect_q: np.ndarray
    expect_p: np.ndarray
    overlap_with_reference: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.times)
        arrays = [self.norm, self.energy, self.q_ctr, self.p_ctr, self.expect_q, self.expect_p]
        if self.overlap_with_reference is not None:
            arrays.append(self.overlap_with_reference)
        if any(len(a) != n for a in arrays):
            raise InvalidArgumentError("diagnostic arrays must share length")
        if n > 1 and not (np.diff(self.times) > 0).all():
            raise InvalidArgumentError("sample times must be strictly increasing")


@dataclasses.dataclass(frozen=True)
class PropagationReport:
    final_state: WaveState
    series: DiagnosticSeries
    wall_time: float
    counts: dict
    aborted: bool = False
    completed_steps: int = 0


def _centers_ok(g) -> bool:
    c = np.array(g.q_ctr + g.p_ctr)
    return bool(np.isfinite(c).all() and np.abs(c).max() < 1e30)


def propagate(
    state: WaveState,
    model: Model,
    mode: str,
    scheme: CompositionScheme,
    dt: float,
    n_steps: int,
    sample_every: int = 1,
    flavor: str = "TVT",
    reference: WaveState | None = None,
    compute_energy: bool = True,
) -> PropagationReport:
    """Apply n_steps composed steps, sampling diagnostics along the way.

    Sampling happens after every `sample_every` composed steps (no t=0 row).
    Reruns with identical inputs are bit-exact.  Non-finite amplitudes or
    runaway grid centers abort the run and return the last good samples with
    the `aborted` flag set.
    """
    if mode not in MODES:
        raise InvalidArgumentError(f"unknown mode {mode!r}; expected one of {MODES}")
    if n_steps < 1:
        raise InvalidArgumentError("n_steps must be >= 1")
    _warn_if_unstable(model, scheme, dt, mode)
    cache = _PotentialPhaseCache(model, state.grid) if mode == "fixed" else None
    t0_transforms = _gridmod.TRANSFORM_COUNT
    start = time.perf_counter()
    rec = {k: [] for k in ("t", "norm", "energy", "qc", "pc", "eq", "ep", "ov")}
    aborted = False
    done = 0
    current = state
    for step in range(1, n_steps + 1):
        try:
            if mode == "naive":
                nxt = naive_step(current, dt, model, scheme, flavor)
            else:
                nxt = current
                for gamma in scheme.coefficients:
                    nxt = strang_step(nxt, gamma * dt, model, mode, flavor, _cache=cache)
        except ModelDomainError:
            aborted = True
            break
        if not np.isfinite(nxt.data).all() or not _centers_ok(nxt.grid):
            aborted = True
            break
        current = nxt
        done = step
        if step % sample_every == 0:
            _record(rec, current, model, dt * step, reference, compute_energy)
    wall = time.perf_counter() - start
    series = DiagnosticSeries(
        times=np.array(rec["t"]),
        norm=np.array(rec["norm"]),
        energy=np.array(rec["energy"]),
        q_ctr=np.array(rec["qc"]).reshape(len(rec["t"]), -1),
        p_ctr=np.array(rec["pc"]).reshape(len(rec["t"]), -1),
        expect_q=np.array(rec["eq"]).reshape(len(rec["t"]), -1),
        expect_p=np.array(rec["ep"]).reshape(len(rec["t"]), -1),
        overlap_with_reference=(np.array(rec["ov"]) if reference is not None else None),
    )
    counts = {
        "composed_steps": done,
        "substeps": done * scheme.n_steps,
        "transforms": _gridmod.TRANSFORM_COUNT - t0_transforms,
    }
    return PropagationReport(
        final_state=current,
        series=series,
        wall_time=wall,
        counts=counts,
        aborted=aborted,
        completed_steps=done,
    )


def _record(rec, state, model, t, reference, compute_energy):
    rec["t"].append(t)
    rec["norm"].append(state.norm())
    rec["energy"].append(expect_energy(state, model) if compute_energy else np.nan)
    rec["qc"].append(state.grid.q_ctr)
    rec["pc"].append(state.grid.p_ctr)
    rec["eq"].append(expect_position(state))
    rec["ep"].append(expect_momentum(state))
    if reference is not None:
        # the moving frame legitimately leaves the reference's periodic cell;
        # the continuation values are negligible for a decayed reference
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            ref_here = resample(reference, state.grid)
        rec["ov"].append(inner_product(ref_here, state))


def _warn_if_unstable(model, scheme, dt, mode):
    if mode == "fixed" or model.hessian_at_minimum is None:
        return
    from .diagnostics import verlet_threshold  # local import to avoid a cycle

    try:
        threshold = verlet_threshold(model)
    except Exception:
        return
    if scheme.max_abs_coefficient * abs(dt) >= threshold:
        warnings.warn(
            f"substep size {scheme.max_abs_coefficient * abs(dt):.3g} exceeds the "
            f"center-update stability threshold {threshold:.3g}; "
            "the grid centers may diverge",
            stacklevel=3,
        )
