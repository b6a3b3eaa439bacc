"""State factories, inner products, expectation values, and resampling.

Scaling convention
------------------
Amplitudes are stored in the scaled convention in which the forward/inverse
transforms are exactly unitary, so the coefficient 2-norm is the conserved
quantity.  The coefficient 2-norm differs from the physical L2 norm by the
constant factor returned by :func:`physical_norm_factor`; the factor depends
only on counts and hbar, never on the (moving) centers, so it is constant
along any propagation.  Inner products of unit-coefficient-norm states are
identical to inner products of unit-physical-norm wavefunctions, which is
why plain coefficient dot products reproduce continuum overlaps.
"""

from __future__ import annotations

import functools
import math
import operator
import struct
import warnings

import numpy as np

from .errors import (
    DegenerateStateError,
    IncompatibleGridError,
    TruncationWarning,
)
from .grid import (
    GridSpec,
    make_grid,
    momentum_axes,
    position_axes,
    to_momentum,
    to_position,
)
from .state import MOMENTUM, POSITION, WaveState

__all__ = [
    "WaveState",
    "gaussian_state",
    "inner_product",
    "expect_position",
    "expect_momentum",
    "expect_energy",
    "resample",
    "physical_norm_factor",
    "save_state",
    "load_state",
]


def physical_norm_factor(grid: GridSpec) -> float:
    """Ratio physical-L2-norm / coefficient-2-norm for states on this grid."""
    h = 2.0 * math.pi * grid.hbar
    return math.sqrt(math.prod(math.sqrt(h) / n for n in grid.counts))


def gaussian_state(grid: GridSpec, center_q, center_p, widths) -> WaveState:
    """Product of 1-D Gaussians with per-dimension width sigma_l.

    psi_l(q) = (pi*sigma_l^2)^(-1/4) exp[-(q - q0)^2 / (2 sigma_l^2)
                                         + i p0 (q - q0) / hbar],
    normalized so the coefficient 2-norm is exactly 1.  Warns if the grid
    does not comfortably contain the packet.
    """
    center_q = np.asarray(center_q, dtype=float)
    center_p = np.asarray(center_p, dtype=float)
    widths = np.asarray(widths, dtype=float)
    d = grid.dims
    if not (center_q.shape == center_p.shape == widths.shape == (d,)):
        raise IncompatibleGridError("centers/widths must have one entry per dimension")
    factors = []
    for l, q in enumerate(position_axes(grid)):
        half_span = grid.counts[l] * grid.dq[l] / 2.0
        if half_span < 3.0 * widths[l] or abs(center_q[l] - grid.q_ctr[l]) > half_span:
            warnings.warn(
                f"dimension {l}: grid covers less than ~6 widths around the packet",
                TruncationWarning,
                stacklevel=2,
            )
        dq = q - center_q[l]
        amp = np.exp(-(dq**2) / (2.0 * widths[l] ** 2) + 1j * center_p[l] * dq / grid.hbar)
        shape = [1] * d
        shape[l] = len(q)
        factors.append(amp.reshape(shape))
    data = np.array(functools.reduce(operator.mul, factors), dtype=np.complex128)
    _warn_boundary_amplitude(data)
    data /= np.linalg.norm(data.ravel())
    return WaveState(data, POSITION, grid)


def _warn_boundary_amplitude(data, rel_threshold=1e-7):
    peak = np.abs(data).max()
    if peak == 0.0:
        return
    for ax in range(data.ndim):
        lo = abs(np.take(data, 0, axis=ax)).max()
        hi = abs(np.take(data, -1, axis=ax)).max()
        if max(lo, hi) > rel_threshold * peak:
            warnings.warn(
                f"boundary amplitude exceeds {rel_threshold:g} of the peak "
                f"along axis {ax}; the packet is truncated",
                TruncationWarning,
                stacklevel=3,
            )
            return


def _check_same_grid(a: WaveState, b: WaveState):
    if a.representation != b.representation:
        raise IncompatibleGridError("states are in different representations")
    ga, gb = a.grid, b.grid
    if not ga.same_lattice(gb) or ga.q_ctr != gb.q_ctr or ga.p_ctr != gb.p_ctr:
        raise IncompatibleGridError(
            "states live on different grids; resample one of them first"
        )


def inner_product(a: WaveState, b: WaveState) -> complex:
    """Grid inner product <a|b>, conjugate-linear in the first argument.

    Expressed in scaled coefficients this is the plain coefficient dot
    product: the spacing and scaling prefactors are the same constant for
    both states and drop out of any normalized quantity.
    """
    _check_same_grid(a, b)
    return complex(np.vdot(a.data, b.data))


def _weights(state: WaveState) -> np.ndarray:
    w = np.abs(state.data) ** 2
    total = w.sum()
    if total <= 0.0 or not np.isfinite(total):
        raise DegenerateStateError("state has zero (or non-finite) norm")
    return w / total


def _axis_first_moments(w: np.ndarray, axes: list[np.ndarray]) -> np.ndarray:
    d = w.ndim
    out = np.empty(d)
    for l in range(d):
        reduce_axes = tuple(ax for ax in range(d) if ax != l)
        out[l] = float(w.sum(axis=reduce_axes) @ axes[l])
    return out


def expect_position(state: WaveState) -> np.ndarray:
    """Normalized first moment of position, one value per dimension."""
    if state.representation != POSITION:
        raise IncompatibleGridError("expect_position needs the position representation")
    return _axis_first_moments(_weights(state), position_axes(state.grid))


def expect_momentum(state: WaveState) -> np.ndarray:
    """Normalized first moment of momentum on the current momentum frame."""
    if state.representation == POSITION:
        state = to_momentum(state, state.grid.p_ctr)
    return _axis_first_moments(_weights(state), momentum_axes(state.grid))


def expect_energy(state: WaveState, model) -> float:
    """<V> in the position representation plus <T> in the momentum one."""
    if state.representation == MOMENTUM:
        state = to_position(state, state.grid.q_ctr)
    wq = _weights(state)
    pot = model.potential(_open_mesh(position_axes(state.grid)))
    v_mean = float((wq * pot).sum())
    kstate = to_momentum(state, state.grid.p_ctr)
    wp = _weights(kstate)
    kin = model.kinetic(_open_mesh(momentum_axes(kstate.grid)))
    t_mean = float((wp * kin).sum())
    return v_mean + t_mean


def _open_mesh(axes: list[np.ndarray]) -> tuple[np.ndarray, ...]:
    d = len(axes)
    out = []
    for l, ax in enumerate(axes):
        shape = [1] * d
        shape[l] = len(ax)
        out.append(ax.reshape(shape))
    return tuple(out)


def resample(state: WaveState, target: GridSpec) -> WaveState:
    """Evaluate the state's trigonometric interpolant on another grid.

    The finite Fourier-series representation implied by the source grid
    (including its center phases) is evaluated at the target grid's physical
    points; the result is expressed in the target grid's scaled convention,
    preserving physical values.  Intended for diagnostics and comparisons,
    never used inside propagation.
    """
    if state.representation == MOMENTUM:
        state = to_position(state, state.grid.q_ctr)
    src = state.grid
    if src.dims != target.dims:
        raise IncompatibleGridError("source and target dimensionality differ")
    hbar = src.hbar
    for l, tq in enumerate(position_axes(target)):
        # small slack so roundoff-level center offsets do not count as leaving
        half_cell = src.counts[l] * src.dq[l] / 2.0 + 1e-9 * src.dq[l]
        if (tq < src.q_ctr[l] - half_cell).any() or (tq > src.q_ctr[l] + half_cell).any():
            warnings.warn(
                f"axis {l}: target points fall outside the source periodic cell; "
                "values there are periodic continuations",
                TruncationWarning,
                stacklevel=2,
            )
    tilde = to_momentum(state, src.p_ctr)
    work = tilde.data
    p_axes = momentum_axes(tilde.grid)
    for l, tq in enumerate(position_axes(target)):
        mat = np.exp(1j * np.outer(tq, p_axes[l]) / hbar)
        work = np.moveaxis(np.tensordot(mat, work, axes=([1], [l])), 0, l)
    c_p_src = math.prod(s / math.sqrt(2.0 * math.pi * hbar) for s in src.dp)
    c_q_src = math.prod(s / math.sqrt(2.0 * math.pi * hbar) for s in src.dq)
    c_p_tgt = math.prod(s / math.sqrt(2.0 * math.pi * hbar) for s in target.dp)
    scale = c_p_src * math.sqrt(c_q_src) / math.sqrt(c_p_tgt)
    return WaveState(np.ascontiguousarray(work * scale), POSITION, target)


# -- checkpoint format --------------------------------------------------------
#
# "MGWF1" (5 bytes) | u32 D | u32 rep (0=position, 1=momentum)
# | D x u64 counts | D x f64 dq | D x f64 dp | D x f64 q_ctr | D x f64 p_ctr
# | f64 hbar | N x (f64 re, f64 im) in row-major multi-index order.
# All integers/floats little-endian.

_MAGIC = b"MGWF1"


def save_state(state: WaveState, path) -> None:
    g = state.grid
    d = g.dims
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", d, 0 if state.representation == POSITION else 1))
        fh.write(struct.pack(f"<{d}Q", *g.counts))
        for vec in (g.dq, g.dp, g.q_ctr, g.p_ctr):
            fh.write(struct.pack(f"<{d}d", *vec))
        fh.write(struct.pack("<d", g.hbar))
        fh.write(np.ascontiguousarray(state.data, dtype="<c16").tobytes())


def load_state(path) -> WaveState:
    with open(path, "rb") as fh:
        if fh.read(5) != _MAGIC:
            raise ValueError(f"{path}: not an MGWF1 checkpoint")
        d, rep = struct.unpack("<II", fh.read(8))
        counts = struct.unpack(f"<{d}Q", fh.read(8 * d))
        dq = struct.unpack(f"<{d}d", fh.read(8 * d))
        dp = struct.unpack(f"<{d}d", fh.read(8 * d))
        q_ctr = struct.unpack(f"<{d}d", fh.read(8 * d))
        p_ctr = struct.unpack(f"<{d}d", fh.read(8 * d))
        (hbar,) = struct.unpack("<d", fh.read(8))
        n = math.prod(counts)
        data = np.frombuffer(fh.read(16 * n), dtype="<c16").reshape(counts)
    grid = make_grid(counts, q_ctr, dq, p_ctr, hbar=hbar)
    expected_dp = grid.dp
    if not np.allclose(expected_dp, dp, rtol=1e-12):
        raise ValueError(f"{path}: inconsistent spacings in checkpoint header")
    rep_name = POSITION if rep == 0 else MOMENTUM
    return WaveState(np.array(data, dtype=np.complex128), rep_name, grid)
