"""Tensor-product grid geometry and the center-dependent Fourier transforms.

The grid in each dimension l has N_l uniformly spaced points centered (at
index N_l/2) on a continuous, freely movable center.  Position and momentum
spacings are locked together by dq_l * dp_l = 2*pi*hbar / N_l, so a single
GridSpec describes both the q-grid and the p-grid of a phase-space frame.

The transforms between the two representations are standard FFTs dressed
with separable center-dependent phases; no fftshift-style reordering is used
anywhere, all centering lives in the phases.
"""

from __future__ import annotations

import dataclasses
import math
from math import fsum, pi

import numpy as np
import scipy.fft

from . import _config
from ._kernels import apply_axis_phases
from .errors import IncompatibleGridError, InvalidArgumentError
from .state import MOMENTUM, POSITION, WaveState

#: number of forward/inverse transforms executed (performance accounting)
TRANSFORM_COUNT = 0


@dataclasses.dataclass(frozen=True)
class MultiIndexSet:
    """The set of admissible multi-indices of a D-dimensional tensor grid."""

    counts: tuple[int, ...]

    def __post_init__(self):
        for l, n in enumerate(self.counts):
            if int(n) != n or n < 1:
                raise InvalidArgumentError(
                    f"dimension {l}: point count must be a positive integer, got {n}"
                )
        object.__setattr__(self, "counts", tuple(int(n) for n in self.counts))

    @property
    def dims(self) -> int:
        return len(self.counts)

    @property
    def size(self) -> int:
        return math.prod(self.counts)

    def __iter__(self):
        """Row-major iteration over all multi-indices (deterministic order)."""
        return iter(np.ndindex(self.counts))


@dataclasses.dataclass(frozen=True)
class GridSpec:
    """Geometry of one phase-space frame: counts, spacings, and centers.

    Centers are continuous reals and are never snapped to the lattice.
    """

    index_set: MultiIndexSet
    q_ctr: tuple[float, ...]
    p_ctr: tuple[float, ...]
    dq: tuple[float, ...]
    dp: tuple[float, ...]
    hbar: float = 1.0

    @property
    def counts(self) -> tuple[int, ...]:
        return self.index_set.counts

    @property
    def dims(self) -> int:
        return self.index_set.dims

    @property
    def size(self) -> int:
        return self.index_set.size

    def with_centers(self, q_ctr=None, p_ctr=None) -> "GridSpec":
        """A copy of this grid with one or both centers replaced."""
        q = self.q_ctr if q_ctr is None else tuple(float(x) for x in q_ctr)
        p = self.p_ctr if p_ctr is None else tuple(float(x) for x in p_ctr)
        return dataclasses.replace(self, q_ctr=q, p_ctr=p)

    def same_lattice(self, other: "GridSpec") -> bool:
        """True if counts and spacings agree (centers may differ)."""
        return (
            self.counts == other.counts
            and self.dq == other.dq
            and self.dp == other.dp
            and self.hbar == other.hbar
        )


def make_grid(counts, q_ctr, dq, p_ctr, hbar=1.0) -> GridSpec:
    """Build a GridSpec; the momentum spacing follows from dp = 2*pi*hbar/(N*dq)."""
    index_set = MultiIndexSet(tuple(counts))
    d = index_set.dims
    q_ctr = tuple(float(x) for x in q_ctr)
    p_ctr = tuple(float(x) for x in p_ctr)
    dq = tuple(float(x) for x in dq)
    if not (len(q_ctr) == len(p_ctr) == len(dq) == d):
        raise InvalidArgumentError("counts, centers, and spacings must share length")
    for l, (n, s) in enumerate(zip(index_set.counts, dq)):
        if n < 2:
            raise InvalidArgumentError(f"dimension {l}: need at least 2 points, got {n}")
        if not s > 0:
            raise InvalidArgumentError(f"dimension {l}: spacing must be positive, got {s}")
    dp = tuple(2.0 * pi * hbar / (n * s) for n, s in zip(index_set.counts, dq))
    return GridSpec(index_set, q_ctr, p_ctr, dq, dp, float(hbar))


def axis_coordinates(grid: GridSpec, which: str, axis: int) -> np.ndarray:
    """Grid coordinates x_ctr + (i - N/2)*dx along one axis (0-based axis index)."""
    if not 0 <= axis < grid.dims:
        raise InvalidArgumentError(f"axis {axis} out of range for D={grid.dims}")
    n = grid.counts[axis]
    if which == POSITION:
        ctr, dx = grid.q_ctr[axis], grid.dq[axis]
    elif which == MOMENTUM:
        ctr, dx = grid.p_ctr[axis], grid.dp[axis]
    else:
        raise InvalidArgumentError(f"unknown representation {which!r}")
    return ctr + (np.arange(n) - n / 2.0) * dx


def position_axes(grid: GridSpec) -> list[np.ndarray]:
    return [axis_coordinates(grid, POSITION, l) for l in range(grid.dims)]


def momentum_axes(grid: GridSpec) -> list[np.ndarray]:
    return [axis_coordinates(grid, MOMENTUM, l) for l in range(grid.dims)]


def _phase_pieces(grid: GridSpec, q_ctr, p_ctr):
    """Separable pieces of the center phase linking the shifted transform to a DFT.

    The per-element phase time splits exactly into a j-only part, a k-only
    part, and a constant; returns (j_angles, k_angles, const_angle) already
    divided by hbar, for the forward (position -> momentum) direction.
    """
    hbar = grid.hbar
    j_angles = []
    k_angles = []
    const_terms = []
    for l, n in enumerate(grid.counts):
        idx = np.arange(n)
        j_angles.append(-(p_ctr[l] * grid.dq[l] - pi * hbar) / hbar * idx)
        k_angles.append(-(q_ctr[l] * grid.dp[l] - pi * hbar) / hbar * idx)
        const_terms.append(
            (p_ctr[l] - grid.dp[l] * n / 2.0) * (q_ctr[l] - grid.dq[l] * n / 2.0)
        )
    return j_angles, k_angles, -fsum(const_terms) / hbar


def to_momentum(state: WaveState, target_p_ctr=None) -> WaveState:
    """Transform a position-representation state to the momentum grid.

    The momentum grid is centered at target_p_ctr (default: the state's
    current momentum center).  Implemented as diagonal phase x DFT x
    diagonal phase x scalar phase; cost O(N log N), norm-preserving.
    """
    global TRANSFORM_COUNT
    if state.representation != POSITION:
        raise IncompatibleGridError("to_momentum needs a position-representation state")
    grid = state.grid
    if target_p_ctr is None:
        target_p_ctr = grid.p_ctr
    target_p_ctr = tuple(float(x) for x in target_p_ctr)
    if len(target_p_ctr) != grid.dims:
        raise IncompatibleGridError("target momentum center has wrong dimension")
    j_ang, k_ang, const = _phase_pieces(grid, grid.q_ctr, target_p_ctr)
    work = np.array(state.data, dtype=np.complex128, copy=True)
    apply_axis_phases(work, j_ang)
    work = scipy.fft.fftn(
        work, norm="ortho", overwrite_x=True, workers=_config.get_num_threads()
    )
    apply_axis_phases(work, k_ang)
    work *= complex(math.cos(const), math.sin(const))
    TRANSFORM_COUNT += 1
    return WaveState(work, MOMENTUM, grid.with_centers(p_ctr=target_p_ctr))


def to_position(state: WaveState, target_q_ctr=None) -> WaveState:
    """Inverse of to_momentum: momentum representation back to the q-grid.

    The position grid is centered at target_q_ctr (default: the state's
    current position center); with unchanged centers this is exactly the
    inverse (adjoint) of to_momentum.
    """
    global TRANSFORM_COUNT
    if state.representation != MOMENTUM:
        raise IncompatibleGridError("to_position needs a momentum-representation state")
    grid = state.grid
    if target_q_ctr is None:
        target_q_ctr = grid.q_ctr
    target_q_ctr = tuple(float(x) for x in target_q_ctr)
    if len(target_q_ctr) != grid.dims:
        raise IncompatibleGridError("target position center has wrong dimension")
    j_ang, k_ang, const = _phase_pieces(grid, target_q_ctr, grid.p_ctr)
    work = np.array(state.data, dtype=np.complex128, copy=True)
    apply_axis_phases(work, [-a for a in k_ang])
    work = scipy.fft.ifftn(
        work, norm="ortho", overwrite_x=True, workers=_config.get_num_threads()
    )
    apply_axis_phases(work, [-a for a in j_ang])
    work *= complex(math.cos(const), -math.sin(const))
    TRANSFORM_COUNT += 1
    return WaveState(work, POSITION, grid.with_centers(q_ctr=target_q_ctr))
