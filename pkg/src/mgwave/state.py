"""The propagated object: a scaled complex amplitude tensor plus its grid."""

from __future__ import annotations

import dataclasses

import numpy as np

POSITION = "position"
MOMENTUM = "momentum"


@dataclasses.dataclass(frozen=True)
class WaveState:
    """Scaled wavefunction samples on a tensor-product grid.

    amplitudes[j_1, ..., j_D] holds the scaled value psi(x^J)/sqrt(C) where
    C is the opposite-representation prefactor of the discretized Fourier
    pair; with this convention the coefficient 2-norm is preserved by the
    forward/inverse transforms and by every unitary substep.
    """

    data: np.ndarray
    representation: str
    grid: "GridSpec"  # noqa: F821  (grid module imports this one)

    def __post_init__(self):
        if self.representation not in (POSITION, MOMENTUM):
            raise ValueError(f"unknown representation {self.representation!r}")
        if tuple(self.data.shape) != self.grid.counts:
            raise ValueError("amplitude tensor shape does not match the grid")

    def norm(self) -> float:
        """Euclidean 2-norm of the coefficient tensor."""
        return float(np.linalg.norm(self.data.ravel()))
