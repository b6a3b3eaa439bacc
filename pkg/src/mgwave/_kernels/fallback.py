"""Pure-NumPy implementations of the hot phase-application kernels."""

import numpy as np

BACKEND = "numpy"


def apply_phase(data, angle):
    """In-place data *= exp(1j*angle), with angle broadcastable to data."""
    data *= np.exp(1j * np.asarray(angle))
    return data


def apply_axis_phases(data, angles):
    """In-place multiply of a rank-D tensor by a separable phase.

    angles is a sequence of D real 1-D arrays; element (j_1,...,j_D) is
    multiplied by exp(1j * sum_l angles[l][j_l]).
    """
    ndim = data.ndim
    for axis, ang in enumerate(angles):
        shape = [1] * ndim
        shape[axis] = len(ang)
        data *= np.exp(1j * np.asarray(ang)).reshape(shape)
    return data
