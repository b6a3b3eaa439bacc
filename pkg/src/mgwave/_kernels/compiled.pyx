# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Fused phase-application kernels (hot path of every split-operator substep)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin

from . import fallback

BACKEND = "cython"


def apply_phase(data, angle):
    """In-place data *= exp(1j*angle); angle must broadcast to data's shape."""
    if not data.flags["C_CONTIGUOUS"] or data.dtype != np.complex128:
        return fallback.apply_phase(data, angle)
    ang = np.broadcast_to(np.asarray(angle, dtype=np.float64), data.shape)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a = np.ascontiguousarray(ang).reshape(-1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d = data.reshape(-1).view(np.float64)
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double c, s, re, im
    for i in range(n):
        c = cos(a[i])
        s = sin(a[i])
        re = d[2 * i]
        im = d[2 * i + 1]
        d[2 * i] = re * c - im * s
        d[2 * i + 1] = re * s + im * c
    return data


def apply_axis_phases(data, angles):
    """In-place separable phase multiply: one fused pass over the tensor.

    The tensor is walked row by row (last axis contiguous); an odometer over
    the outer axes maintains a prefix product of their phase factors, so each
    element costs two complex multiplies and no index arithmetic.
    """
    if not data.flags["C_CONTIGUOUS"] or data.dtype != np.complex128:
        return fallback.apply_axis_phases(data, angles)
    if len(angles) != data.ndim:
        raise ValueError("need one angle vector per tensor axis")
    cdef Py_ssize_t nd = data.ndim
    if nd > 32:
        return fallback.apply_axis_phases(data, angles)
    tables = [np.exp(1j * np.asarray(ang, dtype=np.float64)) for ang in angles]
    cdef double complex[::1] tb = np.ascontiguousarray(
        np.concatenate(tables), dtype=np.complex128)
    shape = data.shape
    cdef Py_ssize_t[32] sz, offs, ctr
    cdef Py_ssize_t ax, off = 0
    for ax in range(nd):
        sz[ax] = shape[ax]
        offs[ax] = off
        ctr[ax] = 0
        off += sz[ax]
    cdef double complex[::1] d = data.reshape(-1)
    cdef Py_ssize_t n_last = sz[nd - 1]
    cdef Py_ssize_t rows = data.size // n_last
    cdef Py_ssize_t last_off = offs[nd - 1]
    cdef double complex[33] prefix
    prefix[0] = 1.0
    for ax in range(nd - 1):
        prefix[ax + 1] = prefix[ax] * tb[offs[ax]]
    cdef double complex outer
    cdef Py_ssize_t r, j, base = 0, ax2, ax3
    for r in range(rows):
        outer = prefix[nd - 1]
        for j in range(n_last):
            d[base + j] = d[base + j] * (outer * tb[last_off + j])
        base += n_last
        ax2 = nd - 2
        while ax2 >= 0:
            ctr[ax2] += 1
            if ctr[ax2] < sz[ax2]:
                break
            ctr[ax2] = 0
            ax2 -= 1
        if ax2 >= 0:
            for ax3 in range(ax2, nd - 1):
                prefix[ax3 + 1] = prefix[ax3] * tb[offs[ax3] + ctr[ax3]]
    return data
