"""Compare the compiled (Cython) phase kernels against the NumPy fallback.

Usage:  python3 benchmarks/bench_kernels.py [--sizes 32 64 128]

Times apply_phase and apply_axis_phases on D=3 complex tensors at several
edge lengths, plus one full propagation step with each backend, and prints
a small table.  Run with MGWAVE_KERNELS=numpy to confirm the fallback is
what the benchmark says it is.
"""

import argparse
import time

import numpy as np

from mgwave._kernels import fallback

try:
    from mgwave._kernels import compiled
except ImportError:
    compiled = None


def best_of(fn, *args, reps=7):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(sizes):
    rng = np.random.default_rng(0)
    rows = []
    for n in sizes:
        shape = (n, n, n)
        data = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        angle = rng.standard_normal(shape)
        axis_angles = [rng.standard_normal(n) for _ in range(3)]
        row = {"n": n}
        for label, mod in (("numpy", fallback), ("cython", compiled)):
            if mod is None:
                continue
            row[f"phase_{label}"] = best_of(mod.apply_phase, data.copy(), angle)
            row[f"axis_{label}"] = best_of(
                mod.apply_axis_phases, data.copy(), axis_angles
            )
        rows.append(row)
    return rows


def bench_step():
    """One composed order-10 step on the 3-D harmonic model, per backend."""
    import mgwave as mg

    out = {}
    grid = mg.make_grid([32] * 3, [0.0] * 3, [0.4375] * 3, [0.0] * 3)
    state = mg.initial_state_for("harmonic", grid)
    model = mg.harmonic_excited()
    scheme = mg.compose_scheme("optimal", 10)

    import mgwave._kernels as kernels
    import mgwave.grid as gridmod

    original = kernels.apply_axis_phases
    backends = [("numpy", fallback)]
    if compiled is not None:
        backends.append(("cython", compiled))
    for label, mod in backends:
        gridmod.apply_axis_phases = mod.apply_axis_phases
        try:
            mg.propagate(state, model, "reversible", scheme, 0.1, 2,
                         sample_every=2, compute_energy=False)  # warm up
            t0 = time.perf_counter()
            mg.propagate(state, model, "reversible", scheme, 0.1, 10,
                         sample_every=10, compute_energy=False)
            out[label] = (time.perf_counter() - t0) / 10
        finally:
            gridmod.apply_axis_phases = original
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128])
    args = ap.parse_args()

    if compiled is None:
        print("compiled extension not available; benchmarking fallback only")
    rows = bench_kernels(args.sizes)
    hdr = f"{'n^3':>6} {'phase numpy':>12} {'phase cython':>13} {'axis numpy':>12} {'axis cython':>13}"
    print(hdr)
    for r in rows:
        def fmt(key):
            return f"{r[key] * 1e3:10.3f} ms" if key in r else f"{'-':>12}"
        print(f"{r['n']:>6}", fmt("phase_numpy"), fmt("phase_cython"),
              fmt("axis_numpy"), fmt("axis_cython"))

    print()
    step = bench_step()
    for label, t in step.items():
        print(f"order-10 composed step, 32^3 harmonic, {label:>6}: {t * 1e3:8.1f} ms")


if __name__ == "__main__":
    main()
