"""Hot numerical kernels with a compiled (Cython) core and a NumPy fallback.

The compiled extension is optional; set MGWAVE_KERNELS=numpy to force the
fallback (used by the benchmark and by tests comparing the two paths).
"""

import os

from . import fallback

if os.environ.get("MGWAVE_KERNELS", "").lower() == "numpy":
    _impl = fallback
else:
    try:
        from . import compiled as _impl
    except ImportError:
        _impl = fallback

BACKEND = _impl.BACKEND
apply_phase = _impl.apply_phase
apply_axis_phases = _impl.apply_axis_phases
