"""Global runtime knobs (worker threads for the FFT backend)."""

import os

_workers = max(1, min(os.cpu_count() or 1, 8))


def set_num_threads(n: int) -> None:
    """Cap the number of worker threads used inside transforms.

    Results are independent of the thread count; this only affects speed.
    """
    global _workers
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _workers = int(n)


def get_num_threads() -> int:
    return _workers
