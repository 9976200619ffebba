"""Kernel backend selection.

The compiled extension is used when it imported cleanly; otherwise the
pure-Python implementation takes over.  Setting the environment variable
``RETROBLEU_PURE_KERNELS=1`` forces the fallback, which is handy for
debugging and for the kernel benchmark.
"""

from __future__ import annotations

import os

from . import pure

BACKEND = "pure"
_impl = pure

if not os.environ.get("RETROBLEU_PURE_KERNELS"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        pass

count_chain_windows = _impl.count_chain_windows
count_recorded_windows = _impl.count_recorded_windows
iter_window_indices = pure.iter_window_indices


def available_backends() -> dict[str, object]:
    """Map backend name to its module, for tests and benchmarks."""
    backends: dict[str, object] = {"pure": pure}
    try:
        from . import _core

        backends["compiled"] = _core
    except ImportError:
        pass
    return backends
