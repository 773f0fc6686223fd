"""Event-kernel backends.

Two interchangeable implementations exist: a compiled Cython kernel for
speed and a pure-Python reference with identical semantics.  Import-time
selection prefers the compiled one; set TASRING_KERNEL=pure (or fast) to
force a backend explicitly.
"""

from __future__ import annotations

import os

from .pure import EP_CONTROL, EP_SINK, INF, PureKernel

try:
    from ._fast import FastKernel
except ImportError:
    FastKernel = None

_choice = os.environ.get("TASRING_KERNEL", "auto").strip().lower()

if _choice == "pure":
    Kernel = PureKernel
elif _choice == "fast":
    if FastKernel is None:
        raise ImportError(
            "TASRING_KERNEL=fast requested but the compiled kernel is not built"
        )
    Kernel = FastKernel
else:
    Kernel = FastKernel if FastKernel is not None else PureKernel

KERNEL_BACKEND = "fast" if (FastKernel is not None and Kernel is FastKernel) else "pure"

__all__ = [
    "EP_CONTROL",
    "EP_SINK",
    "INF",
    "Kernel",
    "KERNEL_BACKEND",
    "PureKernel",
    "FastKernel",
]
