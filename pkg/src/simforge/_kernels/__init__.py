"""Backend selection for the coupling-matrix kernel.

The compiled Cython kernel is preferred when its extension module built;
otherwise (or when SIMFORGE_PURE=1 is set) the numpy fallback is used.
Both backends implement the same rs_matrix contract and agree to float
rounding; benchmarks/bench_kernels.py compares their throughput.
"""

import os

from . import numpy_backend

if os.environ.get("SIMFORGE_PURE") == "1":
    active = numpy_backend
else:
    try:
        from . import _rs_cython as active  # noqa: F401
    except ImportError:
        active = numpy_backend

rs_matrix = active.rs_matrix


def backend_name():
    return active.NAME
