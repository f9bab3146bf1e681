"""Feature-kernel backend selection.

Prefers the compiled extension and falls back to the NumPy implementation
when it is missing (source install without a compiler). Override with
``IMPULSEKIT_KERNELS=python`` or ``=cython``; the latter raises if the
extension is absent so benchmarks never silently compare python to python.
"""

import os

from impulsekit.kernels import pykernels

_choice = os.environ.get("IMPULSEKIT_KERNELS", "auto").lower()

if _choice == "python":
    _impl = pykernels
elif _choice == "cython":
    from impulsekit.kernels import _ckernels as _impl
elif _choice == "auto":
    try:
        from impulsekit.kernels import _ckernels as _impl
    except ImportError:
        _impl = pykernels
else:
    raise ValueError(f"IMPULSEKIT_KERNELS must be auto, cython, or python, not {_choice!r}")

path_length = _impl.path_length
segment_speeds = _impl.segment_speeds
max_segment_speed = _impl.max_segment_speed
max_accel = _impl.max_accel
chord_auc = _impl.chord_auc
distance_after = _impl.distance_after


def backend_name() -> str:
    """Name of the active backend: 'cython' or 'python'."""
    return _impl.BACKEND


def available_backends():
    """Importable backend modules, for tests and benchmarks."""
    backends = {"python": pykernels}
    try:
        from impulsekit.kernels import _ckernels
        backends["cython"] = _ckernels
    except ImportError:
        pass
    return backends
