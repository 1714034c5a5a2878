"""Backend selection for the hot Monte-Carlo integrand.

The compiled extension ``_kernels`` is used when it was built; otherwise, or
when ``MIXEDRATIOS_PURE_PYTHON=1`` is set, the numpy fallback is imported.
Both expose ``mixed_ratio_batch(eigs, A, B, C, D, E, F, completed, guard)``.
"""

import os

from . import _kernels_py

if os.environ.get("MIXEDRATIOS_PURE_PYTHON") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"

mixed_ratio_batch = _impl.mixed_ratio_batch

__all__ = ["BACKEND", "mixed_ratio_batch"]
