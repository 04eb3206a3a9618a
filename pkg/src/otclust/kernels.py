"""Backend selection for the hot assignment kernel.

Prefers the compiled Cython extension; falls back to the NumPy
implementation when the extension was not built or when the environment
variable ``OTCLUST_PURE_PYTHON`` is set to a non-empty value other
than ``0``.
"""

import os

_force_pure = os.environ.get("OTCLUST_PURE_PYTHON", "") not in ("", "0")

if _force_pure:
    from otclust._kernels_py import BACKEND, assign_and_masses
else:
    try:
        from otclust._kernels import BACKEND, assign_and_masses
    except ImportError:
        from otclust._kernels_py import BACKEND, assign_and_masses

__all__ = ["BACKEND", "assign_and_masses"]
