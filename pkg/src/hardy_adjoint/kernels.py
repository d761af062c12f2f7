"""Backend selection for the numerical hot loops.

The compiled extension is used when it imports; otherwise, or when
``HARDY_ADJOINT_PURE=1`` is set, the numpy implementations are used.
"""
import os

from . import _kernels_py

BACKEND = "python"

if os.environ.get("HARDY_ADJOINT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
else:
    _impl = _kernels_py

horner = _impl.horner
rational = _impl.rational
poisson_atoms = _impl.poisson_atoms
panel_nodes = _impl.panel_nodes
row_dot = _impl.row_dot

__all__ = ["BACKEND", "horner", "rational", "poisson_atoms", "panel_nodes", "row_dot"]
