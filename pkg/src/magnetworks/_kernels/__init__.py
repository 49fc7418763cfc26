"""Kernel backend selection.

The compiled extension is used when present; otherwise the NumPy reference
backend takes over. Both expose the same functions with bit-identical
results, so everything downstream is backend-agnostic.

Set MAGNETWORKS_KERNELS=python to force the reference backend, or
MAGNETWORKS_KERNELS=cython to require the extension (ImportError if it was
not built). Anything else (including unset) means auto.
"""
import os

_choice = os.environ.get("MAGNETWORKS_KERNELS", "auto").strip().lower()

if _choice == "python":
    from . import _reference as _impl
    BACKEND = "python"
elif _choice == "cython":
    from . import _core as _impl  # type: ignore[no-redef]
    BACKEND = "cython"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        from . import _reference as _impl
        BACKEND = "python"

gradient_faces_1d = _impl.gradient_faces_1d
gradient_faces_2d = _impl.gradient_faces_2d
divergence_1d = _impl.divergence_1d
divergence_2d = _impl.divergence_2d
neg_div_grad_1d = _impl.neg_div_grad_1d
neg_div_grad_2d = _impl.neg_div_grad_2d
upwind_fluxes_1d = _impl.upwind_fluxes_1d
upwind_fluxes_2d = _impl.upwind_fluxes_2d
fpe_step_1d = _impl.fpe_step_1d
fpe_step_2d = _impl.fpe_step_2d

__all__ = [
    "BACKEND",
    "gradient_faces_1d", "gradient_faces_2d",
    "divergence_1d", "divergence_2d",
    "neg_div_grad_1d", "neg_div_grad_2d",
    "upwind_fluxes_1d", "upwind_fluxes_2d",
    "fpe_step_1d", "fpe_step_2d",
]
