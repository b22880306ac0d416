"""Kernel dispatch: compiled extension when available, numpy fallback otherwise."""

try:
    from oneirotax.kernels import _kernels as _impl

    HAVE_COMPILED = True
except ImportError:  # extension not built
    from oneirotax.kernels import _kernels_py as _impl

    HAVE_COMPILED = False

mst_prim = _impl.mst_prim
kmeans_assign = _impl.kmeans_assign

__all__ = ["mst_prim", "kmeans_assign", "HAVE_COMPILED"]
