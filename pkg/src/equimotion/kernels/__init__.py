"""Hot numeric kernels with backend selection.

The numba backend is used when importable; set EQUIMOTION_DISABLE_NUMBA=1
to force the pure-numpy fallback. `equimotion bench` times the two paths
against each other.
"""

import os

from . import numpy_backend

if os.environ.get("EQUIMOTION_DISABLE_NUMBA", "").strip() not in ("", "0"):
    _impl = numpy_backend
else:
    try:
        from . import numba_backend as _impl
    except ImportError:
        _impl = numpy_backend

BACKEND = _impl.BACKEND

im2col = _impl.im2col
col2im = _impl.col2im
maxpool2x2 = _impl.maxpool2x2
maxpool2x2_backward = _impl.maxpool2x2_backward
bilinear_resize = _impl.bilinear_resize
iou_matrix = _impl.iou_matrix
nms = _impl.nms

__all__ = [
    "BACKEND",
    "im2col",
    "col2im",
    "maxpool2x2",
    "maxpool2x2_backward",
    "bilinear_resize",
    "iou_matrix",
    "nms",
]
