"""Dispatch layer over the two kernel backends (see accel)."""

from . import accel
from . import _kernels_numpy as numpy_impl

if accel.USE_NUMBA:
    from . import _kernels_numba as _active
else:
    _active = numpy_impl

BACKEND = accel.BACKEND

fill_triangles = _active.fill_triangles
median_filter_u8 = _active.median_filter_u8
trace_borders = _active.trace_borders
descriptor_bins = _active.descriptor_bins
nearest_centroid = _active.nearest_centroid
