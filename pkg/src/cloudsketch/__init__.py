"""cloudsketch: sketch-driven 3D model retrieval and alignment from sparse point clouds."""

from .accel import BACKEND
from .geometry import (Normalization, RigidTransform, TriangleMesh, Viewpoint,
                       fibonacci_viewpoints, normalize_unit, sample_surface)
from .icp import IcpParams, IcpResult, icp, nearest_neighbor_pairs, rigid_fit
from .meshio import parse_obj, parse_off, parse_pointcloud, write_obj, write_xyz
from .retrieval import (DescriptorParams, InvertedIndex, RetrievalHit, Vocabulary,
                        build_index, build_vocabulary, query, quantize)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "DescriptorParams", "IcpParams", "IcpResult", "InvertedIndex",
    "Normalization", "RetrievalHit", "RigidTransform", "TriangleMesh", "Viewpoint",
    "Vocabulary", "build_index", "build_vocabulary", "fibonacci_viewpoints", "icp",
    "nearest_neighbor_pairs", "normalize_unit", "parse_obj", "parse_off",
    "parse_pointcloud", "quantize", "query", "rigid_fit", "sample_surface",
    "write_obj", "write_xyz",
]
