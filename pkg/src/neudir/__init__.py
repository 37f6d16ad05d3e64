"""Finite element comparison of Neumann and Dirichlet Laplacian eigenvalues on polygons."""

from .analytic import bessel_j, bessel_zero, disk_spectrum, square_spectrum
from .fem_scalar import Spectrum, scalar_spectrum
from .fem_vector import vector_spectrum
from .geometry import Polygon, TriMesh, builtin_domain, make_polygon, triangulate
from .verify import check_inequality, merge_spectra

__all__ = [
    "Polygon", "TriMesh", "Spectrum", "make_polygon", "builtin_domain", "triangulate",
    "scalar_spectrum", "vector_spectrum", "bessel_j", "bessel_zero", "square_spectrum",
    "disk_spectrum", "merge_spectra", "check_inequality",
]
__version__ = "0.1.0"
