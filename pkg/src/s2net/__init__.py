"""Region graphs and magnetic 2-networks on triangulated surfaces in space."""

from .complex import (CellChain, ComplexError, OrientedComplex2, SparseSignMatrix, ValidationReport,
                      Violation, boundary, coboundary_matrix, reorient_triangle, validate_complex)
from .geometry import (DegenerateRayError, EdgeFan, FanAmbiguityError, GeometryError, SidePoint,
                       cyclic_order_around_edge, edge_fans, side_point, triangle_normal)
from .tag import (DualGraph, TagGraph, build_dual_graph, build_tag, component_labels, components,
                  external_side_witness, incidence_matrix)

__version__ = "0.1.0"
