"""Graph complexes: generators, differentials, chain maps, and cohomology.

The package realizes the Kontsevich graph complex and its directed,
oriented, targeted/sourced, two-edge-kind, four-edge-kind, two-vertex-color
and purely trivalent relatives; it enumerates bases at fixed loop order and
degree, assembles differentials and the inter-complex chain maps as exact
sparse matrices, and computes cohomology dimensions over finite fields and
the rationals.
"""

from .chains import Chain
from .families import ComplexId, ComplexSpec, FAMILIES, count_vectors, degree, get_spec, is_generator, spec_of
from .generate import Basis, BudgetExceeded, generate_basis, natural_degree_range, default_window, skeletons
from .graphs import (
    CanonicalForm,
    GraphError,
    LabeledGraph,
    OrientationRecipe,
    canonical_graph,
    canonicalize,
    decode,
    encode,
    has_solid_cycle,
    loop_number,
    valence_profile,
)

__version__ = "0.1.0"
