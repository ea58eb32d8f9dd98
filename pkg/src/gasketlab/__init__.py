"""Sierpinski gasket variants: constructions, spectra, geodesics, measures.

The package builds the classical gasket, its stretched variant, and the
harmonic-embedding variant; assembles the length spectra of their
direct-sum curve operators; and recovers spectral dimension, geodesic
distance, and Dixmier-trace measures numerically.
"""

from gasketlab.geometry import (
    AffineMap,
    EdgeCurve,
    GasketError,
    GasketModel,
    ResourceCapError,
    Word,
    build_model,
    compose_word,
    generator_map,
    model_vertices,
)
from gasketlab.harmonic import (
    VertexFunction,
    boundary_function,
    energy,
    estimate_edge_length,
    harmonic_extend,
    harmonic_structure,
    m_word_norm,
    phi,
    renormalized_energy,
)
from gasketlab.metric import (
    GeodesicResult,
    MetricGraph,
    geodesic,
    lipschitz_witness_check,
    to_metric_graph,
)
from gasketlab.measure import (
    FunctionalSample,
    dixmier_functional,
    functional_sample,
    harmonic_midpoint_functional,
    joining_edge_functional,
    self_affinity_residual,
    selfaffine_mass_spread,
    sg_midpoint_functional,
)
from gasketlab.spectrum import (
    DimensionEstimate,
    DivergenceError,
    LengthSpectrum,
    ResidueResult,
    abscissa_bracket,
    curve_trace,
    curve_trace_constant,
    kh_dimension_interval,
    residue_estimate,
    riemann_zeta,
    sg_length_spectrum,
    spectral_dimension,
    spectrum_trace,
    stretched_dimension,
    stretched_dixmier_constant,
    stretched_length_spectrum,
)
from gasketlab.expr import TestFunction, parse_expr

__version__ = "0.1.0"
