"""critfield: critical points of smooth Gaussian random fields.

Simulates random-wave realizations with exact jets, enumerates and
classifies their critical points, and cross-checks the counts and height
distributions against a matrix Monte Carlo oracle, under diffeomorphic
reparameterizations of the domain (including anisotropic linear maps and
sphere/ellipsoid surfaces).
"""

from .backends import backend_name
from .covariance import CovarianceModel, SpectralMoments, make_covariance, spectral_moments
from .critical import (
    CriticalCatalog,
    CriticalPoint,
    MatchReport,
    NonMorseError,
    SearchConfig,
    classify,
    count_mu,
    find_critical_points,
    match_catalogs,
    morse_sum,
)
from .diffeo import TransformedField, make_diffeomorphism, transform_field
from .domain import Box, MappedBox, Torus
from .field import (
    FieldJet,
    SpectralFieldRealization,
    evaluate,
    realization_from_text,
    realization_to_text,
    sample_field,
)
from .kacrice import (
    DensityEstimate,
    HeightDistEstimate,
    estimate_height_dist,
    expected_count_density,
    predicted_aniso_count,
    sample_value_hessian,
)
from .rng import substream
from .surface import (
    Ellipsoid,
    SurfaceCatalog,
    SurfaceField,
    SurfaceSearchConfig,
    ellipsoid_field,
    export_surface_mesh,
    find_surface_critical_points,
    sphere_field,
    verify_surface_correspondence,
)

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "CovarianceModel",
    "SpectralMoments",
    "make_covariance",
    "spectral_moments",
    "CriticalCatalog",
    "CriticalPoint",
    "MatchReport",
    "NonMorseError",
    "SearchConfig",
    "classify",
    "count_mu",
    "find_critical_points",
    "match_catalogs",
    "morse_sum",
    "TransformedField",
    "make_diffeomorphism",
    "transform_field",
    "Box",
    "MappedBox",
    "Torus",
    "FieldJet",
    "SpectralFieldRealization",
    "evaluate",
    "realization_from_text",
    "realization_to_text",
    "sample_field",
    "DensityEstimate",
    "HeightDistEstimate",
    "estimate_height_dist",
    "expected_count_density",
    "predicted_aniso_count",
    "sample_value_hessian",
    "substream",
    "Ellipsoid",
    "SurfaceCatalog",
    "SurfaceField",
    "SurfaceSearchConfig",
    "ellipsoid_field",
    "export_surface_mesh",
    "find_surface_critical_points",
    "sphere_field",
    "verify_surface_correspondence",
    "__version__",
]
