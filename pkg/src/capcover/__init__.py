"""Convex body approximation via Macbeath regions, polar caps, and layered
witness-collector cap covers."""

from .bodies import (
    Ball,
    Box,
    ConvexBody,
    EllipsoidBody,
    LpBall,
    PolytopeBody,
    TransformedBody,
    body_from_spec,
    to_canonical,
)
from .caps import (
    Cap,
    MacbeathRegion,
    boundary_packing,
    expand_cap,
    macbeath,
    make_cap,
    minimal_cap,
    polytopal_proxy,
    volume_class,
    volume_histogram,
)
from .construction import (
    ApproximationResult,
    ConstructionConfig,
    approximate,
    assemble,
    bronshteyn_ivanov,
    build_balanced_cover,
    build_layers,
    dudley,
    verify_witness_collector,
)
from .errors import CapCoverError
from .geometry import (
    ComplexityProfile,
    Polytope,
    convex_hull,
    halfspace_intersection,
)
from .metrics import (
    ExperimentRecord,
    ScalingFit,
    fit_scaling,
    hausdorff_inner,
    run_experiment,
)
from .polar import dual_cap_polar, mahler, mahler_cap_product, pi_map, polar_body

__version__ = "0.1.0"

__all__ = [
    "Ball", "Box", "ConvexBody", "EllipsoidBody", "LpBall", "PolytopeBody",
    "TransformedBody", "body_from_spec", "to_canonical",
    "Cap", "MacbeathRegion", "boundary_packing", "expand_cap", "macbeath",
    "make_cap", "minimal_cap", "polytopal_proxy", "volume_class",
    "volume_histogram",
    "ApproximationResult", "ConstructionConfig", "approximate", "assemble",
    "bronshteyn_ivanov", "build_balanced_cover", "build_layers", "dudley",
    "verify_witness_collector",
    "CapCoverError",
    "ComplexityProfile", "Polytope", "convex_hull", "halfspace_intersection",
    "ExperimentRecord", "ScalingFit", "fit_scaling", "hausdorff_inner",
    "run_experiment",
    "dual_cap_polar", "mahler", "mahler_cap_product", "pi_map", "polar_body",
    "__version__",
]
