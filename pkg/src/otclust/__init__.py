"""Semi-discrete optimal transport and capacity-constrained clustering.

Balance a weighted sample cloud (or a uniform region) against a small set
of sites so each site absorbs a prescribed mass, cluster under those
capacity constraints, and transfer labels between domains by transporting
labeled atoms.  Includes power-diagram geometry, two balancing solvers,
a k-means++ baseline, SVG rendering, and a CLI.
"""

from otclust.adaptation import (
    AdaptationReport,
    AdaptedModel,
    LabeledMeasure,
    adapt,
    classify,
    evaluate,
    make_synthetic_pair,
    run_synthetic_experiment,
)
from otclust.clustering import (
    ClusteringConfig,
    ClusteringResult,
    clustering_objective,
    impm,
    kmeans_pp,
    update_centroids,
    vwc,
)
from otclust.diagram import (
    PowerCell,
    PowerDiagram,
    TransportPlan,
    assign,
    build_power_diagram_2d,
    cell_masses,
    cell_masses_continuous,
    power_diagram,
    power_radius_sq,
)
from otclust.errors import (
    DegenerateClusterError,
    DegenerateConfigurationError,
    InvalidMeasureError,
    NonConvergenceError,
    UnsupportedModeError,
    UnsupportedRenderError,
)
from otclust.kernels import BACKEND
from otclust.measures import (
    CentroidSet,
    Domain,
    EmpiricalMeasure,
    blend_measures,
    bounding_domain,
    normalize,
    total_cost,
    validate_pairing,
)
from otclust.render import render_svg
from otclust.solver import (
    SolverConfig,
    SolverResult,
    SolverState,
    energy,
    gradient,
    hessian,
    solve_vot,
    solve_vot_gd,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptationReport",
    "AdaptedModel",
    "BACKEND",
    "CentroidSet",
    "ClusteringConfig",
    "ClusteringResult",
    "DegenerateClusterError",
    "DegenerateConfigurationError",
    "Domain",
    "EmpiricalMeasure",
    "InvalidMeasureError",
    "LabeledMeasure",
    "NonConvergenceError",
    "PowerCell",
    "PowerDiagram",
    "SolverConfig",
    "SolverResult",
    "SolverState",
    "TransportPlan",
    "UnsupportedModeError",
    "UnsupportedRenderError",
    "adapt",
    "assign",
    "blend_measures",
    "bounding_domain",
    "build_power_diagram_2d",
    "cell_masses",
    "cell_masses_continuous",
    "classify",
    "clustering_objective",
    "energy",
    "evaluate",
    "gradient",
    "hessian",
    "impm",
    "kmeans_pp",
    "make_synthetic_pair",
    "normalize",
    "power_diagram",
    "power_radius_sq",
    "render_svg",
    "run_synthetic_experiment",
    "solve_vot",
    "solve_vot_gd",
    "total_cost",
    "update_centroids",
    "validate_pairing",
    "vwc",
]
