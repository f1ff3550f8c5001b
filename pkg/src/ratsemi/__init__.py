"""Thermodynamic formalism for finitely generated rational map semigroups:
spherical rational-map numerics, backward-orbit Julia clouds, pressure and
Bowen-parameter estimation, open-set-condition and hyperbolicity checks,
box-counting dimension, and one-parameter family sweeps with subharmonicity
diagnostics."""

from .dynamics import (
    MultiMap,
    PointCloud,
    VerificationReport,
    check_expanding_growth,
    check_hyperbolic,
    julia_backward_cloud,
    postcritical_cloud,
    repelling_seed,
    skew_preimages,
    word_derivative_norm,
    word_eval,
)
from .errors import (
    ConfigError,
    CriticalPreimage,
    HyperbolicityUnverified,
    InsufficientPoints,
    InvalidInstance,
    NonConvergence,
    NoRepellingSeed,
    NoSignChange,
    RatsemiError,
)
from .families import (
    AnnulusDomain,
    FamilySpec,
    GridSpec,
    RectDomain,
    SweepRow,
    SweepTable,
    annulus_family,
    instantiate,
    power_pair_family,
    similarity_family,
    smoothness_diagnostic,
    submean_diagnostic,
    sweep_delta,
)
from .geometry import (
    Annulus,
    BoxCountResult,
    ComplementDisc,
    Disc,
    Triangle,
    box_dimension,
    osc_check,
    region_contains,
)
from .sphere import (
    INF,
    RationalMap,
    SpherePoint,
    chordal_distance,
    polynomial_map,
)
from .thermo import (
    BowenResult,
    PreimageTree,
    PressureEstimate,
    SpectrumDiagnostics,
    ThermoConfig,
    bowen_parameter,
    lyapunov_and_entropy,
    moran_root_oracle,
    poincare_partial,
    power_map_pressure_oracle,
    pressure,
    pressure_curve,
    transfer_level_sum,
)

__version__ = "0.1.0"

__all__ = [
    "INF",
    "Annulus",
    "AnnulusDomain",
    "BoxCountResult",
    "BowenResult",
    "ComplementDisc",
    "ConfigError",
    "CriticalPreimage",
    "Disc",
    "FamilySpec",
    "GridSpec",
    "HyperbolicityUnverified",
    "InsufficientPoints",
    "InvalidInstance",
    "MultiMap",
    "NoRepellingSeed",
    "NoSignChange",
    "NonConvergence",
    "PointCloud",
    "PreimageTree",
    "PressureEstimate",
    "RatsemiError",
    "RationalMap",
    "RectDomain",
    "SpectrumDiagnostics",
    "SpherePoint",
    "SweepRow",
    "SweepTable",
    "ThermoConfig",
    "Triangle",
    "VerificationReport",
    "annulus_family",
    "bowen_parameter",
    "box_dimension",
    "check_expanding_growth",
    "check_hyperbolic",
    "chordal_distance",
    "instantiate",
    "julia_backward_cloud",
    "lyapunov_and_entropy",
    "moran_root_oracle",
    "osc_check",
    "poincare_partial",
    "polynomial_map",
    "postcritical_cloud",
    "power_map_pressure_oracle",
    "power_pair_family",
    "pressure",
    "pressure_curve",
    "region_contains",
    "repelling_seed",
    "similarity_family",
    "skew_preimages",
    "smoothness_diagnostic",
    "submean_diagnostic",
    "sweep_delta",
    "transfer_level_sum",
    "word_derivative_norm",
    "word_eval",
]
