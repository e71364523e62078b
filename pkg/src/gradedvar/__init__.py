"""Exact graded variational calculus on jet spaces."""
from .errors import (
    BidegreeError,
    DegreeError,
    DimensionError,
    GradedVarError,
    ModelError,
    NotClosedError,
    ParityError,
    TowerError,
    UnknownSymbolError,
    UnsupportedShapeError,
)
from .ring import (
    GradedScalar,
    JetSymbol,
    Kind,
    Parity,
    antifield,
    coordinate,
    eta_transform,
    field,
    ghost,
    mul,
    partial,
    substitute_scale,
    total_derivative,
)
from .forms import (
    Derivation,
    GradedForm,
    horizontal_volume,
    interior_product,
    project_bidegree,
    wedge,
)
from .variational import (
    EulerLagrangeResult,
    GradedDerivation,
    Lagrangian,
    SymmetryResult,
    d,
    d_horizontal,
    d_vertical,
    delta,
    euler_lagrange,
    exterior_derivative,
    first_variational_check,
    is_variational_symmetry,
    lepage_equivalent,
    lie_derivative,
    prolong,
    rho_projector,
    variational_derivative,
)
from .homotopy import (
    homotopy_contact,
    homotopy_density,
    homotopy_horizontal,
    homotopy_olver,
    homotopy_rho_kernel,
)
from .noether import (
    KoszulTateOperator,
    NoetherOperator,
    NoetherTower,
    gauge_condition,
    gauge_symmetry,
    higher_gauge_symmetry,
    koszul_tate,
    reproduce_identities,
    verify_noether,
    verify_stage,
    verify_tower,
)
from .parser import evaluate, parse
from .printer import pretty_print
from .model import Model, load_model

__version__ = "0.1.0"
