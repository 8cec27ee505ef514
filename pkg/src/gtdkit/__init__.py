"""gtdkit: quasi-homogeneity weights and conformal metric structures
for thermodynamic potentials."""

from .errors import (
    ComputationError,
    DegenerateConformalFactor,
    DomainError,
    ExpressionSyntaxError,
    GtdError,
    LoadError,
    NoHomogeneityError,
    SamplingError,
    SingularRepresentation,
    UnboundNameError,
    UnknownIdentifierError,
    ValidationError,
)
from .expr import differentiate, evaluate, gradient, hessian, parse, serialize
from .geometry import (
    Beta1Result,
    BilinearForm,
    ConformalReport,
    MetricSpec,
    ReconstructionReport,
    base_metric,
    check_constraint_c3,
    conformal_factor_c4,
    conformal_factor_twovar_c7,
    induced_metric_beta1,
    induced_metric_c1,
    induced_metric_c2,
    off_proportionality,
    reconstruction_report,
    representation_reconstruct,
    representation_weights,
)
from .homogeneity import (
    HomogeneityReport,
    WeightAssignment,
    detect_weights,
    euler_residual,
    intensives,
    is_strictly_homogeneous,
    normalize_degree,
    rescale_weights,
    sample_points,
    scaling_residual,
)
from .kernel import backend_name
from .systems import (
    ThermoSystem,
    kerr_newman,
    load_system,
    make_system,
    reissner_nordstrom_d,
    system_to_json,
)

__version__ = "0.1.0"
