"""Unit-energy reachable sets of two unstable second-order plants sharing one input."""

from .decomposition import ModalTransform, build_transform, from_modal, to_modal
from .errors import (
    DegenerateSystemError,
    DegenerateSystemWarning,
    DomainError,
    HorizonTooShortError,
    InfeasibleDiscretizationError,
    MixedClassError,
    NonConvergenceError,
    NotMixedError,
    SilverReachError,
    SingularGramianError,
    ValidationError,
)
from .gramian import (
    Gramian2,
    SetDescription,
    SetKind,
    ellipse_area_paper,
    gramian_closed_form,
    gramian_quadrature,
    min_energy_to_reach,
    mixed_set,
)
from .pendulum import PendulumParams, linearize, optimal_inertia_ratio, recommend
from .reachability import (
    EPSILON_STAR,
    SILVER_RATIO,
    VolumeReport,
    optimal_ratio,
    p_matrix,
    ratio_objective,
    reachable_set,
    sweep_objective,
    volume_measures,
)
from .synthesis import (
    SynthesisProblem,
    Trajectory,
    discretize,
    energy_of,
    simulate,
    synthesize_min_energy,
    synthesize_pair,
)
from .systems import CoupledSystem, FirstOrderPair, StabilityClass, State4, classify, modal_pairs

__version__ = "0.1.0"
