"""lipkit: Lipschitz envelopes, extensions, partitions of unity, and approximations.

Everything evaluates over two kinds of metric domain (explicit finite
spaces and Euclidean continua) through anchor scans: envelopes and
extensions reduce affine expressions over a finite anchor set, partitions
of unity weight cover sets by capped complement distances, and the
approximation pipelines compose the two.  The ``verify`` module measures
what the constructions promise on samples; the ``lipkit`` CLI batches all
of it over CSV/JSON files.
"""

from .envelope import (
    EnvelopeFunction,
    EnvelopeSpec,
    convergence_index,
    divergence_probe,
    envelope_eval,
    envelope_sequence,
)
from .errors import (
    AdmissibilityError,
    ArgumentError,
    DomainMismatchError,
    EmptyWindowError,
    InconsistencyError,
    LipkitError,
    MetricViolationError,
    RangeError,
    UncoveredPointError,
    UnsupportedDomainError,
)
from .evaluable import CallableFunction, ConstantFunction, Evaluable
from .extension import (
    ExtensionSpec,
    MWExtension,
    PointwiseConstantEstimate,
    bounded_range_extension,
    compress,
    decompress,
    estimate_anchor_constants,
    estimate_pointwise_constants,
    exact_pairwise_constant,
    extend_unbounded,
    mw_maximal,
    mw_minimal,
)
from .metric import (
    AnchoredFunction,
    Ball,
    EuclideanDomain,
    ExplicitDomain,
    cross_distances,
    distance,
    distance_to_set,
    pairwise_distances,
    validate_metric,
)
from .partition import (
    BallSet,
    BallUnionSet,
    BandSet,
    Cover,
    PartitionOfUnity,
    PreimageSet,
    SublevelSet,
    SubsetSet,
    build_partition,
    increasing_lipschitz_cover,
    membership_margin,
    vanish_index,
)
from .blend import (
    BlendSpec,
    BlendedFunction,
    ClampFunction,
    blend_eval,
    clamp_function,
    extend_locally_lipschitz,
    extend_range_bounded,
    extend_via_compression,
)
from .approx import (
    LevelGrid,
    SmallScaleSpec,
    extend_and_approximate,
    fine_approximation,
    insert_between,
    largest_modulus_scale,
    monotone_approximation,
    small_scale_approximation,
    uniform_approximation,
    window_agreement,
)
from .verify import (
    LipschitzReport,
    Verdict,
    blend_modulus_report,
    build_report,
    check_extension,
    check_sandwich,
    check_small_scale,
    check_uniform_continuity,
    empirical_lip,
    pointwise_modulus,
)

__version__ = "0.1.0"
