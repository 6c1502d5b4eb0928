"""Error and disturbance of quantum measurements over localized observable spaces."""

from .core import (
    DEFAULT_TOL,
    DimensionMismatch,
    HilbertSpace,
    NegativeRadicand,
    SampleSpace,
    Tolerances,
    ValidationError,
    expectation,
    maximally_mixed,
    pure,
    seminorm,
    stdv,
)
from .geninv import FdLinearMap, NotInRange, composition_report, min_norm_preimage, partial_inverse
from .localize import LocalizedSpace, ProcessMaps, classical_space, lift, localize, process_maps, quantum_space
from .loss import (
    NotRepresentable,
    NotRepresentative,
    composite_decomposition,
    disturbance,
    disturbance_rep,
    error,
    error_rep,
    gauge,
    gauge_decomposition,
    lossless_report,
    variance_decomposition,
)
from .process import (
    Channel,
    ClassicalProcess,
    Instrument,
    Measurement,
    compose,
    dephasing,
    identity_channel,
    luders_instrument,
    povm,
    projective_from_observable,
    trivial_measurement,
    unitary_channel,
)
from .seqmeas import (
    JointMeasurement,
    disturbance_witness,
    induced,
    is_local_joint,
    joint_correlation,
    marginals,
    noisy_joint,
    sequential_joint,
)
from .urel import (
    NotUnbiased,
    akg_report,
    error_disturbance_relation,
    gauge_relation,
    joint_error_relation,
    joint_error_relation_rep,
    no_go_report,
    ozawa_joint_chain,
    ozawa_quantities,
    schrodinger_kr,
    statistical_cost_relation,
)

__version__ = "0.1.0"
