"""Entropy, conditional squares, and pair experiments for Markov measures
on subshifts of finite type."""

from .shiftspace import (
    Cylinder,
    OneSidedPoint,
    Point,
    SftSystem,
    ShiftSpaceError,
    distance,
    is_allowed,
    natural_extension_lift,
    same_sequence,
    shift,
    system_from_spec,
    system_preset,
)
from .markov import (
    MarkovMeasure,
    MarkovMeasureError,
    SpectralInfo,
    measure_from_spec,
    measure_preset,
    stationary_distribution,
)
from .entropy import (
    CoordinatePartition,
    CoordinateSet,
    EntropyBracket,
    EntropyEngineError,
    PartitionJoin,
    block_indicator_partition,
    cond_entropy,
    conditional_entropy,
    entropy,
    fine_partition,
    parity_partition,
    partition_from_spec,
    pinsker_residual,
    process_entropy,
    projection_partition,
    refinement_entropy_check,
    refines,
    single_label_partition,
    two_label_partition,
)
from .excellent import (
    AsymptoticCertificateRecord,
    ExcellentReport,
    SearchExhausted,
    SpacingLevel,
    SpacingSchedule,
    asymptotic_certificate,
    choose_spacings,
    spacing_defect,
)
from .square import (
    ConditionalSquare,
    CouplingSample,
    PinskerModel,
    SquareError,
    conditional_atom_masses,
    convergence_profile,
    diagonal_mass,
    lambda_rect,
    nu_rect,
    sample_coupling,
)
from .pairs import (
    BirkhoffRecord,
    CouplingLawReport,
    DeltaReport,
    Inconclusive,
    PairVerdict,
    birkhoff_check,
    classify_pair,
    coupling_law_experiment,
    delta_sup,
    find_separated_pair,
    stable_class_count,
)

__version__ = "0.1.0"
