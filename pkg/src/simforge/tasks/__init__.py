from .assignment import AssignmentProblem, assign_antennas, assignment_count
from .mimo import diagonalize_mimo, stream_isolation_db, sum_rate, sum_rate_train, waterfill
from .recognition import (
    classify_regions,
    energy_routing_train,
    quadrant_beam_dataset,
    quadrant_regions,
)
from .spectral import (
    DftTarget,
    DoaEstimate,
    bin_to_sines,
    dft_matrix,
    dft_target,
    doa_estimate,
    doa_squared_error,
    fit_dft,
    sines_to_bin,
    visible_bins,
)

__all__ = [
    "AssignmentProblem",
    "assign_antennas",
    "assignment_count",
    "diagonalize_mimo",
    "stream_isolation_db",
    "sum_rate",
    "sum_rate_train",
    "waterfill",
    "classify_regions",
    "energy_routing_train",
    "quadrant_beam_dataset",
    "quadrant_regions",
    "DftTarget",
    "DoaEstimate",
    "bin_to_sines",
    "dft_matrix",
    "dft_target",
    "doa_estimate",
    "doa_squared_error",
    "fit_dft",
    "sines_to_bin",
    "visible_bins",
]
