"""simforge: simulate and train stacked programmable metasurfaces.

Core pieces: free-space coupling between layers (diffraction), the cascaded
transfer operator of a stack (stack), phase training by gradient descent or
discrete successive refinement (optimize, losses), and the application
tasks (tasks): MIMO stream diagonalization, sum-rate beamforming with
water-filling, 2D-DFT fitting with angle-of-arrival readout, detection-
region classification, and antenna/user assignment. The cli module drives
experiments from JSON configs.
"""

from ._kernels import backend_name
from .channels import ChannelModel, plane_wave_field, rayleigh_matrix
from .diffraction import (
    PropagationMatrix,
    propagation_coefficient,
    propagation_matrix,
    validate_geometry,
)
from .errors import (
    ConfigError,
    DegenerateGeometry,
    InvalidParameter,
    NonFiniteLoss,
    ShapeError,
    SimforgeError,
    TooLarge,
)
from .geometry import GridLayout, StackGeometry, Wavelength, build_stack, linear_array
from .losses import (
    EnergyRoutingCE,
    InterferenceLeakage,
    MatrixFit,
    NegSumRate,
    loss_and_gradient,
)
from .optimize import TrainConfig, TrainReport, gradient_descent, successive_refinement
from .stack import (
    PhaseChain,
    PhaseProfile,
    TransferOperator,
    apply_field,
    forward_operator,
    quantize_phases,
    random_profile,
)

__version__ = "0.1.0"
