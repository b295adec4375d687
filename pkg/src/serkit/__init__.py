"""Symbol error rates of multi-dimensional constellations.

Cone-decomposition quadrature, Monte Carlo and closed forms for the SER
under Gaussian and compound-Gaussian noise, its Bernstein representation,
complete-monotonicity checks, and stochastic orders of fading gains.
"""

from .constellation import (
    Constellation,
    ConstellationError,
    ReducedConstellation,
    complex_embed,
    cube,
    energy_normalize,
    min_distance,
    new_constellation,
    psk,
    qam3d,
    reduce,
    square_qam,
)
from .fading import (
    FadingModel,
    OrderVerdict,
    avg_ser_curve,
    avg_ser_fading,
    check_gp_order,
    gp_functional,
    gp_implies_gq_check,
    lt_order_check,
    no_universal_order_scan,
    order_implies_ser_comparison,
)
from .geometry import Decomposition, GeometryError, decompose
from .noise import MixingSpec, NoiseModel, compound_ser_identity_check, sample_noise
from .ser import (
    CmVerdict,
    RepresentingFn,
    SerEstimate,
    cm_check,
    cm_order_conditions,
    cube_mu,
    q_function,
    qam_mu,
    reconstruct_ser,
    representing_fn,
    rho0,
    ser_closed_cube,
    ser_closed_qam,
    ser_derivative,
    ser_mc,
    ser_mc_complex,
    ser_quadrature,
    ser_quadrature_curve,
)

__version__ = "0.1.0"

__all__ = [
    "CmVerdict",
    "Constellation",
    "ConstellationError",
    "Decomposition",
    "FadingModel",
    "GeometryError",
    "MixingSpec",
    "NoiseModel",
    "OrderVerdict",
    "ReducedConstellation",
    "RepresentingFn",
    "SerEstimate",
    "avg_ser_curve",
    "avg_ser_fading",
    "check_gp_order",
    "cm_check",
    "cm_order_conditions",
    "complex_embed",
    "compound_ser_identity_check",
    "cube",
    "cube_mu",
    "decompose",
    "energy_normalize",
    "gp_functional",
    "gp_implies_gq_check",
    "lt_order_check",
    "min_distance",
    "new_constellation",
    "no_universal_order_scan",
    "order_implies_ser_comparison",
    "psk",
    "q_function",
    "qam3d",
    "qam_mu",
    "reconstruct_ser",
    "reduce",
    "representing_fn",
    "rho0",
    "sample_noise",
    "ser_closed_cube",
    "ser_closed_qam",
    "ser_derivative",
    "ser_mc",
    "ser_mc_complex",
    "ser_quadrature",
    "ser_quadrature_curve",
    "square_qam",
]
