"""Collision-model simulator: an N-level scatterer hit by 1-D wave packets.

A delta-shaped point interaction couples the incoming particle to the
scatterer; tracing the particle out after each collision gives a
completely positive map on the scatterer's density matrix.
"""

from .dynamics import (
    CollisionSchedule,
    Trajectory,
    apply_map,
    bloch_vector,
    free_evolution,
    inverse_temperature_estimators,
    run_collisions,
    thermal_state,
)
from .errors import (
    AllGapsDegenerate,
    CollisionError,
    ConfigError,
    DetailedBalanceViolated,
    DimensionMismatch,
    NoOpenChannel,
    NotStochastic,
    NumericError,
    PopulationUnderflow,
    QuadratureNotConverged,
    SingularMatrix,
    ThresholdEnergy,
    TraceDrift,
    UnitarityViolation,
)
from .quadrature import QuadratureConfig
from .scatmap import (
    PopulationMap,
    Superoperator,
    broad_population_map,
    choi_matrix,
    detailed_balance_residual,
    ensemble_map,
    narrow_map,
    narrow_population_map,
    population_map,
    pure_packet_map,
)
from .scatterer import (
    ScatteringMatrixAtE,
    SystemSpec,
    open_channels,
    reflection_matrix,
    scattering_matrix,
    t_matrix,
    transition_probabilities,
)
from .thermo import ThermoRecord, entropy_production, heat
from .wavepacket import (
    EnsembleKind,
    GaussianPacket,
    MomentumEnsemble,
    amplitude,
    broad_ensemble_diagonal,
    broad_ensemble_temperature,
    effusion_pdf,
    maxwell_boltzmann_pdf,
    narrowness_ratio,
    thermal_ensemble,
)

__version__ = "0.1.0"

__all__ = [
    "AllGapsDegenerate",
    "CollisionError",
    "CollisionSchedule",
    "ConfigError",
    "DetailedBalanceViolated",
    "DimensionMismatch",
    "EnsembleKind",
    "GaussianPacket",
    "MomentumEnsemble",
    "NoOpenChannel",
    "NotStochastic",
    "NumericError",
    "PopulationMap",
    "PopulationUnderflow",
    "QuadratureConfig",
    "QuadratureNotConverged",
    "ScatteringMatrixAtE",
    "SingularMatrix",
    "Superoperator",
    "SystemSpec",
    "ThermoRecord",
    "ThresholdEnergy",
    "TraceDrift",
    "Trajectory",
    "UnitarityViolation",
    "amplitude",
    "apply_map",
    "bloch_vector",
    "broad_ensemble_diagonal",
    "broad_ensemble_temperature",
    "broad_population_map",
    "choi_matrix",
    "detailed_balance_residual",
    "effusion_pdf",
    "ensemble_map",
    "entropy_production",
    "free_evolution",
    "heat",
    "inverse_temperature_estimators",
    "maxwell_boltzmann_pdf",
    "narrow_map",
    "narrow_population_map",
    "narrowness_ratio",
    "open_channels",
    "population_map",
    "pure_packet_map",
    "reflection_matrix",
    "run_collisions",
    "scattering_matrix",
    "t_matrix",
    "thermal_ensemble",
    "thermal_state",
    "transition_probabilities",
]
