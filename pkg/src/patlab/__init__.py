"""patlab: a desk-scale photoacoustic tomography laboratory.

Simulates boundary pressure measurements of an impedance-damped wave
equation, certifies the relative-uncertainty uniqueness condition on
ensembles of perturbed phantoms, and reconstructs initial pressure and wave
speed jointly under a contraction-monitored relaxation discipline.
"""

from .fields import (
    InitialState,
    ScalarField2D,
    StateBounds,
    WaveSpeed,
    inner_h0,
    norm_h0,
    norm_hminus1,
    norm_w1inf,
    poisson_dirichlet_solve,
)
from .grid import Grid2D
from .kernels import backend_info
from .phantoms import PhantomFeature, PhantomSpec, make_pressure_phantom, make_speed_phantom, perturb_pair
from .reconstruct import (
    ContractionReport,
    IterateHistory,
    JointResult,
    ReconstructionConfig,
    contraction_factors,
    enforce_relaxation,
    gradient_wavespeed,
    joint_reconstruct,
    project_speed,
    reconstruct_pressure,
)
from .traces import BoundaryTrace, trace_norm_h0, trace_norm_h1h0
from .verifier import (
    DiscrepancyReport,
    EnsembleMember,
    StabilityReport,
    check_assumption_bounds,
    check_uniqueness_region,
    measurement_discrepancy_ratio,
    speed_discrepancy_ratio,
    stability_report,
    state_discrepancy_ratio,
)
from .wavesolver import (
    AdjointResult,
    BoundaryImpedance,
    SimulationResult,
    SolverConfig,
    WaveSnapshot,
    adjoint_simulate,
    cfl_timestep,
    default_observation_time,
    energy,
    forward_map,
    simulate,
)

__version__ = "0.1.0"
