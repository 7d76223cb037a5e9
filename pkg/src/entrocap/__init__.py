"""Entropic characteristics of sets of quantum states.

Constrained maximum entropy (energy shells, relative-entropy balls), Gibbs
states, and the chi-capacity of state sets with its optimal average state.
"""

__version__ = "0.1.0"

from .approx import ProjectionReport, project_state, truncated_capacity_sweep
from .chicap import (CapacityResult, Ensemble, capacity_certificate,
                     chi_capacity_V, chi_capacity_V_infimum, chi_of_ensemble,
                     orbit_capacity, solve_capacity, union_bounds)
from .constructions import (CouplingSetResult, RotationOrbitResult,
                            SeqExampleModel, SeqExampleResult, binary_entropy,
                            coupling_set_capacity, eta_solver,
                            layer_optimal_ensemble, rotation_orbit_capacity,
                            seq_example_capacity, seq_example_states)
from .errors import (Condition45Fails, ConfigInvalid, DegenerateState,
                     DimensionMismatch, Divergent, EmptySet, EntrocapError,
                     InvalidTolerance, IoError, MaxIterExceeded, NotAGroup,
                     NotNormalized, OutOfBranch, OutOfDomain, UnboundedEntropy,
                     Unsolvable, ValidationFailed)
from .maxent import (KSetProfile, VSetProfile, finite_level_multiplier,
                     finite_level_state, gibbs_state_K, lambda_star_K,
                     lambda_star_V, sup_entropy_K, sup_entropy_K_variational,
                     sup_entropy_V, sup_entropy_V_variational)
from .qcore import (Basis, DensityMatrix, dephase, entropy, partial_trace,
                    relative_entropy, trace_distance)
from .spectra import (CoefficientEstimate, HStarResult, PartitionReport,
                      ProbabilitySpectrum, SpectralSequence, c_thresholds,
                      decrease_coefficient, h_star, increase_coefficient,
                      increase_coefficient_probe, partition_moments)
