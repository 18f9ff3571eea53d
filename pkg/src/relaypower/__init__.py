"""Joint transmit-power and power-splitting optimization for multicell
networks with RF energy-harvesting relays.

Two successive-convex-approximation flavors (GP condensation and DC
linearization) over an embedded log-barrier interior-point solver cover
sum-rate maximization, max-min fairness and sum-power minimization for AF
relaying, plus the DF sum-rate problem with a searchable timeslot split.
"""

from .convexcore import (ExpTerm, GpStandardForm, LseFunction, LseProgram,
                         Monomial, Posynomial, Solution, SolveStatus,
                         SolverOptions, gp_to_lse, solve)
from .driver import (EpsilonSearchResult, ProblemSpec, Trace,
                     baseline_individual, dbm_to_watt, experiment_suite,
                     init_allocation, optimize_epsilon_df, run_sca,
                     watt_to_dbm)
from .linkmodel import (Allocation, FeasibilityReport, PhiCoefficients,
                        SystemParams, check_feasibility, harvested_energy,
                        phi_coeffs, relay_cap_af, relay_cap_df, sinr_af,
                        sinr_df, throughput_af, throughput_df)
from .netgen import (FadingSpec, NetworkInstance, TopologySpec,
                     build_grid_topology, draw_channels, effective_gains,
                     generate_instance, topology_from_coordinates)
from .sca_dc import (DcExpansion, build_p1_dc, build_p2_dc, build_p3_dc,
                     eh_affine_constraint, eval_ubar_vbar, grad_vbar,
                     linearize_vbar, make_expansion)
from .sca_gp import (CondensationPoint, UvFunctions, build_df_gp, build_p1_gp,
                     build_p2_gp, build_p3_gp, condense_posynomial,
                     eh_monomial_bound)

__version__ = "0.1.0"
