"""Contact processes on open clusters of oriented bond percolation on Z^d.

Simulation and estimation harness: quenched/annealed contact dynamics, the
coupled integer path process, static infection-trial percolation for the
second-moment survival bound, oriented walk-pair collision statistics for
the empirical upper bound, the mean-field ODE, and critical-rate
estimators that sandwich the rate between 1/(dp) and the collision-
corrected large-d formula.
"""

from .contact import (
    ContactConfiguration,
    Estimate,
    RunResult,
    SimOptions,
    annealed_occupation,
    check_self_duality,
    run_coupled_pair,
    run_quenched,
    survival_probability,
)
from .environment import (
    DirectedEdge,
    ModelParams,
    QuenchedEnvironment,
    count_open_paths_to_origin,
    edge_state,
    edge_state_bulk,
    open_in_neighbors,
    open_out_neighbors,
    translate,
)
from .errors import BracketError, BudgetExceededError, DivergenceError
from .estimator import (
    CompareRecord,
    CriticalEstimate,
    ScalingRow,
    SweepRecord,
    bisect_lambda_c,
    default_bracket,
    quenched_annealed_compare,
    scaling_table,
    sweep,
)
from .kernels import BACKEND
from .mean_field import fixed_point, integrate_numeric, solve_closed_form, trajectory
from .path_process import (
    PathProcessConfiguration,
    analytic_mean_zeta,
    coupled_eta_view,
    mean_zeta_origin,
    run_path_process,
)
from .rngtools import seed_schedule
from .sir import (
    InfectionTrialField,
    SecondMomentResult,
    count_infection_paths,
    expected_path_count,
    infect_marginal,
    infect_pair,
    second_moment_bound,
    theoretical_pair_correlation,
)
from .walks import (
    MomentEstimate,
    ThetaTailEstimate,
    WalkPairTrace,
    estimate_theta_tail,
    collision_moment,
    simulate_batch,
    simulate_pair,
    upper_bound_lambda,
)

__version__ = "0.1.0"
