"""alpha belief propagation on pairwise discrete factor graphs."""

from alphabp.engine import (
    BatchReport,
    BeliefState,
    ConvergenceReport,
    EngineConfig,
    GraphBatch,
    factor_to_variable_update,
    init_state,
    map_decision,
    marginal,
    marginals,
    run,
    run_batch,
    singleton_refresh,
    stack_graphs,
    variable_to_factor,
)
from alphabp.exact import (
    EnumerationTooLarge,
    alpha_divergence,
    exact_map,
    exact_marginals,
    joint_table,
    kl_divergence,
)
from alphabp.graph import (
    FactorGraph,
    GraphError,
    PairwiseFactor,
    build_graph,
    build_graph_from_logs,
    evaluate_joint,
    load_graph,
    log_evaluate_joint,
    save_graph,
)
from alphabp.mmse import MmsePosterior, mmse_decide, mmse_posterior, mmse_prior_factors
from alphabp.models import (
    IsingModel,
    MimoInstance,
    ising_to_graph,
    mimo_to_graph,
    sample_ising,
    sample_mimo,
)

__version__ = "0.1.0"
