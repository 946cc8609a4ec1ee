"""Interventional testing and learning of causal Bayesian networks.

Semi-Markovian causal graphs, exact and sampled interventional
distributions, covering intervention sets, Hellinger two-sample testing,
goodness-of-fit / two-sample / learning algorithms, and the adversarial
constructions used to stress them.
"""

from ._kernels import backend_name
from .adversary import (
    AdversaryPair,
    build_adversary_pair,
    build_hard_graph,
    verify_adversary_pair,
)
from .algorithms import (
    AuditReport,
    LearnedOracle,
    LocalTarget,
    TesterConfig,
    c2st,
    c2st_unknown_graph,
    cgft,
    clp_learn,
    enumerate_local_targets,
    exact_local_oracle,
    oracle_query,
    oracle_query_with_mass,
    subadditivity_audit,
)
from .covering import (
    CoveringSet,
    build_randomized,
    build_randomized_family,
    build_resampled,
    randomized_size,
    resampled_size,
    verify_covering,
)
from .graph import (
    GeneralCausalGraph,
    GraphClassParams,
    Smcg,
    ancestors,
    c_components,
    chain_graph,
    class_params,
    d_separated,
    descendants,
    general_c_components,
    max_total_degree,
    parents,
    project_to_smcg,
    random_graph,
    star_graph,
    topological_order,
    validate,
)
from .model import (
    DiscreteDist,
    Intervention,
    Smbn,
    atom_index,
    c_component_factorization,
    exact_interventional,
    independence_lemma_check,
    local_distribution,
    marginalize,
    random_smbn,
    sample_interventional,
    truncation_check,
)
from .stats import (
    TestParams,
    TestVerdict,
    bhattacharyya,
    hellinger_two_sample_test,
    learn_empirical,
    learn_sample_size,
    sample_size_for_test,
    squared_hellinger,
    tv_distance,
)

__version__ = "0.1.0"
