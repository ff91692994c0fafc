"""Exchange-stable, stable and doubly stable matchings of random preference instances."""
from .analytic import (
    PairSystem,
    cube_integral,
    exact_expected_count_one_sided,
    exact_expected_count_two_sided,
    exact_p_doubly_one_sided,
    exact_p_estable_one_sided,
    exact_p_estable_two_sided,
    maximize_rate_function,
    rate_function,
)
from .enumeration import EnumerationResult, count_doubly_stable, enumerate_naive, enumerate_pruned
from .errors import CapExceededError, ContractError, ExstabError, InvalidSizeError, ParseError
from .instance import (
    OneSidedInstance,
    PreferenceInstance,
    all_instances_one_sided,
    all_instances_two_sided,
    generate_one_sided,
    generate_two_sided,
    read_instance,
    write_instance,
)
from .montecarlo import (
    EstimateSummary,
    ExperimentConfig,
    collect_rank_law,
    estimate_counts,
    estimate_doubly_stable_prob,
    estimate_second_moment,
)
from .rng import Seed
from .stability import (
    BlockingReport,
    Matching,
    RankTotals,
    gale_shapley,
    is_doubly_stable,
    is_exchange_stable,
    is_exchange_stable_one_sided,
    is_exchange_stable_two_sided,
    is_stable,
    is_stable_one_sided,
    is_stable_two_sided,
    rank_totals,
)

__version__ = "0.1.0"
