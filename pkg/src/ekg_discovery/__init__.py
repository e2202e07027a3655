"""Discover which event features induce the order structure of an event log."""
from .event_model import EventTable, IngestConfig, Observation, parse_event_table, sample_observations
from .extcount import BoundedCount, Budget, bound_extensions, log_choose, log_sum_exp2
from .poset import (Poset, build_poset, connected_components, count_extensions_exact,
                    minimal_elements, transitive_reduction)
from .relations import (FeatureSet, Model, RelationCache, SymmetricRelation, atomic_relation,
                        derived_relation, df_path_generator)
from .scoring import (LogScore, Scorer, model_prior_unnormalized, normalized_entropy,
                      posterior_log_odds, score_model)
from .search import DiscoveryResult, SearchConfig, SearchState, discover, reachable_union

__version__ = "0.1.0"

__all__ = [
    "BoundedCount", "Budget", "DiscoveryResult", "EventTable", "FeatureSet", "IngestConfig",
    "LogScore", "Model", "Observation", "Poset", "RelationCache", "Scorer", "SearchConfig",
    "SearchState", "SymmetricRelation", "atomic_relation", "bound_extensions", "build_poset",
    "connected_components", "count_extensions_exact", "derived_relation", "df_path_generator",
    "discover", "log_choose", "log_sum_exp2", "minimal_elements", "model_prior_unnormalized",
    "normalized_entropy", "parse_event_table", "posterior_log_odds", "reachable_union",
    "sample_observations", "score_model", "transitive_reduction",
]
