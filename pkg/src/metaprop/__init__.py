"""metaprop: associative-network construction, particle-based metadata
propagation, and an atrophy/recover evaluation harness."""

from .records import Repository, ResourceRecord, ingest, load_repository, make_record, meta, save_repository
from .netbuild import (
    AssociativeNetwork,
    Relation,
    build_cooccurrence,
    build_occurrence,
    load_network,
    normalize,
    parse_relation,
    save_network,
)
from .swarm import (
    Particle,
    PropagationConfig,
    PropagationResult,
    RecommendationStore,
    choose_next,
    decay,
    init_particles,
    load_store,
    propagate,
    recommend_meta,
    save_store,
)
from .evalharness import (
    AtrophyOutcome,
    ExperimentConfig,
    ExperimentResult,
    MetricsRow,
    accept_meta,
    f_score,
    kill_meta,
    load_results,
    precision,
    recall,
    run_experiment,
    save_results,
)

__all__ = [name for name in dir() if not name.startswith("_")]
