"""Whole-graph distances for temporal networks.

Temporal graphs are embedded through a time-respecting random-walk operator
and compared in embedding space, either node-by-node (matched distance) or
through Gram-spectrum summaries (unmatched distance).
"""

from tgdist.graph import (
    ContactEvent,
    DataFormatError,
    RawContactRecord,
    TemporalGraph,
    aggregate,
    drop_empty_snapshots,
    from_contacts,
    graphs_equal,
    load_contact_list,
    load_graph,
    permute_nodes,
    save_graph,
    subgraph,
    to_contacts,
)
from tgdist.transition import (
    GlobalTransitionOperator,
    build_operator,
    snapshot_transition,
)
from tgdist.embedding import (
    EmbedConfig,
    EmbedResult,
    MixtureSummary,
    embed,
    estimate_z,
    exact_z,
    load_embedding,
    loss_exact,
    loss_mixture,
    mixture_summary,
    save_embedding,
)
from tgdist.distances import (
    DistanceMatrix,
    lambda_vector,
    matched_distance,
    pairwise_distances,
    save_distance_matrix,
    save_lambda_vectors,
    unmatched_distance,
)
from tgdist.randomize import RandomizationKind, generate_replicas, randomize
from tgdist.synth import (
    DCSBMParams,
    GeometricParams,
    StaticGraph,
    dcsbm,
    geometric,
    preset,
    synthetic_activity,
    temporalize,
)
from tgdist.evaluation import cluster_distances, kmeans, nmf, nmi
from tgdist.experiments import (
    ExperimentReport,
    ModelClassesConfig,
    RandomizationPairsConfig,
    RelabelConfig,
    bursty_test_graph,
    experiment_model_classes,
    experiment_randomization_pairs,
    experiment_relabel,
)

__version__ = "0.1.0"
