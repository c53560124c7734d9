"""Entropic trace clustering over directly-follows graphs."""

__version__ = "0.1.0"

from .event_log import (  # noqa: E402
    BOS,
    EOS,
    CsvConfig,
    Event,
    Variant,
    VariantLog,
    augment_bos_eos,
    parse_csv,
    parse_xes,
    read_log,
    to_variant_log,
)
from .dfg import Dfg  # noqa: E402
from .relevance import EPSILON, ErReport, average_er, pairwise_er, self_er, trace_er  # noqa: E402
from .seeding import SeedSet, init_plusplus, init_random  # noqa: E402
from .clustering import (  # noqa: E402
    Cluster,
    Clustering,
    ec_cluster,
    ec_split,
    random_clustering,
    run_method,
)
from .baselines import activity_profile, frequency_kmeanspp  # noqa: E402
from .evaluation import (  # noqa: E402
    MetricRow,
    RankTable,
    average_ranks,
    elbow_sweep,
    friedman_test,
    nemenyi_cd,
    weighted_metrics,
)
