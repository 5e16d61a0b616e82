"""Diversity-aware nearest-neighbor search with welfare objectives.

Selection of k neighbors is framed as welfare maximization over per-attribute
utilities: the Nash (geometric-mean) objective balances relevance against
attribute diversity query by query, and the generalized p-mean family
interpolates from plain similarity search (p = 1) to egalitarian spreading
(p -> -inf). The package ships exact single-attribute solvers, a submodular
greedy for the multi-attribute case, hard-cap and fetch-then-select
baselines, brute-force reference oracles, relevance/diversity metrics,
dataset ingestion, and a benchmark CLI.
"""

from .core import (AttributeTable, Selection, SimilarityFn, VectorSet,
                   WelfareParams, finish_selection, log_nsw, similarity,
                   utilities, welfare)
from .oracle import (AlphaOracleConfig, AlphaScanOracle, ExactScanOracle,
                     RankedList, alpha_topk, exact_topk)
from .solvers import GreedyStats, nash_ann, p_mean_ann
from .multi import (CandidatePool, full_scan_pool, multi_div_ann,
                    multi_nash_ann, multi_p_mean_ann)
from .baselines import div_ann, fetch_union, top_k
from .reference import (ErspInstance, brute_force_opt, ersp_reduction,
                        log_ineq_check, packing_exists, random_ersp)
from .metrics import (MetricsReport, approx_ratio, attribute_counts,
                      compute_report, distinct_count, entropy,
                      inverse_simpson, recall)
from .data import (DatasetBundle, PRESETS, Preset, cluster_attrs, prob_attrs,
                   read_attrs, read_bvecs, read_fvecs, read_ivecs,
                   read_vectors, split_dataset, write_attrs, write_bvecs,
                   write_fvecs, write_ivecs)

__version__ = "0.1.0"

__all__ = [
    "AttributeTable", "Selection", "SimilarityFn", "VectorSet",
    "WelfareParams", "finish_selection", "log_nsw", "similarity",
    "utilities", "welfare",
    "AlphaOracleConfig", "AlphaScanOracle", "ExactScanOracle", "RankedList",
    "alpha_topk", "exact_topk",
    "GreedyStats", "nash_ann", "p_mean_ann",
    "CandidatePool", "full_scan_pool", "multi_div_ann", "multi_nash_ann",
    "multi_p_mean_ann",
    "div_ann", "fetch_union", "top_k",
    "ErspInstance", "brute_force_opt", "ersp_reduction", "log_ineq_check",
    "packing_exists", "random_ersp",
    "MetricsReport", "approx_ratio", "attribute_counts", "compute_report",
    "distinct_count", "entropy", "inverse_simpson", "recall",
    "DatasetBundle", "PRESETS", "Preset", "cluster_attrs", "prob_attrs",
    "read_attrs", "read_bvecs", "read_fvecs", "read_ivecs", "read_vectors",
    "split_dataset", "write_attrs", "write_bvecs", "write_fvecs",
    "write_ivecs",
    "__version__",
]
