"""Accuracy and completeness diagnostics for board-interlock firm networks."""

__version__ = "0.1.0"

from .accuracy import InterlockDeduplicator, MergeReport, run_pipeline, step1_exact_merge, step2_topo_merge
from .diffusion import SirEnsembleSummary, SirParams, sir_ensemble, sir_run
from .graph import FirmGraph, FirmNode, giant_component, merge_nodes, project
from .ingest import AffiliationTable, load_table
from .metrics import betweenness, centralities, pagerank, rank_correlation_curve, spearman, topology_summary

__all__ = [
    "AffiliationTable",
    "FirmGraph",
    "FirmNode",
    "InterlockDeduplicator",
    "MergeReport",
    "SirEnsembleSummary",
    "SirParams",
    "betweenness",
    "centralities",
    "giant_component",
    "load_table",
    "merge_nodes",
    "pagerank",
    "project",
    "rank_correlation_curve",
    "run_pipeline",
    "sir_ensemble",
    "sir_run",
    "spearman",
    "step1_exact_merge",
    "step2_topo_merge",
    "topology_summary",
]
