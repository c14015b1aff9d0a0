"""
Retrieval evaluation: embedding, single-shot CMC, mean average precision and reports.
"""

from .embed import distance_matrix, embed, l2_normalize_rows
from .ranking import (
    RankingResult, average_precisions, cmc_evaluate, evaluate_protocol, map_evaluate, split_probe_gallery,
)
from .report import export_cmc_csv, export_report_json, summary_line

__all__ = [
    "distance_matrix",
    "embed",
    "l2_normalize_rows",
    "RankingResult",
    "average_precisions",
    "cmc_evaluate",
    "evaluate_protocol",
    "map_evaluate",
    "split_probe_gallery",
    "export_cmc_csv",
    "export_report_json",
    "summary_line",
]
