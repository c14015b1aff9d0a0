"""
report.py

Export evaluation results: the CMC curve as CSV, the full ranking result as
JSON and a one-line JSON summary for standard output.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

from ..shared_utils.path_utils import ensure_directory_exists, write_json_file
from .ranking import RankingResult

logger = logging.getLogger(__name__)

DEFAULT_RANKS = (1, 5, 10, 20)


def summary(result: RankingResult, ranks: Sequence[int] = DEFAULT_RANKS) -> Dict[str, float]:
    values = {f"rank{k}": result.rank(k) for k in ranks}
    values["mAP"] = result.map_value
    return values


def summary_line(result: RankingResult, ranks: Sequence[int] = DEFAULT_RANKS) -> str:
    return json.dumps(summary(result, ranks))


def export_cmc_csv(result: RankingResult, output_path: Union[str, Path]) -> Path:
    """Write one (rank, rate) row per rank."""
    output_path = Path(output_path)
    ensure_directory_exists(output_path.parent)
    with open(output_path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(["rank", "rate"])
        for rank, rate in enumerate(result.cmc, start=1):
            writer.writerow([rank, repr(float(rate))])
    logger.info(f"CMC curve exported to CSV: {output_path}")
    return output_path


def export_report_json(result: RankingResult, output_path: Union[str, Path],
                       ranks: Sequence[int] = DEFAULT_RANKS,
                       extra: Optional[Dict[str, Any]] = None) -> Path:
    """Write the ranking result with its rank-k summary and any ``extra`` run metadata."""
    report = {"summary": summary(result, ranks), **result.to_dict()}
    if extra:
        report.update(extra)
    write_json_file(report, output_path)
    logger.info(f"Evaluation report exported to JSON: {output_path}")
    return Path(output_path)
