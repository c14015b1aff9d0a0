"""
training_log.py

Newline-delimited JSON training log, one EpochRecord per line.
"""

import json
import logging
from pathlib import Path
from typing import List, Sequence, Union

from ..exceptions import ConfigError
from ..shared_utils.path_utils import ensure_directory_exists
from .state import EpochRecord

logger = logging.getLogger(__name__)


def format_record(record: EpochRecord) -> str:
    return json.dumps(record.to_dict(), sort_keys=True)


def write_training_log(records: Sequence[EpochRecord], path: Union[str, Path]) -> Path:
    path = Path(path)
    ensure_directory_exists(path.parent)
    with open(path, 'w', encoding='utf-8') as f:
        for record in records:
            f.write(format_record(record) + "\n")
    logger.debug(f"Wrote {len(records)} log records to {path}")
    return path


def append_training_log(record: EpochRecord, path: Union[str, Path]) -> None:
    path = Path(path)
    ensure_directory_exists(path.parent)
    with open(path, 'a', encoding='utf-8') as f:
        f.write(format_record(record) + "\n")


def read_training_log(path: Union[str, Path]) -> List[EpochRecord]:
    """
    Raises:
        ConfigError: If the file is missing or a line is not a valid record
    """
    path = Path(path)
    records = []
    try:
        with open(path, 'r', encoding='utf-8') as f:
            for number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    records.append(EpochRecord.from_dict(json.loads(line)))
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                    raise ConfigError(f"Invalid training log record at {path}:{number}: {e}")
    except FileNotFoundError:
        raise ConfigError(f"File not found: {path}")
    return records
