"""
path_utils.py

Path resolution and JSON file helpers shared by the dataset, trainer and cli
packages.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from ..exceptions import ConfigError

# Initialize logger for this module
logger = logging.getLogger(__name__)


def resolve_path(path_input: Union[str, Path], base_dir: Optional[Path] = None) -> Path:
    """
    Resolve a path input to an absolute Path object.

    Args:
        path_input: String or Path object to resolve
        base_dir: Base directory to resolve relative paths against (defaults to current working directory)

    Returns:
        Resolved absolute Path object
    """
    if base_dir is None:
        base_dir = Path.cwd()

    path = Path(path_input)

    if path.is_absolute():
        return path

    return (Path(base_dir) / path).resolve()


def ensure_directory_exists(path: Union[str, Path]) -> Path:
    """
    Ensure a directory exists, creating it if necessary.

    Args:
        path: Directory path to ensure exists

    Returns:
        Path object of the created/existing directory
    """
    dir_path = Path(path)
    if not dir_path.exists():
        logger.debug(f"Creating directory: {dir_path}")
    dir_path.mkdir(parents=True, exist_ok=True)
    return dir_path


def load_json_file(json_file: Union[str, Path]) -> Dict[str, Any]:
    """
    Load a UTF-8 JSON object from disk.

    Raises:
        ConfigError: If the file is missing or does not hold valid JSON
    """
    json_path = Path(json_file)

    try:
        with open(json_path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"File not found: {json_path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in {json_path}: {e}")

    if not isinstance(data, dict):
        raise ConfigError(f"Expected a JSON object at the top level of {json_path}")
    return data


def write_json_file(data: Dict[str, Any], output_path: Union[str, Path]) -> Path:
    """Write a JSON object with stable key order, creating parent directories."""
    output_path = Path(output_path)
    ensure_directory_exists(output_path.parent)

    with open(output_path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
        f.write("\n")

    logger.debug(f"Wrote JSON: {output_path}")
    return output_path
