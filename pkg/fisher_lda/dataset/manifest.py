"""
manifest.py

Manifest of images: identity label, camera, descriptor file per channel and
train/test split.

JSON layout: {"entries": [{"id": str, "label": int, "camera": int,
"file": str, "split": "train" | "test"}]}. Multi-channel images use a
"files" object {channel name: path} instead of "file".
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from ..exceptions import ConfigError, ImageLookupError, ManifestError
from ..shared_utils.path_utils import load_json_file, resolve_path, write_json_file
from .descriptors import DEFAULT_CHANNEL, DescriptorSet, read_descriptor_file

logger = logging.getLogger(__name__)

SPLITS = ("train", "test")


@dataclass
class ManifestEntry:
    """One image of the manifest."""
    image_id: str
    label: int
    camera_id: int
    files: Dict[str, str]
    split: str = "train"

    def file_for(self, channel_name: str, channel_index: int = 0) -> str:
        """Descriptor file of a channel; a lone "file" feeds the first channel."""
        if channel_name in self.files:
            return self.files[channel_name]
        if channel_index == 0 and DEFAULT_CHANNEL in self.files:
            return self.files[DEFAULT_CHANNEL]
        raise ManifestError(f"Image {self.image_id} has no descriptor file for channel '{channel_name}'")

    def to_dict(self) -> Dict:
        record = {"id": self.image_id, "label": self.label, "camera": self.camera_id}
        if set(self.files) == {DEFAULT_CHANNEL}:
            record["file"] = self.files[DEFAULT_CHANNEL]
        else:
            record["files"] = dict(self.files)
        record["split"] = self.split
        return record


@dataclass
class Manifest:
    """Ordered manifest entries plus the directory relative file paths resolve against."""
    entries: List[ManifestEntry]
    base_dir: Optional[Path] = field(default=None, compare=False)

    def __post_init__(self):
        seen = set()
        for entry in self.entries:
            if entry.image_id in seen:
                raise ManifestError(f"Duplicate image id in manifest: {entry.image_id}")
            seen.add(entry.image_id)
            if entry.split not in SPLITS:
                raise ManifestError(f"Image {entry.image_id} has unknown split '{entry.split}'")

    def split(self, name: str) -> List[ManifestEntry]:
        """Entries of one split, raising when it is empty."""
        chosen = [entry for entry in self.entries if entry.split == name]
        if not chosen:
            raise ManifestError(f"The '{name}' split of the manifest is empty")
        return chosen

    def by_id(self, image_id: str) -> ManifestEntry:
        for entry in self.entries:
            if entry.image_id == image_id:
                return entry
        raise ImageLookupError(f"Unknown image id: {image_id}")

    def resolve(self, file_path: str) -> Path:
        return resolve_path(file_path, self.base_dir)

    def to_dict(self) -> Dict:
        return {"entries": [entry.to_dict() for entry in self.entries]}


def _parse_entry(record: Dict, position: int) -> ManifestEntry:
    if not isinstance(record, dict):
        raise ManifestError(f"Manifest entry {position} is not an object")
    try:
        image_id = str(record["id"])
        label = int(record["label"])
        camera_id = int(record["camera"])
    except (KeyError, TypeError, ValueError) as e:
        raise ManifestError(f"Manifest entry {position} is missing or has an invalid field: {e}")

    if "files" in record:
        files = {str(name): str(path) for name, path in dict(record["files"]).items()}
    elif "file" in record:
        files = {DEFAULT_CHANNEL: str(record["file"])}
    else:
        raise ManifestError(f"Manifest entry {image_id} names no descriptor file")

    if label < 0:
        raise ManifestError(f"Manifest entry {image_id} has a negative label")

    return ManifestEntry(
        image_id=image_id,
        label=label,
        camera_id=camera_id,
        files=files,
        split=str(record.get("split", "train")),
    )


def read_manifest(path: Union[str, Path], check_files: bool = True) -> Manifest:
    """
    Read a manifest file.

    Args:
        path: Manifest JSON path
        check_files: Verify that every referenced descriptor file exists

    Raises:
        ManifestError: On missing file, malformed content or missing descriptor files
    """
    path = Path(path)
    try:
        data = load_json_file(path)
    except ConfigError as e:
        raise ManifestError(str(e))

    records = data.get("entries")
    if not isinstance(records, list):
        raise ManifestError(f"Manifest {path} has no 'entries' list")

    manifest = Manifest([_parse_entry(record, i) for i, record in enumerate(records)], base_dir=path.parent)

    if check_files:
        for entry in manifest.entries:
            for file_path in entry.files.values():
                resolved = manifest.resolve(file_path)
                if not resolved.exists():
                    raise ManifestError(f"Descriptor file for image {entry.image_id} not found: {resolved}")

    logger.info(f"Loaded manifest {path} with {len(manifest.entries)} entries")
    return manifest


def write_manifest(manifest: Manifest, path: Union[str, Path]) -> Path:
    """Write a manifest as UTF-8 JSON."""
    return write_json_file(manifest.to_dict(), path)


def load_descriptor_sets(manifest: Manifest, entries: Sequence[ManifestEntry],
                         channel_names: Sequence[str]) -> List[DescriptorSet]:
    """Read the descriptor files of ``entries`` for every configured channel."""
    descriptor_sets = []
    for entry in entries:
        channels = {}
        for index, name in enumerate(channel_names):
            channels[name] = read_descriptor_file(manifest.resolve(entry.file_for(name, index)))
        descriptor_sets.append(DescriptorSet(entry.image_id, entry.camera_id, entry.label, channels))
    logger.debug(f"Loaded descriptors for {len(descriptor_sets)} images")
    return descriptor_sets
