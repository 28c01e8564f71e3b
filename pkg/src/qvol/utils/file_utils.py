"""Utility functions for writing report files."""
import logging
from pathlib import Path
from typing import Union

logger = logging.getLogger(__name__)


def ensure_directory_exists(directory: Union[str, Path]) -> Path:
    """Ensure a directory exists, create it if it doesn't.

    Args:
        directory: Path to the directory

    Returns:
        Path: The path to the directory
    """
    path = Path(directory).resolve()
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_text(file_path: Union[str, Path], content: str) -> Path:
    """Write text with Unix newlines, creating parent directories.

    The same content always produces the same bytes on disk.

    Args:
        file_path: Destination file
        content: Text to write

    Returns:
        The resolved path that was written

    Raises:
        RuntimeError: If the file cannot be written
    """
    path = Path(file_path).resolve()
    try:
        ensure_directory_exists(path.parent)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(content)
    except OSError as e:
        raise RuntimeError(f"Error writing to file {path}: {e}") from e
    logger.info(f"Wrote {len(content)} characters to {path}")
    return path
