"""Utility helpers for qvol."""
from .file_utils import ensure_directory_exists, write_text
from .summation import combine_partials, pairwise_sum, parallel_map, two_sum

__all__ = [
    "ensure_directory_exists",
    "write_text",
    "combine_partials",
    "pairwise_sum",
    "parallel_map",
    "two_sum",
]
