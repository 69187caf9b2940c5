"""Pipeline exceptions and input validation functions."""

from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from .models import VIEW_NAMES, SplitSpec
from .utils.logger import logger


class PipelineError(Exception):
    """Base class for fatal pipeline errors; carries the CLI exit code."""

    exit_code: int = 1


class ValidationError(PipelineError):
    """Missing or invalid input."""

    exit_code = 2


class ManifestError(PipelineError):
    """Inconsistent split manifest or class coverage."""

    exit_code = 3


class FeatureMismatchError(PipelineError):
    """Feature views that do not line up row by row."""

    exit_code = 4


class NumericalError(PipelineError):
    """Non-finite loss or parameters."""

    exit_code = 5


def validate_view_names(views: Iterable[str]) -> List[str]:
    """
    Validate requested feature view names.

    Args:
        views: View names, in any order

    Returns:
        The names in canonical branch order

    Raises:
        ValidationError: If a name is unknown or none is given
    """
    requested = [v.strip().lower() for v in views if v.strip()]
    if not requested:
        raise ValidationError("At least one view is required")

    unknown = [v for v in requested if v not in VIEW_NAMES]
    if unknown:
        raise ValidationError(
            f"Unknown view: {', '.join(unknown)}. "
            f"Must be one of: {', '.join(VIEW_NAMES)}"
        )
    return [name for name in VIEW_NAMES if name in requested]


def validate_split(split: SplitSpec, user_ids: Optional[Iterable[str]] = None) -> SplitSpec:
    """
    Validate a split manifest against the users of a corpus.

    Args:
        split: Split to validate
        user_ids: Users of the corpus; skips the coverage checks when None

    Returns:
        The split

    Raises:
        ManifestError: If the sets overlap or reference unknown users
    """
    overlap = split.overlaps()
    if overlap:
        logger.error("validator", "split_overlap", users=sorted(overlap)[:10])
        raise ManifestError(f"Users present in more than one split: {', '.join(sorted(overlap)[:10])}")

    if user_ids is not None:
        known = set(user_ids)
        unknown = split.all_ids() - known
        if unknown:
            logger.error("validator", "split_unknown_users", users=sorted(unknown)[:10])
            raise ManifestError(f"Split references unknown users: {', '.join(sorted(unknown)[:10])}")
        unassigned = known - split.all_ids()
        if unassigned:
            logger.error("validator", "split_unassigned_users", users=sorted(unassigned)[:10])
            raise ManifestError(f"Users missing from the split: {', '.join(sorted(unassigned)[:10])}")

    return split


def validate_hours(hours: Sequence[int]) -> np.ndarray:
    """
    Validate hours of day.

    Raises:
        ValidationError: If an hour lies outside [0, 23]
    """
    arr = np.asarray(hours, dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() > 23):
        bad = arr[(arr < 0) | (arr > 23)][0]
        raise ValidationError(f"Hour out of range [0, 23]: {bad}")
    return arr


def validate_feature_rows(row_counts: Mapping[str, int]) -> int:
    """
    Validate that every view has the same number of rows.

    Args:
        row_counts: View name to row count

    Returns:
        The common row count

    Raises:
        FeatureMismatchError: If two views disagree
    """
    items = list(row_counts.items())
    if not items:
        raise ValidationError("No feature views given")
    first_view, first_rows = items[0]
    for view, rows in items[1:]:
        if rows != first_rows:
            logger.error(
                "validator",
                "feature_row_mismatch",
                views=[first_view, view],
                rows=[first_rows, rows]
            )
            raise FeatureMismatchError(
                f"Row count mismatch: {first_view} has {first_rows} rows, {view} has {rows} rows"
            )
    return first_rows


def validate_dimensions(expected: Mapping[str, int], actual: Mapping[str, int]) -> None:
    """
    Validate view dimensions against the model's.

    Raises:
        ValidationError: If a view has the wrong width
    """
    for view, dim in expected.items():
        if view in actual and actual[view] != dim:
            raise ValidationError(
                f"Dimension mismatch for view {view}: expected {dim}, got {actual[view]}"
            )


def validate_finite(arrays: Dict[str, np.ndarray], context: str) -> None:
    """
    Guard against NaN or infinite values.

    Raises:
        NumericalError: If any array holds a non-finite value
    """
    for name, value in arrays.items():
        if not np.all(np.isfinite(value)):
            logger.error("validator", "non_finite_values", array=name, context=context)
            raise NumericalError(f"Non-finite values in {name} ({context})")


def validate_label_coverage(train_labels: Iterable[str], other_labels: Iterable[str]) -> None:
    """
    Validate that every evaluated class was seen in training.

    Raises:
        ManifestError: Naming the first class absent from the training split
    """
    known = set(train_labels)
    missing = sorted(set(other_labels) - known)
    if missing:
        logger.error("validator", "class_missing_in_train", labels=missing)
        raise ManifestError(f"Class absent from the training split: {missing[0]}")
