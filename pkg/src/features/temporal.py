"""Posting-hour histogram view."""

from typing import Sequence

import numpy as np

from ..models import UserDocument
from ..utils.logger import logger
from ..validators import validate_hours

HOURS_PER_DAY = 24


def timestamp_feature(doc: UserDocument) -> np.ndarray:
    """
    24-bin histogram of the user's posting hours (UTC), l2-normalized.

    Raises:
        ValidationError: If an hour lies outside [0, 23]
    """
    hours = validate_hours(doc.hours)
    histogram = np.bincount(hours, minlength=HOURS_PER_DAY).astype(np.float64)
    norm = np.linalg.norm(histogram)
    return histogram / norm if norm > 0 else histogram


def timestamp_matrix(docs: Sequence[UserDocument]) -> np.ndarray:
    rows = np.zeros((len(docs), HOURS_PER_DAY))
    for i, doc in enumerate(docs):
        rows[i] = timestamp_feature(doc)
    logger.info("temporal_features", "timestamp_computed", rows=len(docs))
    return rows
