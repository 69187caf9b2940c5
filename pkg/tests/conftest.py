"""Shared fixtures and document builders."""

from pathlib import Path
from typing import List, Optional

import pytest

from src.models import UserDocument

SMALL_CONFIG = """
seed = 42
deterministic = true

[corpus]
train_fraction = 0.6
validation_fraction = 0.2

[tfidf]
min_df = 2

[doc2vec]
dim = 8
epochs = 3
min_df = 2
infer_steps = 3

[graph]
celebrity_threshold = 100

[node2vec]
dim = 8
walk_length = 6
walks_per_node = 2
window = 2
epochs = 1

[model]
n_h11 = 8
n_h12 = 4
n_h13 = 4
n_h14 = 4
learning_rate = 0.01
weight_decay = 0.001
batch_size = 16
max_epochs = 15
patience = 5
"""


def make_doc(
    user_id: str,
    tokens: Optional[List[str]] = None,
    raw_texts: Optional[List[str]] = None,
    hours: Optional[List[int]] = None,
    lat: float = 0.0,
    lon: float = 0.0,
    label: str = "A",
    split: str = "train",
) -> UserDocument:
    return UserDocument(
        user_id=user_id,
        tokens=tokens or [],
        raw_texts=raw_texts or [],
        hours=hours or [],
        gt_latitude=lat,
        gt_longitude=lon,
        gt_label=label,
        split=split,
    )


@pytest.fixture
def small_config(tmp_path) -> Path:
    path = tmp_path / "menet.toml"
    path.write_text(SMALL_CONFIG, encoding="utf-8")
    return path
