"""Per-user document assembly, splits and the documents file."""

import json
import struct
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Literal, Sequence, Tuple

import numpy as np

from ..geo import state_to_region
from ..models import SPLIT_NAMES, RejectedUser, SplitSpec, TweetRecord, UserDocument
from ..utils.logger import logger
from ..validators import ManifestError, ValidationError, validate_split
from .preprocess import preprocess

Task = Literal["region", "state", "custom"]

_LENGTH = struct.Struct(">I")


def make_split(
    user_ids: Iterable[str],
    train_fraction: float,
    validation_fraction: float,
    seed: int
) -> SplitSpec:
    """
    Seeded random split of users into train/validation/test.

    The user ids are sorted before shuffling, so the result does not depend
    on input order.
    """
    ids = sorted(set(user_ids))
    order = np.random.default_rng(seed).permutation(len(ids))
    shuffled = [ids[i] for i in order]
    n_train = int(round(train_fraction * len(ids)))
    n_validation = int(round(validation_fraction * len(ids)))
    return SplitSpec(
        train_ids=set(shuffled[:n_train]),
        validation_ids=set(shuffled[n_train:n_train + n_validation]),
        test_ids=set(shuffled[n_train + n_validation:]),
    )


def load_split_file(path: str) -> SplitSpec:
    """
    Read a JSON split manifest ``{"train": [...], "validation": [...], "test": [...]}``.

    Raises:
        ValidationError: If the file is missing or not a manifest
        ManifestError: If a user appears in two splits
    """
    split_path = Path(path)
    if not split_path.is_file():
        raise ValidationError(f"Split file not found: {split_path}")
    try:
        data = json.loads(split_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValidationError(f"Invalid split file {split_path}: {e}")
    if not isinstance(data, dict) or set(data) - set(SPLIT_NAMES):
        raise ValidationError(f"Split file must map {', '.join(SPLIT_NAMES)} to user id lists")

    lists = {name: list(data.get(name, [])) for name in SPLIT_NAMES}
    for name, ids in lists.items():
        if len(set(ids)) != len(ids):
            raise ManifestError(f"Duplicate user ids in split {name}")
    return validate_split(SplitSpec.from_manifest(lists))


def write_split_manifest(split: SplitSpec, path: Path) -> None:
    path.write_text(json.dumps(split.to_manifest(), indent=2) + "\n", encoding="utf-8")


def _resolve_label(records: Sequence[TweetRecord], first_located: TweetRecord, task: Task):
    label = first_located.label
    if label is None:
        label = next((r.label for r in records if r.label is not None), None)
    if label is None:
        return None, "no label"
    if task == "region":
        region = state_to_region(label)
        if region is None:
            return None, f"unknown US state for region task: {label}"
        return region, None
    return label, None


def build_documents(
    records: Sequence[TweetRecord],
    split: SplitSpec,
    task: Task = "custom"
) -> Tuple[List[UserDocument], List[RejectedUser]]:
    """
    Group tweets per user into documents.

    Tweets are ordered by timestamp (ties by input order) before
    concatenation; the ground truth is the earliest tweet with coordinates.

    Args:
        records: Tweets in file order
        split: Split assignment of every user
        task: Label derivation (``region`` maps US states to census regions)

    Returns:
        Documents sorted by user id, and rejected users

    Raises:
        ManifestError: If the split is inconsistent with the records
    """
    by_user: Dict[str, List[TweetRecord]] = defaultdict(list)
    for record in records:
        by_user[record.user_id].append(record)

    validate_split(split, by_user.keys())

    documents: List[UserDocument] = []
    rejected: List[RejectedUser] = []
    for user_id in sorted(by_user):
        # stable sort keeps file order among equal timestamps
        tweets = sorted(by_user[user_id], key=lambda r: r.timestamp_utc)
        first_located = next((t for t in tweets if t.has_coordinates), None)
        if first_located is None:
            rejected.append(RejectedUser(user_id=user_id, reason="no tweet with coordinates"))
            continue

        label, reason = _resolve_label(tweets, first_located, task)
        if label is None:
            rejected.append(RejectedUser(user_id=user_id, reason=reason))
            continue

        tokens: List[str] = []
        for tweet in tweets:
            tokens.extend(preprocess(tweet.text))

        documents.append(UserDocument(
            user_id=user_id,
            tokens=tokens,
            raw_texts=[t.text for t in tweets],
            hours=[t.hour for t in tweets],
            gt_longitude=first_located.longitude,
            gt_latitude=first_located.latitude,
            gt_label=label,
            split=split.split_of(user_id),
        ))

    for item in rejected:
        logger.warning("corpus", "user_rejected", user_id=item.user_id, reason=item.reason)
    logger.info(
        "corpus",
        "documents_built",
        users=len(by_user),
        documents=len(documents),
        rejected=len(rejected)
    )
    return documents, rejected


def split_documents(docs: Sequence[UserDocument]) -> Dict[str, List[UserDocument]]:
    """Documents grouped by split, preserving order."""
    grouped: Dict[str, List[UserDocument]] = {name: [] for name in SPLIT_NAMES}
    for doc in docs:
        grouped[doc.split].append(doc)
    return grouped


def write_documents(docs: Sequence[UserDocument], path: Path) -> None:
    """One length-prefixed JSON record per user, newline-terminated."""
    with open(path, "wb") as f:
        for doc in docs:
            payload = doc.model_dump_json().encode("utf-8")
            f.write(_LENGTH.pack(len(payload)))
            f.write(payload)
            f.write(b"\n")
    logger.info("corpus", "documents_written", path=path, documents=len(docs))


def read_documents(path: Path) -> List[UserDocument]:
    """
    Read a documents file written by :func:`write_documents`.

    Raises:
        ValidationError: If the file is missing or truncated
    """
    if not path.is_file():
        raise ValidationError(f"Documents file not found: {path}")

    docs: List[UserDocument] = []
    data = path.read_bytes()
    offset = 0
    while offset < len(data):
        if offset + _LENGTH.size > len(data):
            raise ValidationError(f"Truncated documents file: {path}")
        (length,) = _LENGTH.unpack_from(data, offset)
        start = offset + _LENGTH.size
        end = start + length
        if end + 1 > len(data) or data[end:end + 1] != b"\n":
            raise ValidationError(f"Truncated documents file: {path}")
        docs.append(UserDocument.model_validate_json(data[start:end]))
        offset = end + 1
    return docs
