"""Readers turning tweet dumps into TweetRecords."""

import json
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import ValidationError as PydanticValidationError

from ..models import RejectedLine, TweetRecord
from ..utils.logger import logger
from ..validators import ValidationError

InputFormat = Literal["jsonl", "geotext_tsv"]

GEOTEXT_COLUMNS = ("user_id", "timestamp_utc", "latitude", "longitude", "text")


def load_label_lookup(path: str) -> Dict[str, str]:
    """
    Read a ``user_id<TAB>label`` lookup file.

    Raises:
        ValidationError: If the file is missing or a line is malformed
    """
    lookup_path = Path(path)
    if not lookup_path.is_file():
        raise ValidationError(f"Label file not found: {lookup_path}")

    lookup: Dict[str, str] = {}
    with open(lookup_path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise ValidationError(f"Malformed label line {line_number} in {lookup_path}")
            lookup[parts[0]] = parts[1].strip()
    return lookup


def _parse_jsonl_line(line: str) -> TweetRecord:
    payload = json.loads(line)
    if not isinstance(payload, dict):
        raise ValueError("line is not a JSON object")
    return TweetRecord.model_validate(payload)


def _parse_geotext_line(line: str, labels: Optional[Dict[str, str]]) -> TweetRecord:
    parts = line.split("\t", maxsplit=len(GEOTEXT_COLUMNS) - 1)
    if len(parts) != len(GEOTEXT_COLUMNS):
        raise ValueError(f"expected {len(GEOTEXT_COLUMNS)} tab-separated columns, got {len(parts)}")
    row = dict(zip(GEOTEXT_COLUMNS, parts))
    for key in ("latitude", "longitude"):
        row[key] = float(row[key]) if row[key].strip() else None
    if labels is not None:
        row["label"] = labels.get(row["user_id"])
    return TweetRecord.model_validate(row)


def ingest(
    path: str,
    format: InputFormat = "jsonl",
    labels: Optional[Dict[str, str]] = None
) -> Tuple[List[TweetRecord], List[RejectedLine]]:
    """
    Read tweet records from a dump.

    Args:
        path: Input file
        format: ``jsonl`` (one TweetRecord object per line) or ``geotext_tsv``
            (user_id, timestamp, latitude, longitude, text)
        labels: Optional user_id to label lookup (GeoText adapter)

    Returns:
        Parsed records in file order, and the rejected lines

    Raises:
        ValidationError: If the file cannot be read
    """
    input_path = Path(path)
    if not input_path.is_file():
        logger.error("corpus", "input_missing", path=input_path)
        raise ValidationError(f"Input file not found: {input_path}")

    records: List[TweetRecord] = []
    rejects: List[RejectedLine] = []

    try:
        with open(input_path, encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                line = line.rstrip("\r\n")
                if not line.strip():
                    continue
                try:
                    if format == "jsonl":
                        record = _parse_jsonl_line(line)
                    else:
                        record = _parse_geotext_line(line, labels)
                except (ValueError, PydanticValidationError) as e:
                    # json.JSONDecodeError is a ValueError
                    reason = str(e).splitlines()[0] if str(e) else type(e).__name__
                    rejects.append(RejectedLine(line_number=line_number, reason=reason))
                    logger.warning("corpus", "line_rejected", line_number=line_number, reason=reason)
                    continue
                records.append(record)
    except (OSError, UnicodeDecodeError) as e:
        logger.error("corpus", "input_unreadable", path=input_path, error=str(e))
        raise ValidationError(f"Cannot read input file {input_path}: {e}")

    logger.info(
        "corpus",
        "ingest_completed",
        path=input_path,
        format=format,
        records=len(records),
        rejected=len(rejects)
    )
    return records, rejects
