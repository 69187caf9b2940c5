"""Feature store: one binary file per view with a JSON header and row-major data."""

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Union

import numpy as np
from scipy import sparse

from ..utils.logger import logger
from ..validators import ValidationError

MAGIC = b"MFS\x01"
_HEADER_LENGTH = struct.Struct(">I")
_DTYPE = np.dtype("<f8")
_INDEX = np.dtype("<i4")

Matrix = Union[np.ndarray, sparse.csr_matrix]


@dataclass
class FeatureMatrix:
    """Per-user feature block of one view; rows follow ``row_ids``."""

    view: str
    row_ids: List[str]
    data: Matrix

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    @property
    def n_cols(self) -> int:
        return self.data.shape[1]

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.data)

    def select(self, rows: np.ndarray) -> Matrix:
        return self.data[rows]


def write_features(fm: FeatureMatrix, path: Path) -> None:
    """
    Write a view as ``MAGIC, header length, JSON header, data``.

    Dense data is row-major float64; sparse rows are (count, indices, values).
    """
    if len(fm.row_ids) != fm.n_rows:
        raise ValidationError(f"View {fm.view}: {len(fm.row_ids)} row ids for {fm.n_rows} rows")

    header = json.dumps({
        "view": fm.view,
        "n_rows": fm.n_rows,
        "n_cols": fm.n_cols,
        "dtype": "float64",
        "sparse": fm.is_sparse,
        "row_ids": list(fm.row_ids),
    }, sort_keys=True).encode("utf-8")

    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(_HEADER_LENGTH.pack(len(header)))
        f.write(header)
        if fm.is_sparse:
            csr = sparse.csr_matrix(fm.data)
            csr.sort_indices()
            for i in range(csr.shape[0]):
                start, end = csr.indptr[i], csr.indptr[i + 1]
                f.write(np.array([end - start], dtype=_INDEX).tobytes())
                f.write(csr.indices[start:end].astype(_INDEX).tobytes())
                f.write(csr.data[start:end].astype(_DTYPE).tobytes())
        else:
            f.write(np.ascontiguousarray(fm.data, dtype=_DTYPE).tobytes())

    logger.info(
        "feature_store",
        "features_written",
        view=fm.view,
        rows=fm.n_rows,
        cols=fm.n_cols,
        sparse=fm.is_sparse,
        path=path
    )


def read_features(path: Path) -> FeatureMatrix:
    """
    Read a view written by :func:`write_features`.

    Raises:
        ValidationError: If the file is missing or malformed
    """
    if not path.is_file():
        raise ValidationError(f"Feature file not found: {path}")

    raw = path.read_bytes()
    if raw[:len(MAGIC)] != MAGIC:
        raise ValidationError(f"Not a feature file: {path}")
    try:
        return _parse(raw, path)
    except (struct.error, ValueError, KeyError) as e:
        raise ValidationError(f"Malformed feature file {path}: {e}") from e


def _parse(raw: bytes, path: Path) -> FeatureMatrix:
    offset = len(MAGIC)
    (header_length,) = _HEADER_LENGTH.unpack_from(raw, offset)
    offset += _HEADER_LENGTH.size
    header = json.loads(raw[offset:offset + header_length].decode("utf-8"))
    offset += header_length

    n_rows, n_cols = header["n_rows"], header["n_cols"]
    if header["sparse"]:
        indptr = [0]
        indices, values = [], []
        for _ in range(n_rows):
            (count,) = np.frombuffer(raw, dtype=_INDEX, count=1, offset=offset)
            offset += _INDEX.itemsize
            indices.append(np.frombuffer(raw, dtype=_INDEX, count=count, offset=offset))
            offset += count * _INDEX.itemsize
            values.append(np.frombuffer(raw, dtype=_DTYPE, count=count, offset=offset))
            offset += count * _DTYPE.itemsize
            indptr.append(indptr[-1] + int(count))
        if offset != len(raw):
            raise ValidationError(f"Trailing bytes in feature file: {path}")
        data = sparse.csr_matrix(
            (
                np.concatenate(values) if values else np.empty(0, dtype=_DTYPE),
                np.concatenate(indices) if indices else np.empty(0, dtype=_INDEX),
                np.asarray(indptr),
            ),
            shape=(n_rows, n_cols),
        )
    else:
        expected = n_rows * n_cols * _DTYPE.itemsize
        if len(raw) - offset != expected:
            raise ValidationError(f"Truncated feature file: {path}")
        if expected == 0:
            data = np.zeros((n_rows, n_cols))
        else:
            data = np.frombuffer(raw, dtype=_DTYPE, offset=offset).reshape(n_rows, n_cols).astype(np.float64)

    return FeatureMatrix(view=header["view"], row_ids=list(header["row_ids"]), data=data)
