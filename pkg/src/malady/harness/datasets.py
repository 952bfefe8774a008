"""Feature files, synthetic blobs and the accuracy metric."""
import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from ..active import accuracy
from ..errors import FormatError, InvalidParameterError

__all__ = ["SyntheticBlobsSpec", "generate_blobs", "load_dataset", "accuracy",
           "write_csv_dataset", "write_binary_dataset", "remap_labels"]


@dataclass(frozen=True)
class SyntheticBlobsSpec:
    """Gaussian clusters centered evenly on the unit circle.

    Cluster ``c`` gets label ``c mod 2``.
    """

    clusters: int = 6
    points_per_cluster: int = 400
    std: float = 0.25

    def __post_init__(self):
        if self.clusters < 2 or self.points_per_cluster < 1:
            raise InvalidParameterError("need at least two nonempty clusters")
        if not self.std > 0:
            raise InvalidParameterError("std must be positive")

    def centers(self):
        c = np.arange(self.clusters)
        angle = 2 * np.pi * c / self.clusters
        return np.column_stack([np.cos(angle), np.sin(angle)])


def generate_blobs(spec=None, seed=0):
    """Sample the blobs; returns ``(X, labels)`` with ``X`` of shape (N, 2)."""
    spec = spec or SyntheticBlobsSpec()
    rng = np.random.default_rng(seed)
    C = spec.centers()
    m = spec.points_per_cluster
    X = np.concatenate([C[c] + spec.std * rng.standard_normal((m, 2))
                        for c in range(spec.clusters)])
    labels = np.repeat(np.arange(spec.clusters) % 2, m)
    return X, labels


def remap_labels(raw):
    """Dense ``0..K-1`` labels plus the sorted original values."""
    mapping, labels = np.unique(np.asarray(raw, dtype=np.int64), return_inverse=True)
    return labels.astype(np.int64), tuple(int(v) for v in mapping)


def _parse_label(token, lineno):
    try:
        return int(token)
    except ValueError:
        pass
    try:
        value = float(token)
    except ValueError:
        raise FormatError(f"line {lineno}: label {token!r} is not an integer") from None
    if not value.is_integer():
        raise FormatError(f"line {lineno}: label {token!r} is not an integer")
    return int(value)


def _load_csv(path, label_column):
    rows, raw_labels = [], []
    width = None
    with open(path, newline="") as f:
        for lineno, fields in enumerate(csv.reader(f), start=1):
            if not fields or all(not s.strip() for s in fields):
                continue
            if width is None:
                width = len(fields)
                if label_column is not None:
                    col = width - 1 if label_column == "last" else int(label_column)
                    if not -width <= col < width or width < 2:
                        raise FormatError(f"line {lineno}: no label column {label_column!r}")
                    col %= width
            elif len(fields) != width:
                raise FormatError(
                    f"line {lineno}: expected {width} fields, found {len(fields)}")
            if label_column is not None:
                raw_labels.append(_parse_label(fields[col].strip(), lineno))
                fields = fields[:col] + fields[col + 1:]
            try:
                row = [float(s) for s in fields]
            except ValueError as exc:
                raise FormatError(f"line {lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in row):
                raise FormatError(f"line {lineno}: non-finite feature value")
            rows.append(row)
    if not rows:
        raise FormatError(f"{path}: no data rows")
    X = np.asarray(rows, dtype=np.float64)
    if label_column is None:
        return X, None, None
    labels, mapping = remap_labels(raw_labels)
    return X, labels, mapping


def _load_binary(path):
    size = os.path.getsize(path)
    if size < 16:
        raise FormatError(f"{path}: missing 16-byte header")
    with open(path, "rb") as f:
        n, d = (int(v) for v in np.frombuffer(f.read(16), dtype="<u8"))
        if size != 16 + 8 * n * d:
            raise FormatError(
                f"{path}: header announces {n} x {d} values, file holds {(size - 16) / 8:g}")
        X = np.frombuffer(f.read(), dtype="<f8").astype(np.float64).reshape(n, d)
    if not np.all(np.isfinite(X)):
        raise FormatError(f"{path}: non-finite feature value")
    return X


def load_dataset(path, format="csv", label_column="last"):
    """Read a feature matrix and optional labels.

    Parameters
    ----------
    path : str or path-like
    format : {"csv", "binary"}
        ``csv`` has one point per row; ``binary`` is a little-endian
        ``(N, d)`` uint64 header followed by ``N*d`` float64 values in
        row-major order and never carries labels.
    label_column : {"last", int, None}
        Column of integer labels in a CSV file.

    Returns
    -------
    X : (N, d) float64 array
    labels : (N,) int64 array or None
        Dense labels ``0..K-1``.
    mapping : tuple or None
        ``mapping[k]`` is the original value of dense label ``k``.
    """
    if format == "csv":
        return _load_csv(path, label_column)
    if format == "binary":
        return _load_binary(path), None, None
    raise InvalidParameterError(f"unknown dataset format {format!r}")


def write_csv_dataset(path, X, labels=None):
    """Write features (and a final label column) in the CSV format."""
    with open(path, "w") as f:
        for i, row in enumerate(np.asarray(X, dtype=np.float64).tolist()):
            fields = [repr(v) for v in row]
            if labels is not None:
                fields.append(str(int(labels[i])))
            f.write(",".join(fields) + "\n")


def write_binary_dataset(path, X):
    X = np.ascontiguousarray(X, dtype="<f8")
    with open(path, "wb") as f:
        f.write(np.asarray(X.shape, dtype="<u8").tobytes())
        f.write(X.tobytes())
