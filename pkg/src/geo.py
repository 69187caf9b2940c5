"""Class centroids, haversine distances and evaluation metrics."""

import csv
import math
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .models import EvalReport, GeoClass, GeoClassTable, UserDocument
from .utils.logger import logger
from .validators import ManifestError, ValidationError, validate_label_coverage

EARTH_RADIUS_KM = 6371.0088
ACCURACY_RADIUS_KM = 161.0

CENSUS_REGIONS: Dict[str, Sequence[str]] = {
    "Northeast": ("CT", "ME", "MA", "NH", "RI", "VT", "NJ", "NY", "PA"),
    "Midwest": ("IL", "IN", "MI", "OH", "WI", "IA", "KS", "MN", "MO", "NE", "ND", "SD"),
    "South": ("DE", "FL", "GA", "MD", "NC", "SC", "VA", "DC", "WV", "AL", "KY", "MS",
              "TN", "AR", "LA", "OK", "TX"),
    "West": ("AZ", "CO", "ID", "MT", "NV", "NM", "UT", "WY", "AK", "CA", "HI", "OR", "WA"),
}

STATE_NAMES: Dict[str, str] = {
    "alabama": "AL", "alaska": "AK", "arizona": "AZ", "arkansas": "AR", "california": "CA",
    "colorado": "CO", "connecticut": "CT", "delaware": "DE", "district of columbia": "DC",
    "florida": "FL", "georgia": "GA", "hawaii": "HI", "idaho": "ID", "illinois": "IL",
    "indiana": "IN", "iowa": "IA", "kansas": "KS", "kentucky": "KY", "louisiana": "LA",
    "maine": "ME", "maryland": "MD", "massachusetts": "MA", "michigan": "MI",
    "minnesota": "MN", "mississippi": "MS", "missouri": "MO", "montana": "MT",
    "nebraska": "NE", "nevada": "NV", "new hampshire": "NH", "new jersey": "NJ",
    "new mexico": "NM", "new york": "NY", "north carolina": "NC", "north dakota": "ND",
    "ohio": "OH", "oklahoma": "OK", "oregon": "OR", "pennsylvania": "PA",
    "rhode island": "RI", "south carolina": "SC", "south dakota": "SD", "tennessee": "TN",
    "texas": "TX", "utah": "UT", "vermont": "VT", "virginia": "VA", "washington": "WA",
    "west virginia": "WV", "wisconsin": "WI", "wyoming": "WY",
}

_STATE_TO_REGION = {state: region for region, states in CENSUS_REGIONS.items() for state in states}


def state_to_region(label: str) -> Optional[str]:
    """Census region of a US state given by code or name; None if unknown."""
    key = label.strip()
    code = key.upper() if len(key) == 2 else STATE_NAMES.get(key.lower())
    return _STATE_TO_REGION.get(code) if code else None


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """
    Great-circle distance between two points in kilometers.

    Args:
        lat1, lon1: First point (decimal degrees)
        lat2, lon2: Second point (decimal degrees)

    Returns:
        Distance in kilometers
    """
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = phi2 - phi1
    dlambda = math.radians(lon2 - lon1)

    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlambda / 2) ** 2
    # rounding can push a slightly outside [0, 1]
    a = min(1.0, max(0.0, a))
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(a))


def haversine_km_vectorized(lats1, lons1, lats2, lons2) -> np.ndarray:
    """Vectorized haversine over numpy arrays, in kilometers."""
    lats1, lons1, lats2, lons2 = map(np.radians, map(np.asarray, (lats1, lons1, lats2, lons2)))
    a = (
        np.sin((lats2 - lats1) / 2) ** 2
        + np.cos(lats1) * np.cos(lats2) * np.sin((lons2 - lons1) / 2) ** 2
    )
    a = np.clip(a, 0.0, 1.0)
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(a))


def build_class_table(train_docs: Sequence[UserDocument]) -> GeoClassTable:
    """
    Assign each training class the component-wise median of its users' coordinates.

    Class ids follow the lexicographic order of labels.

    Raises:
        ValidationError: If there are no training documents
    """
    if not train_docs:
        raise ValidationError("Cannot build a class table without training users")

    longitudes: Dict[str, List[float]] = defaultdict(list)
    latitudes: Dict[str, List[float]] = defaultdict(list)
    for doc in train_docs:
        longitudes[doc.gt_label].append(doc.gt_longitude)
        latitudes[doc.gt_label].append(doc.gt_latitude)

    classes = [
        GeoClass(
            class_id=class_id,
            label=label,
            centroid_longitude=float(np.median(longitudes[label])),
            centroid_latitude=float(np.median(latitudes[label])),
            train_count=len(longitudes[label]),
        )
        for class_id, label in enumerate(sorted(longitudes))
    ]
    logger.info("geo", "class_table_built", classes=len(classes), train_users=len(train_docs))
    return GeoClassTable(classes=classes)


def encode_labels(docs: Sequence[UserDocument], table: GeoClassTable) -> np.ndarray:
    """
    Class ids of the documents' ground-truth labels.

    Raises:
        ManifestError: If a label has no class in the table
    """
    validate_label_coverage(table.labels(), (doc.gt_label for doc in docs))
    mapping = table.label_to_id()
    return np.array([mapping[doc.gt_label] for doc in docs], dtype=np.int64)


def evaluate(
    predictions: Sequence[int],
    truth: Sequence[UserDocument],
    table: GeoClassTable,
    views: Optional[Sequence[str]] = None
) -> EvalReport:
    """
    Score predicted classes against the users' true labels and coordinates.

    Args:
        predictions: Predicted class ids, one per user
        truth: Users in the same order
        table: Class table used for decoding ids into centroids
        views: Views the predictions were made from, for the record

    Returns:
        EvalReport

    Raises:
        ValidationError: On a length mismatch or an unknown class id
        ManifestError: If a true label is missing from the table
    """
    predicted = np.asarray(predictions, dtype=np.int64)
    if len(predicted) != len(truth):
        raise ValidationError(
            f"Prediction count {len(predicted)} does not match user count {len(truth)}"
        )
    m = len(table)
    bad = predicted[(predicted < 0) | (predicted >= m)]
    if bad.size:
        logger.error("geo", "unknown_class_id", class_id=int(bad[0]))
        raise ValidationError(f"Unknown predicted class id: {int(bad[0])}")

    if len(truth) == 0:
        return EvalReport(
            n_users=0, accuracy=0.0, mean_km=0.0, median_km=0.0, at161=0.0,
            labels=table.labels(), confusion=[[0] * m for _ in range(m)], views=list(views or [])
        )

    true_ids = encode_labels(truth, table)
    centroid_lat = np.array([c.centroid_latitude for c in table.classes])
    centroid_lon = np.array([c.centroid_longitude for c in table.classes])
    errors = haversine_km_vectorized(
        [doc.gt_latitude for doc in truth],
        [doc.gt_longitude for doc in truth],
        centroid_lat[predicted],
        centroid_lon[predicted],
    )

    confusion = np.zeros((m, m), dtype=np.int64)
    np.add.at(confusion, (true_ids, predicted), 1)

    report = EvalReport(
        n_users=len(truth),
        accuracy=float(np.mean(true_ids == predicted)),
        mean_km=float(np.mean(errors)),
        median_km=float(np.median(errors)),
        at161=float(np.mean(errors < ACCURACY_RADIUS_KM)),
        labels=table.labels(),
        confusion=confusion.tolist(),
        views=list(views or []),
    )
    logger.info(
        "geo",
        "evaluation_completed",
        users=report.n_users,
        accuracy=report.accuracy,
        mean_km=report.mean_km,
        median_km=report.median_km,
        at161=report.at161
    )
    return report


def format_report(report: EvalReport) -> str:
    """Human-readable summary table."""
    lines = [
        f"  Users:        {report.n_users}",
        f"  Accuracy:     {report.accuracy:.4f}",
        f"  Mean error:   {report.mean_km:.1f} km",
        f"  Median error: {report.median_km:.1f} km",
        f"  @161:         {report.at161:.4f}",
    ]
    if report.views:
        lines.append(f"  Views:        {', '.join(report.views)}")
    if report.labels:
        width = max(len(label) for label in report.labels)
        lines.append("")
        lines.append("  Confusion (rows: true, columns: predicted):")
        for label, row in zip(report.labels, report.confusion):
            lines.append(f"  {label:<{width}}  " + " ".join(f"{count:>5d}" for count in row))
    return "\n".join(lines)


def write_report(report: EvalReport, path: Path) -> None:
    path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")


def write_class_table(table: GeoClassTable, path: Path) -> None:
    """Export as CSV: class,label,lon,lat,count."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["class", "label", "lon", "lat", "count"])
        for c in table.classes:
            writer.writerow([c.class_id, c.label, repr(c.centroid_longitude),
                             repr(c.centroid_latitude), c.train_count])


def read_class_table(path: Path) -> GeoClassTable:
    """
    Read a class table CSV.

    Raises:
        ValidationError: If the file is missing
    """
    if not path.is_file():
        raise ValidationError(f"Class table not found: {path}")
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    classes = [
        GeoClass(
            class_id=int(row["class"]),
            label=row["label"],
            centroid_longitude=float(row["lon"]),
            centroid_latitude=float(row["lat"]),
            train_count=int(row["count"]),
        )
        for row in rows
    ]
    if [c.class_id for c in classes] != list(range(len(classes))):
        raise ManifestError(f"Class ids in {path} are not dense and ordered")
    return GeoClassTable(classes=classes)
