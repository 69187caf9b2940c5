import math
import random

import numpy as np
import pytest

from src.geo import (
    EARTH_RADIUS_KM,
    build_class_table,
    encode_labels,
    evaluate,
    format_report,
    haversine_km,
    haversine_km_vectorized,
    read_class_table,
    state_to_region,
    write_class_table,
)
from src.models import GeoClass, GeoClassTable
from src.validators import ManifestError, ValidationError

from tests.conftest import make_doc


def two_class_table():
    return GeoClassTable(classes=[
        GeoClass(class_id=0, label="A", centroid_longitude=0.0, centroid_latitude=0.0, train_count=1),
        GeoClass(class_id=1, label="B", centroid_longitude=100.0, centroid_latitude=40.0, train_count=1),
    ])


def equator_user(name, km, label="A"):
    return make_doc(name, lat=0.0, lon=math.degrees(km / EARTH_RADIUS_KM), label=label, split="test")


def test_haversine_constants():
    assert haversine_km(12.5, -70.0, 12.5, -70.0) == 0.0
    assert abs(haversine_km(0, 0, 0, 180) - 20015.09) < 0.01
    assert abs(haversine_km(90, 0, -90, 0) - 20015.09) < 0.01
    assert abs(haversine_km(0, 0, 1, 0) - 111.195) < 0.001


def test_haversine_symmetry_and_triangle_inequality():
    rng = random.Random(4)
    for _ in range(200):
        a, b, c = [(rng.uniform(-90, 90), rng.uniform(-180, 180)) for _ in range(3)]
        ab = haversine_km(*a, *b)
        assert ab == pytest.approx(haversine_km(*b, *a), abs=1e-9)
        assert ab <= haversine_km(*a, *c) + haversine_km(*c, *b) + 1e-6


def test_vectorized_matches_scalar():
    rng = np.random.default_rng(1)
    lat1, lat2 = rng.uniform(-90, 90, size=(2, 50))
    lon1, lon2 = rng.uniform(-180, 180, size=(2, 50))
    expected = [haversine_km(*args) for args in zip(lat1, lon1, lat2, lon2)]
    np.testing.assert_allclose(haversine_km_vectorized(lat1, lon1, lat2, lon2), expected, rtol=1e-12)


def test_class_centroids_are_medians():
    docs = [make_doc(f"b{i}", lat=lat, lon=-lat, label="B") for i, lat in enumerate([1.0, 3.0, 2.0])]
    docs += [make_doc(f"a{i}", lat=lat, lon=lat, label="A") for i, lat in enumerate([4.0, 1.0, 3.0, 2.0])]
    table = build_class_table(docs)
    assert table.labels() == ["A", "B"]
    a, b = table.classes
    assert (a.centroid_latitude, a.centroid_longitude, a.train_count) == (2.5, 2.5, 4)
    assert (b.centroid_latitude, b.centroid_longitude, b.train_count) == (2.0, -2.0, 3)


def test_no_training_users():
    with pytest.raises(ValidationError):
        build_class_table([])


def test_distance_metrics():
    truth = [equator_user(f"u{i}", km) for i, km in enumerate([10, 100, 200, 1000])]
    report = evaluate([0, 0, 0, 0], truth, two_class_table(), views=["timestamp"])
    assert report.n_users == 4
    assert report.accuracy == 1.0
    assert report.median_km == pytest.approx(150.0, abs=1e-6)
    assert report.mean_km == pytest.approx(327.5, abs=1e-6)
    assert report.at161 == 0.5
    assert report.confusion == [[4, 0], [0, 0]]
    assert report.views == ["timestamp"]


def test_metrics_ignore_user_order():
    rng = random.Random(0)
    truth = [equator_user(f"u{i}", 37 * i, label="AB"[i % 2]) for i in range(12)]
    predictions = [rng.randrange(2) for _ in truth]
    report = evaluate(predictions, truth, two_class_table())

    pairs = list(zip(predictions, truth))
    rng.shuffle(pairs)
    shuffled = evaluate([p for p, _ in pairs], [t for _, t in pairs], two_class_table())
    assert shuffled.accuracy == report.accuracy
    assert shuffled.confusion == report.confusion
    assert shuffled.mean_km == pytest.approx(report.mean_km)
    assert shuffled.median_km == pytest.approx(report.median_km)


def test_wrong_predictions_are_counted():
    truth = [equator_user("u0", 0, label="A"), equator_user("u1", 0, label="B")]
    report = evaluate([1, 1], truth, two_class_table())
    assert report.accuracy == 0.5
    assert report.confusion == [[0, 1], [0, 1]]


def test_evaluation_errors():
    table = two_class_table()
    truth = [equator_user("u0", 10)]
    with pytest.raises(ValidationError, match="7"):
        evaluate([7], truth, table)
    with pytest.raises(ValidationError):
        evaluate([0, 0], truth, table)
    with pytest.raises(ManifestError, match="Z"):
        evaluate([0], [equator_user("u1", 10, label="Z")], table)
    with pytest.raises(ManifestError):
        encode_labels([equator_user("u1", 10, label="Z")], table)


def test_empty_split_report():
    report = evaluate([], [], two_class_table())
    assert report.n_users == 0
    assert "Users:        0" in format_report(report)


@pytest.mark.parametrize("label,region", [
    ("NY", "Northeast"), ("ca", "West"), ("Texas", "South"), ("new hampshire", "Northeast"),
    ("OH", "Midwest"), ("Atlantis", None), ("XX", None),
])
def test_state_to_region(label, region):
    assert state_to_region(label) == region


def test_class_table_csv(tmp_path):
    table = two_class_table()
    path = tmp_path / "class_table.csv"
    write_class_table(table, path)
    assert path.read_text().splitlines()[0] == "class,label,lon,lat,count"
    assert read_class_table(path) == table

    with pytest.raises(ValidationError):
        read_class_table(tmp_path / "absent.csv")


def test_centroids_lie_within_their_class():
    rng = random.Random(9)
    docs = [
        make_doc(f"u{i}", lat=rng.uniform(-60, 60), lon=rng.uniform(-170, 170), label=rng.choice("ABC"))
        for i in range(60)
    ]
    table = build_class_table(docs)
    for cls in table.classes:
        members = [d for d in docs if d.gt_label == cls.label]
        lats = [d.gt_latitude for d in members]
        lons = [d.gt_longitude for d in members]
        assert min(lats) <= cls.centroid_latitude <= max(lats)
        assert min(lons) <= cls.centroid_longitude <= max(lons)
        assert cls.train_count == len(members)
