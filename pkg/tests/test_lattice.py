import numpy as np
import pytest

from pathsig.lattice import (CubeLattice, VisitRecord, cube_pieces,
                             is_admissible, locate, save_visit_record,
                             visit_sequence)
from pathsig.paths import from_points, reparametrize

from conftest import random_path, random_reparametrization


@pytest.fixture
def lat():
    return CubeLattice(1.0, 0.1)


def test_lattice_validation():
    with pytest.raises(ValueError):
        CubeLattice(1.0, 1.0)
    with pytest.raises(ValueError):
        CubeLattice(1.0, 0.0)
    with pytest.raises(ValueError):
        CubeLattice(1.0, 1.5)


def test_locate_examples(lat):
    assert locate([0.0, 0.0], lat) == (0, 0)
    assert locate([2.0, -3.0], lat) == (2, -3)  # any lattice center
    assert locate([0.5, 0.0], lat) is None  # mid-tunnel plane
    # open boundary counts as tunnel: |x - 0| = 0.45 exactly
    assert locate([0.45, 0.0], lat) is None
    assert locate([0.449, 0.0], lat) == (0, 0)


def test_is_admissible():
    assert is_admissible(((0, 0), (1, 0), (0, 0)))
    assert not is_admissible(((1, 0),))  # must start at 0
    assert not is_admissible(((0, 0), (0, 0)))  # consecutive repeat
    assert not is_admissible(())


def test_straight_line_fixture(lat, line_fixture):
    rec = visit_sequence(line_fixture, lat)
    assert rec.word == ((0, 0), (1, 0), (2, 0))
    assert rec.times == (pytest.approx(0.275, abs=1e-12),
                         pytest.approx(0.775, abs=1e-12))
    assert rec.count == 2


def test_tunnel_confined_path(lat):
    # wanders inside the starting cube and the tunnels only
    path = from_points([[0.0, 0.0], [0.4, 0.0], [0.5, 0.3], [0.52, -0.2]])
    rec = visit_sequence(path, lat)
    assert rec.word == ((0, 0),)
    assert rec.count == 0
    assert rec.times == ()


def test_zigzag_revisit_counts(lat):
    # out to the right cube, back, and out again: A -> B -> A -> B
    path = from_points([[0.0, 0.0], [0.8, 0.0], [0.2, 0.0], [0.8, 0.0]])
    rec = visit_sequence(path, lat)
    assert rec.word == ((0, 0), (1, 0), (0, 0), (1, 0))
    assert rec.times == (pytest.approx(11 / 48), pytest.approx(19 / 36),
                         pytest.approx(31 / 36))


def test_reentry_same_cube_does_not_count(lat):
    # leaves cube 0 into the tunnel and comes back without entering another
    path = from_points([[0.0, 0.0], [0.48, 0.0], [0.0, 0.1], [0.0, 0.0]])
    rec = visit_sequence(path, lat)
    assert rec.word == ((0, 0),)


def test_consistency_with_locate(rng, lat):
    path = random_path(rng, 2, 40, box=2.0)
    rec = visit_sequence(path, lat)
    for z, tau in zip(rec.word[1:], rec.times):
        # just after entry the path is in the open cube of the label
        probe = path.at(tau + 1e-9)
        assert locate(probe, lat) == z


def test_reparametrization_covariance(rng):
    lat = CubeLattice(0.5, 0.05)
    path = random_path(rng, 2, 25, box=1.5)
    sigma = random_reparametrization(rng)
    moved = reparametrize(path, sigma)
    a = visit_sequence(path, lat)
    b = visit_sequence(moved, lat)
    assert a.word == b.word
    assert a.times != b.times or sigma(0.5) == 0.5


def test_visit_count_bounded_by_length(rng):
    lat = CubeLattice(0.25, 0.025)
    for _ in range(5):
        path = random_path(rng, 2, 30, box=1.0)
        rec = visit_sequence(path, lat)
        assert rec.count <= path.length() / lat.delta + 1


def test_cube_pieces_partition_is_consistent(rng, lat):
    path = random_path(rng, 2, 15, box=1.5)
    pieces = cube_pieces(path, lat)
    last_end = 0.0
    for seg, a, b, z in pieces:
        assert a < b
        assert a >= last_end - 1e-12  # time ordered, disjoint
        last_end = a
        mid = path.at(0.5 * (a + b))
        assert locate(mid, lat) == z


def test_visit_record_validation_and_json(tmp_path):
    rec = VisitRecord(((0, 0), (1, 0)), (0.5,))
    save_visit_record(rec, tmp_path / "v.json")
    import json
    data = json.loads((tmp_path / "v.json").read_text())
    assert VisitRecord.from_json(data) == rec
    with pytest.raises(ValueError):
        VisitRecord(((0, 0), (1, 0)), ())
    with pytest.raises(ValueError):
        VisitRecord(((0, 0), (1, 0), (2, 0)), (0.7, 0.3))
    with pytest.raises(ValueError):
        VisitRecord(((1, 0),), ())


def test_path_must_start_in_origin_cube():
    lat = CubeLattice(0.1, 0.09)  # tiny cubes, wide tunnels
    path = from_points([[0.0, 0.0], [1.0, 1.0]])
    rec = visit_sequence(path, lat)  # origin is the cube center, still fine
    assert rec.word[0] == (0, 0)
