import csv
import json
from pathlib import Path

import numpy as np
import pytest

from looptoda.export import columns, export_grid, read_grid_csv
from looptoda.harness import GridSpec, sample_field
from looptoda.model import CoordinateMode, build_system, vacuum_field
from looptoda.solitons import gamma_one_soliton

from conftest import spot_data


def test_single_point_row_count(tmp_path):
    grid = sample_field(vacuum_field(build_system(2, 1)), GridSpec(nx=1, nt=1))
    export_grid(grid, tmp_path / "g.csv")
    lines = (tmp_path / "g.csv").read_text().splitlines()
    assert lines[0] == "alpha,z_plus_re,z_minus_re,block_row,block_col,re,im,valid"
    assert len(lines) == 3


def test_physical_mode_headers():
    assert columns(CoordinateMode.EUCLIDEAN)[1:3] == ["x", "t"]
    assert columns(CoordinateMode.LORENTZIAN)[1:3] == ["x", "t"]


def test_csv_round_trip_bit_exact(tmp_path, soliton_factory):
    d = soliton_factory(3, 2, 1)
    grid = sample_field(gamma_one_soliton(d), GridSpec(CoordinateMode.EUCLIDEAN, nx=3, nt=4))
    export_grid(grid, tmp_path / "g.csv")
    back = read_grid_csv(tmp_path / "g.csv")
    vals = grid.values  # (p, nx, nt, n, n) in the same order as the rows
    assert np.array_equal(back["re"], vals.real.ravel())
    assert np.array_equal(back["im"], vals.imag.ravel())
    assert len(back["alpha"]) == 3 * 3 * 4 * 4


def test_validity_column(tmp_path):
    import sys
    sys.path.insert(0, str(Path(__file__).parent))
    from test_harness import blowup_data
    d, zc = blowup_data()
    grid = sample_field(gamma_one_soliton(d), GridSpec(x_range=(zc - 1, zc), t_range=(0, 0), nx=3, nt=1))
    export_grid(grid, tmp_path / "g.csv")
    back = read_grid_csv(tmp_path / "g.csv")
    invalid = ~back["valid"]
    assert invalid.sum() == 2 and np.all(back["z_plus_re"][invalid] == zc)
    assert np.all(np.isnan(back["re"][invalid]))


def test_json_mirrors_csv(tmp_path):
    grid = sample_field(gamma_one_soliton(spot_data()), GridSpec(nx=2, nt=2))
    export_grid(grid, tmp_path / "g.json", "json")
    export_grid(grid, tmp_path / "g.csv", "csv")
    doc = json.loads((tmp_path / "g.json").read_text())
    with open(tmp_path / "g.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert doc["columns"] == list(rows[0].keys())
    assert len(doc["rows"]) == len(rows)
    for jr, cr in zip(doc["rows"], rows):
        assert jr["re"] == float(cr["re"]) and jr["im"] == float(cr["im"])


def test_unknown_format(tmp_path):
    grid = sample_field(vacuum_field(build_system(2, 1)), GridSpec(nx=1, nt=1))
    with pytest.raises(ValueError):
        export_grid(grid, tmp_path / "g.xml", "xml")


def test_failed_write_leaves_no_partial_file(tmp_path):
    grid = sample_field(vacuum_field(build_system(2, 1)), GridSpec(nx=1, nt=1))
    with pytest.raises(OSError):
        export_grid(grid, tmp_path / "missing" / "g.csv")
    assert not list(tmp_path.iterdir())
