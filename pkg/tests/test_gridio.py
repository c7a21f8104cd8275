import json

import numpy as np
import pytest

from koopfreq import GridData, InvalidInputError, read_grid, write_grid
from koopfreq.errors import ParseError
from koopfreq.gridio import grid_binary_path


def make_grid(seed=0, nt=50, ny=3, nx=4, dt=0.5):
    rng = np.random.default_rng(seed)
    return GridData(values=rng.standard_normal((nt, ny, nx)), dt=dt)


def test_round_trip(tmp_path):
    grid = make_grid()
    header = tmp_path / "field.json"
    binary = write_grid(grid, header)
    assert binary == tmp_path / "field.bin"
    back = read_grid(header)
    assert back.dt == grid.dt
    assert np.array_equal(back.values, grid.values)


def test_layout_is_t_major_on_disk(tmp_path):
    grid = make_grid(nt=2, ny=2, nx=2)
    header = tmp_path / "field.json"
    binary = write_grid(grid, header)
    raw = np.frombuffer(binary.read_bytes(), dtype="<f8")
    # [t][iy][ix] order: the second value on disk is (t=0, iy=0, ix=1)
    assert raw[1] == grid.values[0, 0, 1]
    assert raw[2] == grid.values[0, 1, 0]
    assert raw[4] == grid.values[1, 0, 0]


def test_header_field_errors_name_the_field(tmp_path):
    grid = make_grid()
    header = tmp_path / "field.json"
    write_grid(grid, header)
    meta = json.loads(header.read_text())

    meta_bad = dict(meta, ny="three")
    header.write_text(json.dumps(meta_bad))
    with pytest.raises(ParseError, match="'ny'"):
        read_grid(header)

    meta_bad = dict(meta, layout="x-major")
    header.write_text(json.dumps(meta_bad))
    with pytest.raises(ParseError, match="'layout'"):
        read_grid(header)


def test_size_mismatch_rejected(tmp_path):
    grid = make_grid()
    header = tmp_path / "field.json"
    binary = write_grid(grid, header)
    binary.write_bytes(binary.read_bytes()[:-8])
    with pytest.raises(ParseError, match="expected"):
        read_grid(header)


def test_missing_binary(tmp_path):
    grid = make_grid()
    header = tmp_path / "field.json"
    write_grid(grid, header)
    grid_binary_path(header).unlink()
    with pytest.raises(ParseError, match="not found"):
        read_grid(header)


def test_grid_data_validation():
    with pytest.raises(InvalidInputError):
        GridData(values=np.zeros((4, 4)))
    with pytest.raises(InvalidInputError):
        GridData(values=np.zeros((4, 4, 4)), dt=0.0)


def test_cell_access():
    grid = make_grid()
    assert np.array_equal(grid.cell(2, 1), grid.values[:, 1, 2])
