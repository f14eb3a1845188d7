import json

import numpy as np
import pytest

from conftest import random_bump
from kgm.energy import EnergyMode
from kgm.model import DoublePower, Field, ModelParams, Power, make_grid
from kgm.reports import (
    fmt,
    params_from_dict,
    params_to_dict,
    read_field_csv,
    write_field_csv,
    write_field_json,
    write_trace_csv,
)
from kgm.variational_solver import (
    ContinuationStep,
    ContinuationTrace,
    SolverOptions,
    nehari_descent,
)


def test_fmt_round_trips_doubles():
    for x in (1.0 / 3.0, 2.0 ** -52, 1234.5678901234567, -9.87e-200):
        assert float(fmt(x)) == x


def test_field_csv_round_trip(grid_small, rng, tmp_path):
    u = random_bump(grid_small, rng)
    path = tmp_path / "field.csv"
    write_field_csv(path, u)
    back = read_field_csv(path, grid_small)
    assert np.array_equal(back.values, u.values)
    header = path.read_text().splitlines()[0]
    assert header == "r,value"


def test_field_json_envelope(grid_small, params_p3, rng, tmp_path):
    u = random_bump(grid_small, rng)
    path = tmp_path / "field.json"
    write_field_json(path, u, params_p3)
    doc = json.loads(path.read_text())
    assert doc["n"] == grid_small.n
    assert doc["r_max"] == grid_small.r_max
    assert doc["params"]["m"] == params_p3.m
    assert len(doc["values"]) == grid_small.n


def test_params_dict_round_trip():
    for params in (
        ModelParams(m=1.0, omega=0.5, e=1.0, nonlinearity=Power(3.0)),
        ModelParams(m=1.0, omega=1.0, e=2.0, nonlinearity=DoublePower(5.0, 7.0, 5.0)),
    ):
        assert params_from_dict(params_to_dict(params)) == params


def test_trace_csv_columns(tmp_path):
    grid = make_grid(400, 25.0)
    params = ModelParams(m=1.0, omega=0.5, e=1.0, nonlinearity=Power(3.0))
    opts = SolverOptions(grad_tol=1e-5, max_iters=10000, method="nehari_descent")
    rep = nehari_descent(params, grid, opts, EnergyMode.standard(1.0))
    steps = [
        ContinuationStep(parameter=0.5, report=rep, fprime_mass=1.0),
        ContinuationStep(parameter=1.0, report=rep, fprime_mass=2.0),
    ]
    path = tmp_path / "trace.csv"
    write_trace_csv(path, ContinuationTrace(steps=steps))
    lines = path.read_text().splitlines()
    assert lines[0] == "parameter,energy,d12_u,d12_phi,nehari,pohozaev,fprime_mass"
    assert len(lines) == 3
    assert all(len(line.split(",")) == 7 for line in lines[1:])
