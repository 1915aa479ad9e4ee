"""File formats and the command-line interface."""

import json

import numpy as np
import pytest

from cubicochain import io
from cubicochain.cli import chain_from_csv, chain_to_csv, main
from cubicochain.cochains import DiscreteForm, upper_norm_density
from cubicochain.fixtures import solid_cube, square_cycle
from cubicochain.grid import GridDomain

from .conftest import random_chain


@pytest.fixture
def files(tmp_path):
    d = GridDomain.box([8, 8], 0.25)
    T = square_cycle(d, (2, 2), 3)
    S = solid_cube(d, 2, 3, (2, 2))
    io.save_chain(tmp_path / "T.json", T)
    io.save_chain(tmp_path / "S.json", S)
    io.save_chain(tmp_path / "T2.json", square_cycle(d, (1, 1), 5))
    w = DiscreteForm.from_function(d, 1, lambda b, m: np.sin(3 * b[:, 0]) * m[:, 1] + b[:, 1] * m[:, 0])
    io.write_json(tmp_path / "w.json", io.form_to_dict(w))
    small = upper_norm_density(w).values * 0.01
    io.write_json(tmp_path / "small.json", io.density_to_dict(d, small))
    io.write_json(tmp_path / "ones.json", io.density_to_dict(d, np.ones(d.cell_shape)))
    return tmp_path, d, T, w


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def test_chain_json_roundtrip(rng, tmp_path):
    d = GridDomain.box([4, 3, 5], 0.5, [-2, 0, 1])
    for m in range(4):
        T = random_chain(d, m, rng)
        io.save_chain(tmp_path / "c.json", T)
        assert io.load_chain(tmp_path / "c.json").equals(T)
        assert chain_from_csv(chain_to_csv(T)).equals(T)


def test_form_and_density_roundtrip(files):
    tmp, d, _, w = files
    w2 = io.load_form(tmp / "w.json")
    np.testing.assert_array_equal(w2.coeff, w.coeff)
    dom, vals = io.load_density(tmp / "ones.json")
    assert dom == d and np.all(vals == 1.0)


@pytest.mark.parametrize(
    "text",
    [
        "{not json",
        '{"n": 2, "h": 1.0, "lo": [0, 0], "hi": [2, 2], "dim": 1}',
        '{"n": 2, "h": 1.0, "lo": [0, 0], "hi": [2, 2], "dim": 1, "cells": [{"base": [5, 5], "axes": [0], "coeff": 1}]}',
        '{"n": 2, "h": 1.0, "lo": [0, 0], "hi": [2, 2], "dim": 1, "cells": [{"base": [0, 0], "axes": [0, 1], "coeff": 1}]}',
    ],
)
def test_malformed_chain_files(tmp_path, text):
    p = tmp_path / "bad.json"
    p.write_text(text)
    with pytest.raises(io.FormatError):
        io.load_chain(p)


def test_cli_flatnorm_fillvol(files, capsys):
    tmp, *_ = files
    code, out = run(capsys, "flatnorm", "--chain", tmp / "T.json")
    assert code == 0
    res = json.loads(out)
    assert res["value"] == pytest.approx(0.5625) and res["gap"] <= 1e-9
    code, out = run(capsys, "flatnorm", "--chain", tmp / "T.json", "--weights", tmp / "ones.json", tmp / "ones.json", "--out", tmp / "r.json")
    assert code == 0 and json.loads((tmp / "r.json").read_text())["value"] == pytest.approx(0.5625)
    code, out = run(capsys, "fillvol", "--chain", tmp / "T.json", "--backend", "simplex")
    assert code == 0 and json.loads(out)["value"] == pytest.approx(0.5625)


def test_cli_modulus_capacity(files, capsys):
    tmp, *_ = files
    code, out = run(capsys, "modulus", "--family", tmp / "T.json", tmp / "T2.json", "--p", 2)
    assert code == 0 and json.loads(out)["kkt_residual"] <= 1e-8
    code, out = run(capsys, "capacity", "--chain", tmp / "T.json", "--fillings", tmp / "S.json", "--p", 2)
    assert code == 0 and json.loads(out)["capacity_lower"] > 1e-8
    code, _ = run(capsys, "capacity", "--chain", tmp / "T2.json", "--fillings", tmp / "S.json", "--p", 2)
    assert code == 2


def test_cli_verify_cochain(files, capsys):
    tmp, *_ = files
    code, out = run(capsys, "verify-cochain", "--form", tmp / "w.json", "--family", tmp / "T.json", tmp / "T2.json", "--fillings", tmp / "S.json")
    assert code == 0 and json.loads(out)["pass"]
    code, out = run(capsys, "verify-cochain", "--form", tmp / "w.json", "--family", tmp / "T2.json", "--upper-norm", tmp / "small.json")
    assert code == 1 and not json.loads(out)["pass"]


def test_cli_convert(files, capsys):
    tmp, *_ = files
    assert main(["convert", "--in", str(tmp / "T.json"), "--out", str(tmp / "T.csv")]) == 0
    assert main(["convert", "--in", str(tmp / "T.csv"), "--out", str(tmp / "T3.json")]) == 0
    assert io.load_chain(tmp / "T3.json").equals(io.load_chain(tmp / "T.json"))
    assert main(["convert", "--in", str(tmp / "T.json"), "--out", str(tmp / "T.txt")]) == 2


def test_cli_experiment(tmp_path, capsys):
    code, out = run(capsys, "experiment", "zerocap", "--out", tmp_path / "z.csv", "--seed", 3)
    assert code == 0
    summary = json.loads(out)
    assert summary["verdict"] == "pass"
    assert (tmp_path / "z.csv").exists() and (tmp_path / "z.summary.json").exists()
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"p": 0.5}))
    assert main(["experiment", "holder", "--config", str(cfg)]) == 2
    assert main(["experiment", "no-such-thing"]) == 2


def test_cli_usage_errors(tmp_path, capsys):
    assert main([]) == 2
    assert main(["flatnorm"]) == 2
    assert main(["flatnorm", "--chain", str(tmp_path / "missing.json")]) == 2
    (tmp_path / "bad.json").write_text("{")
    assert main(["fillvol", "--chain", str(tmp_path / "bad.json")]) == 2
    capsys.readouterr()
