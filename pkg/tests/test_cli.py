import io
import json
import subprocess
import sys

import numpy as np
import pytest

from modlp import campaign as camp
from modlp.cli import main
from modlp.io import (
    FileFormatError,
    MatrixFile,
    dumps,
    loads,
    read_matrix_file,
    write_matrix_file,
)
from modlp.matrix import ginibre, random_state
from modlp.weighted_lp import am_norm, am_polar

from conftest import matrix_unit


def run(argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


def table(text):
    lines = text.strip().splitlines()
    return lines[0].split("\t"), [line.split("\t") for line in lines[1:]]


def write(path, kind, data, **kw):
    mf = MatrixFile(kind, np.asarray(data[0] if kind == "channel" else data).shape[1], data, **kw)
    write_matrix_file(path, mf)
    return path


@pytest.fixture
def files(tmp_path):
    f = {
        "e11": write(tmp_path / "e11.json", "state", matrix_unit(2, 0, 0)),
        "e22": write(tmp_path / "e22.json", "state", matrix_unit(2, 1, 1)),
        "half": write(tmp_path / "half.json", "state", np.eye(2) / 2),
        "diag": write(tmp_path / "diag.json", "functional", np.diag([1 / 3, 2 / 3])),
        "proj": write(tmp_path / "proj.json", "matrix", np.diag([1.0, 0.0])),
        "rank1": write(tmp_path / "rank1.json", "functional", np.diag([1.0, 0.0])),
        "k": write(tmp_path / "k.json", "matrix", ginibre(2, seed=1)),
        "rho": write(tmp_path / "rho.json", "state", random_state(2, seed=2).density),
    }
    return f


# file format -----------------------------------------------------------------

def test_round_trip_bit_identical(tmp_path):
    rng = np.random.default_rng(3)
    for kind, data in [("matrix", ginibre(3, seed=rng)),
                       ("state", random_state(3, rng).density),
                       ("functional", 7.25 * random_state(2, rng).density)]:
        path = tmp_path / f"{kind}.json"
        write_matrix_file(path, MatrixFile(kind, data.shape[0], data))
        back = read_matrix_file(path)
        assert back.kind == kind
        assert np.array_equal(back.data, data)
        assert dumps(back) == path.read_text(encoding="utf-8")


def test_round_trip_channel(tmp_path):
    from modlp.channels import random_channel
    ch = random_channel(3, 2, seed=4)
    path = tmp_path / "ch.json"
    write_matrix_file(path, MatrixFile("channel", 3, list(ch.kraus_ops), dim_out=2))
    back = read_matrix_file(path)
    assert back.dim_out == 2
    assert all(np.array_equal(a, b) for a, b in zip(back.data, ch.kraus_ops))


def test_format_is_re_im_pairs():
    doc = json.loads(dumps(MatrixFile("matrix", 1, np.array([[1.5 - 2j]]))))
    assert doc == {"kind": "matrix", "dim": 1, "data": [[[1.5, -2.0]]]}


@pytest.mark.parametrize("doc", [
    "not json",
    '{"kind": "tensor", "dim": 1, "data": [[[1, 0]]]}',
    '{"kind": "matrix", "dim": 2, "data": [[[1, 0]]]}',
    '{"kind": "matrix", "dim": 0, "data": []}',
    '{"kind": "matrix", "dim": 1}',
    '{"kind": "state", "dim": 1, "data": [[[0.5, 0]]]}',
    '{"kind": "state", "dim": 2, "data": [[[1, 0], [0, 0]], [[0, 0], [-0.5, 0]]]}',
    '{"kind": "channel", "dim": 1, "dim_out": 1, "data": [[[[0.5, 0]]]]}',
])
def test_load_rejects(doc):
    with pytest.raises(FileFormatError):
        loads(doc)


def test_state_trace_tolerance():
    near = '{"kind": "state", "dim": 1, "data": [[[1.0000000001, 0]]]}'
    assert loads(near).data[0, 0] == 1.0000000001


# divergence ------------------------------------------------------------------

def test_divergence_log2(files):
    code, out = run(["divergence", files["e11"], files["half"], "--alpha", "0.75,2,inf"])
    assert code == 0
    header, rows = table(out)
    assert header == ["alpha", "value_nats", "route"]
    assert [r[0] for r in rows] == ["0.75", "2", "inf"]
    for r in rows:
        assert float(r[1]) == pytest.approx(np.log(2), abs=1e-12)
        assert round(float(r[1]), 6) == 0.693147


def test_divergence_same_file_zero(files):
    code, out = run(["divergence", files["rho"], files["rho"], "--alpha", "2"])
    assert code == 0
    assert abs(float(table(out)[1][0][1])) <= 1e-12


def test_divergence_bits(files):
    _, out = run(["divergence", files["e11"], files["half"], "--alpha", "2", "--bits"])
    header, rows = table(out)
    assert header[1] == "value_bits"
    assert float(rows[0][1]) == pytest.approx(1.0, abs=1e-12)


def test_divergence_disjoint_inf(files):
    code, out = run(["divergence", files["e11"], files["e22"], "--alpha", "2"])
    assert code == 0
    assert table(out)[1][0][1] == "inf"


def test_divergence_route_both(files):
    code, out = run(["divergence", files["rho"], files["half"], "--alpha", "0.6,3,inf", "--route", "both"])
    assert code == 0
    header, rows = table(out)
    assert header == ["alpha", "trace_formula_nats", "norm_route_nats", "abs_diff"]
    for r in rows:
        assert float(r[3]) <= 1e-9
        assert abs(float(r[1]) - float(r[2])) == pytest.approx(float(r[3]), abs=1e-15)


def test_divergence_route_both_infinite(files):
    _, out = run(["divergence", files["e11"], files["e22"], "--alpha", "2", "--route", "both"])
    assert table(out)[1][0][1:] == ["inf", "inf", "0"]


@pytest.mark.parametrize("alpha", ["1", "0.3", "abc", "1/0"])
def test_divergence_bad_alpha_exit3(files, alpha):
    code, _ = run(["divergence", files["e11"], files["half"], "--alpha", alpha])
    assert code == 3


def test_divergence_bad_file_exit2(files, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{", encoding="utf-8")
    assert run(["divergence", bad, files["half"], "--alpha", "2"])[0] == 2
    assert run(["divergence", tmp_path / "missing.json", files["half"], "--alpha", "2"])[0] == 2
    assert run(["divergence", files["k"], files["half"], "--alpha", "2"])[0] == 2


# norm ------------------------------------------------------------------------

def test_norm_am_p2_frobenius(files):
    k = read_matrix_file(files["k"]).data
    code, out = run(["norm", files["k"], files["rho"], "--p", "2"])
    assert code == 0
    assert float(table(out)[0][1]) == pytest.approx(np.linalg.norm(k), rel=1e-14)


def test_norm_bst_diagonal(files):
    code, out = run(["norm", files["proj"], files["diag"], "--p", "4/3", "--kind", "bst"])
    assert code == 0
    name, value = out.strip().split("\t")
    assert name == "bst_norm"
    assert float(value) == pytest.approx((1 / 3) ** 0.25, rel=1e-14)
    assert value.startswith("0.759835")


def test_norm_kosaki(files):
    code, out = run(["norm", files["rho"], files["rho"], "--p", "3", "--kind", "kosaki"])
    assert code == 0 and float(out.split("\t")[1]) == pytest.approx(1.0, rel=1e-12)


def test_norm_variational(files):
    k = read_matrix_file(files["k"]).data
    phi = read_matrix_file(files["rho"]).data
    code, out = run(["norm", files["k"], files["rho"], "--p", "4", "--variational-budget", "5000"])
    assert code == 0
    lines = [line.split("\t") for line in out.strip().splitlines()]
    assert lines[1][0] == "variational_lower"
    closed = am_norm(k, phi, 4)
    assert float(lines[0][1]) == pytest.approx(closed, rel=1e-14)
    assert closed * (1 - 1e-3) <= float(lines[1][1]) <= closed * (1 + 1e-8)


def test_norm_variational_seed_env(files, monkeypatch):
    argv = ["norm", files["k"], files["rho"], "--p", "3", "--variational-budget", "600"]
    monkeypatch.setenv("MODLP_SEED", "11")
    a = run(argv)[1]
    b = run(argv + ["--seed", "11"])[1]
    assert a == b


def test_norm_not_faithful_exit4(files):
    assert run(["norm", files["k"], files["rank1"], "--p", "3"])[0] == 4


def test_norm_bad_exponent_exit3(files):
    assert run(["norm", files["k"], files["rho"], "--p", "0.5"])[0] == 3
    assert run(["norm", files["k"], files["rho"], "--p", "x"])[0] == 3


def test_norm_kosaki_variational_exit2(files):
    argv = ["norm", files["k"], files["rho"], "--p", "3", "--kind", "kosaki", "--variational-budget", "10"]
    assert run(argv)[0] == 2


# polar / witness -------------------------------------------------------------

def test_polar_dump(files, tmp_path):
    out_path = tmp_path / "polar.json"
    code, _ = run(["polar", files["k"], files["rho"], "--p", "3", "--out", out_path])
    assert code == 0
    doc = json.loads(out_path.read_text(encoding="utf-8"))
    assert doc["kind"] == "am_polar" and doc["p"] == 3.0
    k = read_matrix_file(files["k"]).data
    dec = am_polar(k, read_matrix_file(files["rho"]).data, 3)
    u = np.array(doc["u"])[..., 0] + 1j * np.array(doc["u"])[..., 1]
    assert np.array_equal(u, dec.u.matrix)
    assert doc["norm"] == pytest.approx(am_norm(k, read_matrix_file(files["rho"]).data, 3), rel=1e-12)


def test_polar_stdout(files):
    code, out = run(["polar", files["k"], files["rho"], "--p", "4/3"])
    assert code == 0 and json.loads(out)["dim"] == 2


def test_witness_sweep(files, tmp_path):
    k = write(tmp_path / "wk.json", "matrix", ginibre(2, seed=5))
    code, out = run(["witness", k, files["rank1"], "--p", "1.5", "--eps", "0.25,0.5"])
    assert code == 0
    header, rows = table(out)
    assert header == ["eps", "value", "bst_norm", "ratio"]
    for r in rows:
        eps = float(r[0])
        assert float(r[3]) == pytest.approx(eps ** (0.5 - 1 / 1.5), rel=1e-10)


# campaign --------------------------------------------------------------------

def _config(tmp_path, **kw):
    cfg = {"seed": 7, "trials": 4, "dims": [2, 3], "alpha_grid": [0.75, 2, "inf"],
           "channel_family": "random_stinespring"}
    cfg.update(kw)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return path


def test_campaign_columns_and_determinism(tmp_path):
    cfg = _config(tmp_path)
    code, out = run(["campaign", cfg, tmp_path / "a.csv"])
    assert code == 0
    run(["campaign", cfg, tmp_path / "b.csv"])
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes()
    header = a.decode().splitlines()[0].split(",")
    assert header == ["trial", "seed", "d_in", "d_out", "family", "alpha", "d_in_div",
                      "d_out_div", "gap", "petz_err_psi", "petz_err_phi", "sufficient", "violation"]
    assert len(a.decode().splitlines()) == 1 + 4 * 3
    summary = dict(line.split("\t") for line in out.strip().splitlines())
    assert summary["violations"] == "0" and summary["rows"] == "12"


def test_campaign_unitary_all_sufficient(tmp_path):
    cfg = _config(tmp_path, channel_family="unitary", alpha_grid=[0.6, 0.75, 0.9])
    code, _ = run(["campaign", cfg, tmp_path / "u.csv"])
    assert code == 0
    _, *rows = (tmp_path / "u.csv").read_text().splitlines()
    for r in rows:
        fields = r.split(",")
        assert abs(float(fields[8])) <= 1e-8 and fields[11] == "true"


def test_campaign_depolarizing_none_sufficient(tmp_path):
    cfg = _config(tmp_path, channel_family="depolarizing", alpha_grid=[0.75, 2])
    code, _ = run(["campaign", cfg, tmp_path / "d.csv"])
    assert code == 0
    _, *rows = (tmp_path / "d.csv").read_text().splitlines()
    for r in rows:
        fields = r.split(",")
        assert float(fields[8]) > 0 and fields[11] == "false"


def test_campaign_seed_env_override(tmp_path, monkeypatch):
    cfg = _config(tmp_path, trials=2)
    run(["campaign", cfg, tmp_path / "a.csv"])
    monkeypatch.setenv("MODLP_SEED", "8")
    run(["campaign", cfg, tmp_path / "b.csv"])
    cfg8 = _config(tmp_path, trials=2, seed=8)
    monkeypatch.delenv("MODLP_SEED")
    run(["campaign", cfg8, tmp_path / "c.csv"])
    assert (tmp_path / "a.csv").read_bytes() != (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "b.csv").read_bytes() == (tmp_path / "c.csv").read_bytes()


def test_campaign_violation_exit5(tmp_path, monkeypatch):
    monkeypatch.setattr(camp, "row_violation", lambda *a: True)
    code, out = run(["campaign", _config(tmp_path, trials=1), tmp_path / "v.csv"])
    assert code == 5
    assert "violations\t3" in out


@pytest.mark.parametrize("bad", [
    {"trials": 0}, {"dims": []}, {"alpha_grid": [1]}, {"alpha_grid": [0.2]},
    {"channel_family": "amplitude"}, {"seed": -1},
])
def test_campaign_bad_config(tmp_path, bad):
    code, _ = run(["campaign", _config(tmp_path, **bad), tmp_path / "x.csv"])
    assert code in (2, 3)
    if "alpha_grid" in bad:
        assert code == 3


def test_campaign_missing_config(tmp_path):
    assert run(["campaign", tmp_path / "nope.json", tmp_path / "x.csv"])[0] == 2


def test_row_violation_rules():
    assert camp.row_violation(2.0, -1e-6, False, 1e-8)
    assert camp.row_violation(2.0, 1e-3, True, 1e-8)
    assert camp.row_violation(0.75, 1e-10, False, 1e-8)
    assert not camp.row_violation(2.0, 1e-10, False, 1e-8)
    assert not camp.row_violation(0.75, 1e-3, False, 1e-8)
    assert not camp.row_violation(0.75, float("nan"), False, 1e-8)


def test_format_value():
    assert camp.format_value(0.1) == "0.10000000000000001"
    assert camp.format_value(float("inf")) == "inf"
    assert camp.format_value(True) == "true"
    assert camp.format_value(np.int64(3)) == "3"


# entry point -----------------------------------------------------------------

def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "modlp.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("divergence", "norm", "campaign", "polar", "witness"):
        assert cmd in res.stdout


def test_argparse_error_exit2():
    res = subprocess.run([sys.executable, "-m", "modlp.cli", "norm"], capture_output=True, text=True)
    assert res.returncode == 2
