import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from frustration import cli, gaussian, spin
from frustration.marginals import (
    Edge,
    MarginalScenario,
    Infeasible,
    tree_extend,
    verify_witness,
    witness_from_dict,
)
from frustration.probability import DistTable, ObservableDecl, marginalize
from importlib import resources


def bundled(name):
    return MarginalScenario.from_dict(json.loads((resources.files("frustration") / "data" / f"{name}.json").read_text()))


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    lines = path.read_text().splitlines()
    body = [ln for ln in lines if not ln.startswith("#")]
    rows = list(csv.reader(body))
    return rows[0], rows[1:], [ln[2:] for ln in lines if ln.startswith("#")]


# --- bell-check -------------------------------------------------------------

def test_triangle_infeasible(capsys):
    code, out, err = run(["bell-check", "triangle"], capsys)
    assert code == cli.EXIT_INFEASIBLE
    sc = bundled("triangle")
    w = witness_from_dict(json.loads(out), sc)
    assert isinstance(w, Infeasible) and verify_witness(w, sc)
    assert "infeasible" in err


def test_path_feasible_matches_tree(capsys):
    code, out, _ = run(["bell-check", "path"], capsys)
    assert code == cli.EXIT_OK
    data = json.loads(out)
    joint = DistTable.from_dict(data["joint"])
    sc = bundled("path")
    tree = tree_extend(sc)
    for e in sc.edges:
        assert marginalize(joint, [e.i, e.j]).allclose(marginalize(tree, [e.i, e.j]), 1e-7)


def test_chsh_singlet_infeasible(capsys):
    code, out, _ = run(["bell-check", "chsh_singlet"], capsys)
    assert code == cli.EXIT_INFEASIBLE
    assert json.loads(out)["value"] > 1.0


def test_bell_check_file_and_out(tmp_path, capsys):
    src = tmp_path / "s.json"
    src.write_text(json.dumps(bundled("triangle").to_dict()))
    out = tmp_path / "w.json"
    code, stdout, _ = run(["bell-check", str(src), "--out", str(out)], capsys)
    assert code == 3 and stdout == ""
    assert json.loads(out.read_text())["feasible"] is False


@pytest.mark.parametrize("payload", ["not json", '{"observables": []}', '{"observables": [{"id": "a", "k": 2}], '
                                     '"edges": [{"i": "a", "j": "b", "table": {}}]}'])
def test_malformed_input(tmp_path, capsys, payload):
    src = tmp_path / "bad.json"
    src.write_text(payload)
    code, _, err = run(["bell-check", str(src)], capsys)
    assert code == cli.EXIT_INPUT
    assert err.startswith("error:")


def test_missing_file(capsys):
    assert run(["bell-check", "/nonexistent/x.json"], capsys)[0] == cli.EXIT_INPUT


def test_size_cap(tmp_path, capsys):
    obs = [ObservableDecl(f"b{i}", 2) for i in range(17)]
    flat = np.full((2, 2), 0.25)
    sc = MarginalScenario(tuple(obs), tuple(Edge(obs[i].id, obs[i + 1].id, DistTable((obs[i], obs[i + 1]), flat))
                                            for i in range(16)))
    src = tmp_path / "big.json"
    src.write_text(json.dumps(sc.to_dict()))
    assert run(["bell-check", str(src)], capsys)[0] == cli.EXIT_CAP


def test_bad_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["gaussian-scan", "--family", "moebius"])
    assert exc.value.code == 2


# --- scans --------------------------------------------------------------------

def test_gaussian_ring_scan(tmp_path, capsys):
    out = tmp_path / "ring.csv"
    assert run(["gaussian-scan", "--family", "ring", "--n-min", "3", "--n-max", "50", "--out", str(out)], capsys)[0] == 0
    header, rows, notes = read_csv(out)
    assert tuple(header) == gaussian.CSV_HEADER
    assert len(rows) == 48
    eof = [float(r[4]) for r in rows]
    assert all(abs(e - 0.2984) < 0.01 for e in eof[-2:])
    assert any(n.startswith("ring_limit") for n in notes)
    assert any("0.29" in n for n in notes if n.startswith("qubit_chain_reference"))
    # parsed rows satisfy the module invariants
    parsed = gaussian.read_curve_csv(out.open())
    for r in parsed:
        assert r.vq == r.vp
        assert r.eof == pytest.approx(gaussian.eof_symmetric(r.delta), rel=1e-10)


def test_gaussian_cluster_scan_scaling(tmp_path, capsys):
    out = tmp_path / "cluster.csv"
    assert run(["gaussian-scan", "--family", "cluster", "--n-min", "3", "--n-max", "200", "--out", str(out)],
               capsys)[0] == 0
    rows = gaussian.read_curve_csv(out.open())
    assert [r.N for r in rows] == list(range(3, 201))
    scaled = [r.eof * r.N**2 / math.log2(r.N) for r in rows if r.N >= 100]
    assert max(scaled) / min(scaled) < 1.1
    for r in rows:
        assert r.delta == pytest.approx(gaussian.complete_delta(r.N), abs=1e-10)


def test_gaussian_platonic_scan(tmp_path, capsys):
    out = tmp_path / "p.csv"
    assert run(["gaussian-scan", "--family", "platonic", "--out", str(out)], capsys)[0] == 0
    assert [r.N for r in gaussian.read_curve_csv(out.open())] == [4, 6, 8, 12, 20]


def test_gaussian_scan_needs_range(capsys):
    assert run(["gaussian-scan", "--family", "ring"], capsys)[0] == cli.EXIT_INPUT


def test_spin_scan(tmp_path, capsys):
    out = tmp_path / "spin.csv"
    assert run(["spin-scan", "--rings", "3..12", "--out", str(out)], capsys)[0] == 0
    header, rows, notes = read_csv(out)
    assert header == ["N", "f_max"]
    f = {int(n): float(v) for n, v in rows}
    assert f[3] == pytest.approx(0.5, abs=1e-10) and f[4] == pytest.approx(0.75, abs=1e-10)
    even = next(n for n in notes if n.startswith("f_inf_even"))
    f_inf = float(even.split()[0].split("=")[1])
    assert abs(f_inf - math.log(2)) < 0.01


def test_spin_scan_cap(capsys):
    code, _, err = run(["spin-scan", "--rings", "3..15"], capsys)
    assert code == cli.EXIT_CAP and "15" in err


def test_cluster_compare(tmp_path, capsys):
    out = tmp_path / "cmp.csv"
    assert run(["cluster-compare", "--n-max", "20", "--out", str(out)], capsys)[0] == 0
    header, rows, _ = read_csv(out)
    assert header == ["N", "eof_qubit", "eof_gaussian"]
    by_n = {int(r[0]): r for r in rows}
    assert float(by_n[2][1]) == 1.0 and by_n[2][2] == "inf"
    assert float(by_n[3][1]) == pytest.approx(0.5500, abs=5e-4)
    assert float(by_n[3][2]) == pytest.approx(0.4015, abs=2e-4)
    for n in range(3, 21):
        assert float(by_n[n][1]) >= float(by_n[n][2])


def test_qubit_cluster(capsys):
    code, out, _ = run(["qubit-cluster", "--n-max", "4"], capsys)
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["N", "concurrence", "eof"]
    assert float(rows[2][1]) == pytest.approx(2 / 3)


def test_json_format(capsys):
    code, out, _ = run(["--format", "json", "spin-scan", "--rings", "3,4"], capsys)
    data = json.loads(out)
    assert data["columns"] == ["N", "f_max"] and len(data["rows"]) == 2


def test_outputs_are_byte_identical(tmp_path, capsys):
    for argv in (["gaussian-scan", "--family", "tri", "--n-min", "3", "--n-max", "4"],
                 ["cluster-compare", "--n-max", "6", "--confirm-upto", "3", "--restarts", "1"],
                 ["spin-scan", "--rings", "3..8"]):
        a, b = tmp_path / "a.out", tmp_path / "b.out"
        run(argv + ["--out", str(a)], capsys)
        run(argv + ["--out", str(b)], capsys)
        assert a.read_bytes() == b.read_bytes()


def test_seed_sources(monkeypatch, capsys):
    _, out, _ = run(["cluster-compare", "--n-max", "3", "--confirm-upto", "3", "--restarts", "1"], capsys)
    assert f"seed={cli.DEFAULT_SEED}" in out
    monkeypatch.setenv(cli.SEED_ENV, "7")
    _, out, _ = run(["cluster-compare", "--n-max", "3", "--confirm-upto", "3", "--restarts", "1"], capsys)
    assert "seed=7" in out
    _, out, _ = run(["--seed", "11", "cluster-compare", "--n-max", "3", "--confirm-upto", "3", "--restarts", "1"], capsys)
    assert "seed=11" in out
    c = float(out.split("c=")[1].split()[0])
    assert c == pytest.approx(spin.cluster_concurrence(3), abs=1e-4)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "frustration.cli", "bell-check", "triangle"],
                          capture_output=True, text=True)
    assert proc.returncode == 3
    assert json.loads(proc.stdout)["bound"] == 1.0


def test_gaussian_dense_cap(capsys):
    code, _, err = run(["gaussian-scan", "--family", "tri", "--n-min", "3", "--n-max", "70"], capsys)
    assert code == cli.EXIT_CAP and "4900" in err
