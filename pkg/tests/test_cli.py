import json
import subprocess
import sys

import networkx as nx
import pytest

from shapevis.cli import main, read_config_file


@pytest.fixture(scope="module")
def blob_csv(tmp_path_factory):
    p = tmp_path_factory.mktemp("cli") / "blobs.csv"
    assert main(["gen", "blobs", "--n", "400", "--d", "8", "--seed", "1", "--out", str(p)]) == 0
    return p


def test_gen_then_run_json(blob_csv, tmp_path):
    out = tmp_path / "g.json"
    rep = tmp_path / "r.json"
    code = main(["run", "--input", str(blob_csv), "--label-col", "8", "--beta", "100",
                 "--out", str(out), "--report", str(rep)])
    assert code == 0
    g = json.loads(out.read_text())
    assert {"nodes", "edges", "point_nodes"} <= set(g)
    assert json.loads(rep.read_text())["n"] == 400


def test_run_graphml_by_suffix(blob_csv, tmp_path):
    out = tmp_path / "g.graphml"
    assert main(["run", "--input", str(blob_csv), "--beta", "50", "--out", str(out)]) == 0
    assert nx.read_graphml(out).number_of_nodes() >= 1


def test_run_dot_and_weights(blob_csv, tmp_path):
    out = tmp_path / "g.dot"
    w = tmp_path / "w.txt"
    assert main(["run", "--input", str(blob_csv), "--beta", "50", "--tearing", "none",
                 "--out", str(out), "--dump-weights", str(w)]) == 0
    assert out.read_text().startswith("graph")
    assert all(len(line.split()) == 3 for line in w.read_text().splitlines())


def test_config_file_and_override(blob_csv, tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\nbeta = 40\nk = 6\ntearing = all\n")
    assert read_config_file(cfg) == {"beta": "40", "k": "6", "tearing": "all"}
    assert main(["run", "--input", str(blob_csv), "--config", str(cfg), "--beta", "30"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["walks"] == 30 * rep["landmarks"]


def test_metrics_command(blob_csv, tmp_path, capsys):
    out = tmp_path / "g.json"
    main(["run", "--input", str(blob_csv), "--label-col", "8", "--beta", "50", "--out", str(out)])
    capsys.readouterr()
    assert main(["metrics", "--graph", str(out), "--points", str(blob_csv), "--label-col", "8"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert -1 <= rep["avg_intra_segment_cosine"] <= 1


def test_missing_input_exits_1(tmp_path, capsys):
    assert main(["run", "--input", str(tmp_path / "nope.csv")]) == 1
    assert "nope.csv" in capsys.readouterr().err


def test_malformed_csv_exits_1(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("1,2\n3\n")
    assert main(["run", "--input", str(p)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_bad_flag_exits_2():
    with pytest.raises(SystemExit) as e:
        main(["run", "--input", "x.csv", "--tearing", "sometimes"])
    assert e.value.code == 2


def test_module_entry_point(tmp_path):
    p = tmp_path / "s.bin"
    r = subprocess.run([sys.executable, "-m", "shapevis.cli", "gen", "sphere", "--n", "50",
                        "--d", "3", "--out", str(p)], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert p.stat().st_size > 0
