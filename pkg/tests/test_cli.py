import json
import subprocess
import sys

import pytest

from rskgue.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def body(text):
    return [line for line in text.splitlines() if not line.startswith("#")]


def test_rsk_word(capsys):
    code, out, _ = run(capsys, "rsk", "--word", "2,1,1", "--k", "2")
    assert code == 0
    assert body(out) == ["word,shape", "2.1.1,2.1"]


def test_rsk_json_has_tableaux(capsys):
    code, out, _ = run(capsys, "rsk", "--word", "2,1,1", "--format", "json")
    data = json.loads(out)
    assert data["result"][0]["P"] == [[1, 1], [2]]
    assert data["metadata"]["version"] == "0.1.0"


def test_rsk_input_file(tmp_path, capsys):
    f = tmp_path / "words.txt"
    f.write_text("1,2,1\n\n2,2,1\n")
    code, out, _ = run(capsys, "rsk", "--input", str(f))
    assert code == 0
    assert body(out)[1:] == ["1.2.1,2.1", "2.2.1,2.1"]


def test_dist_totals(capsys):
    code, out, _ = run(capsys, "dist", "--k", "2", "--n", "3")
    assert code == 0
    rows = body(out)
    assert rows[0] == "shape,count"
    assert sum(int(r.split(",")[1]) for r in rows[1:]) == 8


def test_every_output_has_metadata(capsys):
    code, out, _ = run(capsys, "variance", "--chain", "C+")
    first = out.splitlines()[0]
    meta = json.loads(first[2:])
    assert meta["version"] == "0.1.0" and meta["seed"] == 20010501
    assert meta["config"]["subcommand"] == "variance"
    assert float(body(out)[1].split(",")[1]) == pytest.approx(3.0)


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("YG_SEED", "77")
    code, out, _ = run(capsys, "gue", "--k", "2", "--trials", "3", "--format", "json")
    assert json.loads(out)["metadata"]["seed"] == 77
    assert json.loads(out)["result"]["seed"] == 77


def test_fig2_byte_identical(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / "fig2.csv"
        assert main(["fig2", "--trials", "1000", "--seed", "7", "--output", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_gue_output_independent_of_threads(capsys):
    _, one, _ = run(capsys, "gue", "--k", "3", "--trials", "40000", "--seed", "3", "--threads", "1")
    _, many, _ = run(capsys, "gue", "--k", "3", "--trials", "40000", "--seed", "3", "--threads", "4")
    assert one == many


def test_fig2_svg(capsys):
    code, out, _ = run(capsys, "fig2", "--trials", "200", "--seed", "1", "--format", "svg")
    assert code == 0
    assert out.startswith("<svg") and "<!--" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["rsk", "--word", "1,3", "--k", "2"],
        ["rsk"],
        ["dist", "--k", "2", "--n", "3", "--bogus"],
        ["nonsense"],
        ["gue", "--k", "1", "--trials", "5"],
        ["cyclic", "--chain", "A", "--n", "30", "--trials", "10"],
        ["variance", "--chain", "Q"],
        ["dist", "--k", "2", "--n", "3", "--format", "svg"],
    ],
)
def test_input_errors_exit_2(argv, capsys):
    assert main(argv) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["casimir", "--k", "2", "--n", "13"],
        ["moments", "--n", "13"],
        ["gue", "--k", "2", "--trials", "100", "--max-trials", "10"],
        ["dist", "--k", "4", "--n", "500", "--max-shapes", "1000"],
        ["residual", "--k", "4", "--n", "500", "--max-shapes", "1000"],
    ],
)
def test_resource_caps_exit_3(argv, capsys):
    assert main(argv) == 3


def test_casimir_and_moments(capsys):
    code, out, _ = run(capsys, "casimir", "--k", "3", "--n", "3")
    assert code == 0
    assert all(float(r.split(",")[1]) < 1e-10 for r in body(out)[1:])
    code, out, _ = run(capsys, "moments", "--n", "4,8")
    rows = body(out)
    assert rows[0] == "monomial,N,exact,wick,abs_diff"
    assert float(rows[1].split(",")[2]) == pytest.approx(1 / 32)


def test_word_law_and_residual_subcommands(capsys):
    code, out, _ = run(capsys, "theorem1", "--k", "2", "--n", "100", "--format", "json")
    assert code == 0
    assert 0.1 < json.loads(out)["result"]["ks"] < 0.12
    code, out, _ = run(capsys, "residual", "--k", "2", "--n", "20,40")
    assert body(out)[0] == "N,k,fitted_C,scaled_sup_residual"
    assert len(body(out)) == 3


def test_cyclic_chain_file(tmp_path, capsys):
    f = tmp_path / "c.json"
    f.write_text('{"k": 2, "entries": [[3, 4], [1, 4], [1, 4], [3, 4]]}')
    code, out, _ = run(capsys, "cyclic", "--chain-file", str(f), "--n", "50", "--trials", "500")
    assert code == 0
    assert any(r.startswith("ks,") for r in body(out))


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rskgue", "dist", "--k", "1", "--n", "4"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert body(proc.stdout) == ["shape,count", "4,1"]
