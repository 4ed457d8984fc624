import json
import subprocess
import sys

import pytest

from paratree import cli
from paratree.problems import TargetProblem


@pytest.fixture
def k4(tmp_path):
    p = TargetProblem(n=4, s=1.5, J={(i, j): 1.0 for i in range(4) for j in range(i + 1, 4)})
    path = tmp_path / "k4.json"
    path.write_text(json.dumps(p.to_dict()))
    return path


def run(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = cli.main(argv + ["-o", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_design_tl_complete_graph(k4, tmp_path):
    code, doc = run(["design", str(k4), "--mediator", "tl", "--epsilon", "0.1"], tmp_path)
    assert code == cli.EXIT_OK and doc["report"]["feasible"]
    assert doc["report"]["alpha_o"] == pytest.approx(0.035 * 0.1 / (4 * 1.5 * 5**5))
    assert "f" in doc["hardware"] and "circuit" in doc["hardware"]
    assert len(doc["code_version"]) == 64 and doc["config"]["command"] == "design"


def test_design_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 3,')
    assert cli.main(["design", str(bad)]) == cli.EXIT_USAGE
    assert "line 1" in capsys.readouterr().err


def test_design_epsilon_override(k4, tmp_path):
    assert cli.main(["design", str(k4), "--epsilon", "0.5", "-o", str(tmp_path / "x.json")]) == cli.EXIT_USAGE
    code, doc = run(["design", str(k4), "--epsilon", "0.5", "--allow-nonrigorous"], tmp_path)
    assert code == cli.EXIT_OK and not doc["report"]["rigorous"]


def test_design_infeasible_noise(k4, tmp_path, capsys):
    code, doc = run(["design", str(k4), "--mediator", "lc", "--delta", "0.01"], tmp_path)
    assert code == cli.EXIT_INFEASIBLE and not doc["report"]["feasible"]
    assert "infeasible" in capsys.readouterr().err


def test_design_edges_csv(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("i,j,J\n0,1,0.5\n1,2,-0.5\n2,3,0.25\n0,3,1\n")
    code, doc = run(["design", str(path), "--s", "1.5"], tmp_path)
    assert code == cli.EXIT_OK and doc["problem"]["n"] == 4


def test_verify_fixture(fixtures_dir, tmp_path):
    code, doc = run(["verify", str(fixtures_dir / "design_qubit_n3.json")], tmp_path)
    assert code == cli.EXIT_OK and doc["passed"] and doc["certified"]


def test_verify_alpha_zero(fixtures_dir, tmp_path):
    doc = json.loads((fixtures_dir / "design_qubit_n3.json").read_text())
    doc["alpha"] = 0.0
    path = tmp_path / "d.json"
    path.write_text(json.dumps(doc))
    code, doc = run(["verify", str(path)], tmp_path)
    assert code == cli.EXIT_OK and doc["comparison"]["max_abs_dev"] == 0.0


def test_verify_large_noise_reports_only(fixtures_dir, tmp_path):
    doc = json.loads((fixtures_dir / "design_qubit_n3.json").read_text())
    doc["noise"] = {"delta": 1e-3, "mode": "sampled"}
    path = tmp_path / "d.json"
    path.write_text(json.dumps(doc))
    code, doc = run(["verify", str(path), "--csv", str(tmp_path / "t.csv")], tmp_path)
    assert code == cli.EXIT_OK and doc["warnings"] and not doc["certified"]
    assert (tmp_path / "t.csv").exists()


def test_verify_cap(fixtures_dir, tmp_path, monkeypatch):
    from paratree import linalg
    monkeypatch.setattr(linalg, "DIM_CAP", 16)
    assert cli.main(["verify", str(fixtures_dir / "design_qubit_n3.json")]) == cli.EXIT_RESOURCE


def test_warmup(tmp_path):
    code, doc = run(["warmup"], tmp_path)
    assert code == cli.EXIT_OK and f"{doc['delta_max']:.0e}" == "8e-04"


def test_pegasus_finite_dim(tmp_path):
    code, doc = run(["pegasus40", "--flavor", "finite_dim", "--J", "0.42"], tmp_path)
    r = doc["results"]["finite_dim"]
    assert code == cli.EXIT_OK and r["delta_max"] == pytest.approx(1.1e-5, rel=0.05)


def test_usage_error():
    assert cli.main(["nonsense"]) == cli.EXIT_USAGE


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "paratree", "warmup", "--n", "40"], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["config"]["n"] == 40


COMMANDS = [
    ["design", "{k4}", "--mediator", "qubit"],
    ["verify", "{fixtures}/design_qubit_n3.json"],
    ["warmup"],
    ["pegasus40", "--flavor", "simple_2PV"],
    ["gapscan", "--kmax", "2", "--grid", "51", "--coarse", "3"],
    ["normscale", "--n-list", "6,7,8,9", "--reps", "3"],
    ["normscale", "--n-list", "6,7,8,9", "--reps", "1", "--method", "pt", "--sweeps", "100", "--restarts", "2"],
    ["audit", "--trials", "10"],
]


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: "-".join(a[:2]))
def test_outputs_are_byte_identical(argv, k4, fixtures_dir, tmp_path):
    argv = [a.format(k4=k4, fixtures=fixtures_dir) for a in argv]
    outs = []
    for name in ("a.json", "b.json"):
        assert cli.main(argv + ["-o", str(tmp_path / name)]) == cli.EXIT_OK
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]
