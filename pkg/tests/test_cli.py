import json
import subprocess
import sys
from pathlib import Path

import pytest

from brionkit import cli

DEMOS = Path(__file__).resolve().parent.parent / "demos"


def call(capsys, *argv):
    code = cli.run([str(a) for a in argv])
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


def write(tmp_path, obj, name="p.json"):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return path


def test_eval_integral_pentagon(capsys):
    code, res, _ = call(capsys, "eval-integral", DEMOS / "pentagon.json", "--xi", "re=[1,0]")
    assert code == 0
    assert len(res["terms"]) == 6
    assert res["holomorphy_margin"] > 0
    assert res["total"]["re"].startswith("35.8474068653182")


def test_eval_integral_at_zero_is_exact_area(capsys):
    code, res, _ = call(capsys, "eval-integral", DEMOS / "pentagon.json")
    assert code == 0 and res["total"] == "15/2"


@pytest.mark.parametrize("version", [1, 2, 3])
def test_eval_sum_versions(capsys, version):
    code, res, _ = call(capsys, "eval-sum", DEMOS / "triangle.json", "--xi", "re=[1,0]", "--version", version)
    assert code == 0
    assert res["total"]["re"].startswith("16.82561975584")


def test_eval_sum_reduces_non_adapted_functional(capsys):
    code, res, _ = call(capsys, "eval-sum", DEMOS / "segment_pi.json", "--xi", "im2pi=[1/2]")
    assert code == 0 and res["reduced"] and len(res["cosets"]) == 2
    assert abs(float(res["total"]["re"]) - 1) < 1e-30


def test_levi_cone_reports_flags(capsys):
    code, res, _ = call(capsys, "levi-cone", DEMOS / "pentagon.json", "--xi", "re=[1,0]")
    assert code == 0 and len(res["faces"]) == 6
    origin = [f for f in res["faces"] if sorted(t["coeff"] for t in f["terms"]) == [-1, 1]]
    assert len(origin) == 2


def test_decompose(capsys):
    code, res, _ = call(capsys, "decompose", DEMOS / "triangle.json", "--xi", "re=[1,0]", "--probes", 3)
    assert code == 0 and res["passed"] and len(res["pieces"]) == 4


def test_ehrhart_of_half_segment(capsys):
    code, res, _ = call(capsys, "ehrhart", DEMOS / "halfseg.json", "--tmax", 6)
    assert code == 0
    assert res["period"] == 2 and res["counts"] == [1, 2, 2, 3, 3, 4]


def test_dilation_series_continuous(capsys):
    code, res, _ = call(capsys, "dilation-series", DEMOS / "pentagon.json", "--tmax", 2)
    assert code == 0 and res["period"] == 1
    assert res["values"][1]["value"] == "30"


def test_mu_of_ray(capsys):
    code, res, _ = call(capsys, "mu", DEMOS / "ray.json", "--at-zero")
    assert code == 0 and res["value"] == "1/2"
    code, res, _ = call(capsys, "mu", DEMOS / "ray.json", "--xi", "re=[1]", "--trunc", 2)
    assert code == 0 and [c["order"] for c in res["series"]] == [0, 1, 2]


def test_verify_passes(capsys):
    code, res, _ = call(capsys, "verify", DEMOS / "triangle.json", "--xi", "re=[1,0]")
    assert code == 0 and res["passed"]


def test_verify_reports_deviation_with_exit_3(capsys, monkeypatch):
    monkeypatch.setattr(cli, "quad_integral", lambda p, xi, rel_tol: 1.0 + 0j)
    code, res, _ = call(capsys, "verify", DEMOS / "triangle.json", "--xi", "re=[1,0]")
    assert code == 3 and not res["passed"]


@pytest.mark.parametrize("argv", [
    ["eval-integral", "missing.json"],
    ["eval-integral", "DEMO", "--xi", "re=[1]"],
    ["eval-integral", "DEMO", "--xi", "nonsense"],
    ["eval-integral"],
    ["no-such-command", "DEMO"],
    ["eval-integral", "DEMO", "--trunc", "-1"],
])
def test_input_errors_exit_1(capsys, argv):
    argv = [str(DEMOS / "pentagon.json") if a == "DEMO" else a for a in argv]
    with pytest.raises(SystemExit) as exc:
        sys.exit(cli.run(argv))
    assert exc.value.code == 1


def test_malformed_file_exits_1(capsys, tmp_path):
    code, _, err = call(capsys, "eval-integral", write(tmp_path, "{not json"))
    assert code == 1 and "cannot read" in err
    code, _, _ = call(capsys, "eval-integral", write(tmp_path, {"dim": 2}, "q.json"))
    assert code == 1


def test_preconditions_exit_2(capsys, tmp_path):
    code, _, err = call(capsys, "levi-cone", DEMOS / "pentagon.json", "--xi", "re=[1,0]", "--face", 10)
    assert code == 2 and "NotXiConstant" in err
    unbounded = {"dim": 2, "inequalities": [{"a": ["1", "0"], "b": "1"}, {"a": ["0", "1"], "b": "1"}]}
    code, _, _ = call(capsys, "eval-integral", write(tmp_path, unbounded))
    assert code == 2


def test_mu_of_cone_with_a_line_is_zero(capsys, tmp_path):
    line = {"dim": 2, "apex": ["0", "0"], "rays": [["1", "0"], ["-1", "0"], ["0", "1"]]}
    code, res, _ = call(capsys, "mu", write(tmp_path, line), "--at-zero")
    assert code == 0 and res["value"] == "0"


def test_output_is_byte_identical_across_runs():
    argv = [sys.executable, "-m", "brionkit", "eval-sum", str(DEMOS / "pentagon.json"), "--xi", "re=[1,0]"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["total"]["re"].startswith("63.514888632746")


def test_plot_is_deterministic(capsys, tmp_path):
    pytest.importorskip("matplotlib")
    paths = [tmp_path / "a.svg", tmp_path / "b.svg"]
    for path in paths:
        code, _, _ = call(capsys, "levi-cone", DEMOS / "triangle.json", "--xi", "re=[1,0]", "--plot", path)
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert paths[0].read_bytes().startswith(b"<?xml")
