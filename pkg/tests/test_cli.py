import json
import subprocess
import sys

import pytest

from tsallis_causal.cli import EXIT_CAP, EXIT_INPUT, EXIT_OK, EXIT_VIOLATION, main
from tsallis_causal.probability import JointDistribution, VariableSpec


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_dseparate(capsys):
    assert run(capsys, "dseparate", "--dag", "triangle", "--x", "X", "--y", "Y", "--z", "B,C")[:2] == (EXIT_OK,
                                                                                                  "true\n")
    assert run(capsys, "dseparate", "--dag", "bell", "--x", "A", "--y", "B")[1] == "true\n"
    assert run(capsys, "dseparate", "--dag", "triangle", "--x", "X", "--y", "Y")[1] == "false\n"
    code, _, err = run(capsys, "dseparate", "--dag", "triangle", "--x", "Q", "--y", "Y")
    assert code == EXIT_INPUT and "error" in err
    data = json.loads(run(capsys, "dseparate", "--dag", "bell", "--x", "A", "--y", "B", "--format", "json")[1])
    assert data["d_separated"] is True


def test_usage_errors_exit_3(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["dseparate", "--dag", "triangle"])
    assert exc.value.code == EXIT_INPUT
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == EXIT_INPUT
    assert run(capsys, "constraints", "--dag", "nowhere.json")[0] == EXIT_INPUT
    assert run(capsys, "constraints", "--dag", "triangle", "--q", "0.5", "--dims", "2")[0] == EXIT_INPUT


def test_constraints_counts(capsys):
    code, out, _ = run(capsys, "constraints", "--dag", "triangle", "--q", "2", "--dims", "2")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert len(lines) == 126 + 246
    assert sum("causal-tsallis" in l for l in lines) == 126
    code, out, _ = run(capsys, "constraints", "--dag", "triangle", "--shannon", "--format", "json")
    assert len(json.loads(out)["inequalities"]) == 246 + 6


def test_constraints_json_feeds_project(capsys, tmp_path):
    code, out, _ = run(capsys, "constraints", "--dag", "common-cause-3", "--shannon", "--format", "json")
    path = tmp_path / "sys.json"
    path.write_text(out)
    code, out, _ = run(capsys, "project", "--system", str(path), "--keep", "X,Y", "--format", "text")
    assert code == EXIT_OK
    rows = sorted(line.split("  #")[0] for line in out.splitlines())
    assert rows == sorted(["+H(X) +H(Y) -H(XY) >= 0", "-H(X) +H(XY) >= 0", "-H(Y) +H(XY) >= 0"])


def test_project_common_cause(capsys):
    code, out, _ = run(capsys, "project", "--dag", "common-cause-3", "--shannon", "--keep", "X,Y")
    data = json.loads(out)
    assert code == EXIT_OK and data["report"]["completed"]
    assert len(data["system"]["inequalities"]) == 3


def test_project_cap_breach(capsys):
    code, out, _ = run(capsys, "project", "--dag", "triangle", "--q", "2", "--dims", "2", "--keep", "X,Y,Z",
                       "--max-rows", "600", "--no-redundancy")
    assert code == EXIT_CAP
    data = json.loads(out)
    assert data["report"]["breach"] == "max_rows" and "partial_system" in data
    assert run(capsys, "project", "--dag", "triangle", "--keep", "Q")[0] == EXIT_INPUT


def test_evaluate_scenario_and_violation(capsys, tmp_path):
    code, out, _ = run(capsys, "evaluate", "--scenario", "fritz", "--do", "4", "--du", "2")
    assert code == EXIT_OK
    assert not json.loads(out)["violation"]
    # at d_o = 2 the N=3 chained distribution violates the bounds
    code, out, _ = run(capsys, "evaluate", "--scenario", "N=3", "--do", "2", "--du", "2")
    assert code == EXIT_VIOLATION and json.loads(out)["violation"]
    # an explicit system and distribution
    d = JointDistribution([VariableSpec(n, 2) for n in "XYZ"],
                          ["1/4", "0", "1/4", "0", "1/4", "0", "1/4", "0"])
    dpath = tmp_path / "d.json"
    dpath.write_text(d.to_json())
    spath = tmp_path / "s.json"
    spath.write_text(run(capsys, "constraints", "--dag", "common-cause-3", "--q", "2", "--dims", "2",
                         "--format", "json")[1])
    code, out, _ = run(capsys, "evaluate", "--dist", str(dpath), "--system", str(spath), "--q", "2")
    assert code in (EXIT_OK, EXIT_VIOLATION)
    assert "slacks" in json.dumps(json.loads(out))


def test_table1_subset(capsys):
    code, out, _ = run(capsys, "table1", "--scenarios", "N=2,N=3")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "scenario,d1,d2,d3,smallest_observed_dim"
    assert out.splitlines()[1].startswith("N=2,2,2,2,4")


def test_qsearch_deterministic(capsys):
    a = run(capsys, "qsearch", "--samples", "5", "--seed", "3")
    b = run(capsys, "qsearch", "--samples", "5", "--seed", "3")
    assert a == b and a[0] == EXIT_OK
    assert json.loads(a[1])["samples"] == 5


def test_verify_appendix_smoke(capsys, tmp_path):
    out_file = tmp_path / "app.json"
    code, _, _ = run(capsys, "verify-appendix", "--samples", "3", "--out", str(out_file))
    assert code == EXIT_OK
    report = json.loads(out_file.read_text())
    assert report["passed"] and all(c["passed"] for c in report["checks"])


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tsallis_causal.cli", "dseparate", "--dag", "bell",
                           "--x", "A", "--y", "B"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "true\n"
