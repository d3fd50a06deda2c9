import json
import subprocess
import sys
from pathlib import Path

import pytest

from slconifold import mesh as M
from slconifold.cli import main
from slconifold.errors import InvalidInputError
from slconifold.scenario import parse_config, render, run

ROOT = Path(__file__).resolve().parent.parent
SCENARIO = ROOT / "scenarios" / "stable_cone_csac.json"
GOLDEN = Path(__file__).parent / "golden" / "stable_cone_csac.machine.json"


def base():
    return json.loads(SCENARIO.read_text())


def write(tmp_path, cfg, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def compute(capsys, path, *extra):
    code = main(["compute", str(path), *extra])
    return code, capsys.readouterr()


def test_parse_example_scenario():
    cfg = parse_config(SCENARIO.read_text())
    assert cfg.case == "CSAC" and len(cfg.cs_ends) == 1 and len(cfg.ac_ends) == 1


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("m"),
        lambda d: d.__setitem__("m", 2),
        lambda d: d.__setitem__("schema_version", 2),
        lambda d: d.__setitem__("case", "AC"),
        lambda d: d["ends"][0].__setitem__("rate", 1.5),
        lambda d: d["ends"][0]["link"].__setitem__("type", "cube"),
        lambda d: d["topology"].pop("b1_c_bullet"),
    ],
)
def test_schema_violations(mutate):
    d = base()
    mutate(d)
    with pytest.raises(InvalidInputError):
        parse_config(json.dumps(d))


def test_bad_json():
    with pytest.raises(InvalidInputError):
        parse_config("{not json")


def test_unknown_keys_warn_or_reject():
    d = base()
    d["colour"] = "blue"
    assert any("colour" in w for w in parse_config(json.dumps(d)).warnings)
    with pytest.raises(InvalidInputError):
        parse_config(json.dumps(d), strict=True)


def test_golden_machine_report(capsys):
    code, out = compute(capsys, SCENARIO, "--format", "machine")
    assert code == 0
    assert out.out == GOLDEN.read_text()


def test_machine_output_is_deterministic(capsys):
    _, a = compute(capsys, SCENARIO, "--format", "machine")
    _, b = compute(capsys, SCENARIO, "--format", "machine")
    assert a.out == b.out


def test_text_and_machine_agree(capsys):
    report = run(parse_config(SCENARIO.read_text()))
    machine = json.loads(render(report, "machine"))
    text = render(report, "text")
    for t in machine["moduli"]["breakdown"]:
        assert any(line.split()[:2] == [t["name"], str(t["value"])] for line in text.splitlines())
    for block in ("h_tilde_block", "e_block", "index_block"):
        assert block in text


def test_verify_round_trip(tmp_path, capsys):
    _, out = compute(capsys, SCENARIO, "--format", "machine")
    p = tmp_path / "report.json"
    p.write_text(out.out)
    assert main(["verify", str(p)]) == 0
    data = json.loads(out.out)
    data["moduli"]["dim_I"] += 1
    p.write_text(json.dumps(data))
    assert main(["verify", str(p)]) == 6


@pytest.mark.parametrize(
    "mutate,code",
    [
        (lambda d: d["ends"][1].__setitem__("rate", 1.0), 5),
        (lambda d: d.__setitem__("m", 2), 2),
        (lambda d: d["topology"].__setitem__("b1_c", 5), 3),
        (lambda d: [e["link"].__setitem__("cutoff", 6.2) for e in d["ends"]], 4),
        (lambda d: [e["link"]["spectrum"].insert(1, [1.5, 1]) for e in d["ends"]], 7),
    ],
)
def test_exit_codes(tmp_path, capsys, mutate, code):
    d = base()
    mutate(d)
    assert compute(capsys, write(tmp_path, d))[0] == code


def test_cs_topology_violation(tmp_path, capsys):
    d = base()
    cs = d["ends"][0]
    d.update(case="CS", ends=[cs, dict(cs)], topology={"b1": 0, "b1_c": 0})
    assert compute(capsys, write(tmp_path, d))[0] == 3
    assert main(["check", str(write(tmp_path, d))]) == 3


def test_non_strict_completeness_warns(tmp_path, capsys):
    cfg = {
        "schema_version": 1,
        "m": 3,
        "case": "AC",
        "ends": [{"kind": "AC", "rate": 1.5, "link": {"type": "explicit", "spectrum": [[0, 1], [2, 3]], "cutoff": 3}}],
        "topology": {"b1": 0, "b1_c": 0},
        "options": {"strict_completeness": False},
    }
    code, out = compute(capsys, write(tmp_path, cfg))
    assert code == 0
    assert "certified only up to" in out.out
    cfg["options"]["strict_completeness"] = True
    assert compute(capsys, write(tmp_path, cfg))[0] == 4


def test_check_and_stability(capsys):
    assert main(["check", str(SCENARIO)]) == 0
    assert main(["stability", str(SCENARIO), "--format", "machine"]) == 0
    out = capsys.readouterr().out
    assert json.loads(out[out.index("{"):])["stability"][0]["stable"] is True


def test_spectrum_subcommands(tmp_path, capsys):
    assert main(["spectrum", "--format", "machine", "sphere", "--dim", "2", "--cutoff", "7"]) == 0
    assert json.loads(capsys.readouterr().out)["entries"] == [[0, 1], [2, 3], [6, 5]]
    assert main(["spectrum", "torus", "--basis", "6.283185307179586 0; 0 6.283185307179586", "--cutoff", "2"]) == 0
    capsys.readouterr()
    p = tmp_path / "o.off"
    M.write_off(M.octahedron(), p)
    assert main(["spectrum", "--format", "machine", "mesh", str(p), "--cutoff", "3"]) == 0
    assert [k for _, k in json.loads(capsys.readouterr().out)["entries"]] == [1, 3, 2]
    assert main(["spectrum", "torus", "--basis", "1 2; 2 4", "--cutoff", "2"]) == 2


def test_mesh_path_relative_to_config(tmp_path, capsys):
    (tmp_path / "links").mkdir()
    M.write_off(M.icosphere(3), tmp_path / "links" / "s2.off")
    cfg = {
        "schema_version": 1,
        "m": 3,
        "case": "AC",
        "ends": [{"kind": "AC", "rate": 1.5, "link": {"type": "mesh", "path": "links/s2.off"}}],
        "topology": {"b1": 0, "b1_c": 0},
    }
    code, out = compute(capsys, write(tmp_path, cfg), "--format", "machine")
    assert code == 0
    assert json.loads(out.out)["moduli"]["dim_I"] == 3


def test_console_entry_point():
    r = subprocess.run(
        [sys.executable, "-m", "slconifold.cli", "compute", str(SCENARIO)],
        capture_output=True, text=True,
    )
    assert r.returncode == 0 and "dim_I" in r.stdout
