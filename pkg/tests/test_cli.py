import json
from pathlib import Path

import jsonschema
import pytest
from referencing import Registry, Resource

from cubulate.cli import main

ROOT = Path(__file__).resolve().parents[1]
SCHEMAS = ROOT / "docs" / "schemas" / "v1"
P1_FILE = str(ROOT / "presentations" / "p1.sgc")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


REGISTRY = Registry().with_resources(
    (p.name, Resource.from_contents(json.loads(p.read_text()))) for p in SCHEMAS.glob("*.schema.json")
)


def check_schema(doc, name):
    contents = REGISTRY.contents(f"{name}.schema.json")
    jsonschema.Draft202012Validator(contents, registry=REGISTRY).validate(doc)


def test_validate_file(capsys):
    code, out, _ = run(capsys, "validate", P1_FILE)
    rep = json.loads(out)
    assert code == 0
    assert rep["n_X"] == 4 and rep["W_X"] == 16
    assert rep["staggering_violations"] == []
    check_schema(rep, "validate")
    check_schema(rep["manifest"], "manifest")


def test_reduce_torsion(capsys):
    code, out, _ = run(capsys, "reduce", "-p", "P1", "--word", "(ab)^4", "--expect", "trivial")
    rep = json.loads(out)
    assert code == 0
    assert rep["trivial"] is True and rep["area_estimate"] == 1
    check_schema(rep, "reduce")


def test_reduce_failed_expectation_exits_2(capsys):
    code, out, _ = run(capsys, "reduce", "-p", "P1", "--word", "(ab)^3", "--expect", "trivial")
    assert code == 2
    assert json.loads(out)["trivial"] is False


@pytest.mark.parametrize("argv", [
    ["reduce", "-p", "nosuch", "--word", "a"],
    ["reduce", "-p", "P1"],
    ["reduce", "-p", "P1", "--word", "a q"],
    ["ball", "-p", "P1", "--format", "yaml"],
    ["validate", "-p", "P1", "--format", "dot"],
])
def test_input_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and err


def test_bad_presentation_file(tmp_path, capsys):
    f = tmp_path / "bad.sgc"
    f.write_text("factor A free a\nedge t A Z\n")
    code, _, err = run(capsys, "validate", str(f))
    assert code == 1 and "invalid" in err


@pytest.mark.parametrize("argv, name", [
    (["ball", "-p", "P0", "--radius", "3"], "ball"),
    (["walls", "-p", "P1", "--radius", "6", "--check", "embed", "--check", "separate"], "walls"),
    (["horoball", "-p", "P1", "--base-size", "16", "--depth", "4", "--random", "20", "--samples", "200"],
     "horoball"),
    (["dual", "-p", "P0", "--radius", "3"], "dual"),
    (["diagram", "-p", "P1", "--instance", "mirror"], "diagram"),
    (["check-all", "--only", "1", "--only", "7"], "check-all"),
])
def test_reports_match_schema(capsys, argv, name):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    rep = json.loads(out)
    check_schema(rep, name)
    check_schema(rep["manifest"], "manifest")


def test_output_is_deterministic(capsys):
    argv = ["walls", "-p", "P1", "--radius", "6", "--check", "embed"]
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second


def test_dot_output(capsys):
    code, out, _ = run(capsys, "diagram", "-p", "P1", "--instance", "disk", "--emit", "dot")
    assert code == 0 and out.startswith("graph diagram {")


def test_out_dir_artifacts(tmp_path, capsys):
    argv = ["walls", "-p", "P1", "--radius", "6", "--check", "linsep", "--out-dir", str(tmp_path)]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert (tmp_path / "walls.json").read_text() == out
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    check_schema(manifest, "manifest")
    for png in manifest["stats"]["figures"]:
        data = (tmp_path / png).read_bytes()
        assert data[:8] == b"\x89PNG\r\n\x1a\n"
    first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    run(capsys, *argv)
    assert {p.name: p.read_bytes() for p in tmp_path.iterdir()} == first


def test_check_all_only(capsys):
    code, out, err = run(capsys, "check-all", "--only", "1")
    rep = json.loads(out)
    assert code == 0
    assert [c["number"] for c in rep["criteria"]] == [1]
    assert "criterion  1 [PASS]" in err
