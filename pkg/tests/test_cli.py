import json
import subprocess
import sys

import pytest

from pgcl.cli import main
from pgcl.constructions import load_presentation


def run(*argv):
    return main([str(a) for a in argv])


def test_build_huppert(tmp_path):
    out = tmp_path / "h.pc"
    assert run("build", "huppert", "--p", 5, "-o", out, "--quiet") == 0
    pres = load_presentation(out)
    assert pres.order == 5 ** 6


def test_build_free_class2(tmp_path):
    out = tmp_path / "f.pc"
    assert run("build", "free-class2", "--p", 5, "--d", 3, "-o", out, "--quiet") == 0
    assert load_presentation(out).order == 5 ** 6


def test_build_rejections(capsys):
    assert run("build", "huppert", "--p", 3) == 2
    assert run("build", "no-such-family") == 2
    assert run("frobnicate") == 2


def test_check_theorem_a_huppert(tmp_path, capsys):
    rep = tmp_path / "r.json"
    assert run("check", "huppert(p=5)", "theorem-a", "--json", rep) == 0
    data = json.loads(rep.read_text())
    assert data["schema"] == 1 and data["overall"] == "PASS"
    assert data["checks"][0]["details"]["branch"] == "non-powerful -> CF(6,5) -> Theorem B"


def test_check_f4_rejected_with_k_gap(tmp_path):
    rep = tmp_path / "r.json"
    assert run("check", "free-class2(p=5,d=4)", "theorem-a", "--json", rep, "--quiet") == 3
    assert json.loads(rep.read_text())["checks"][0]["verdict"] == "REJECTED"


def test_check_f6_k_gap_oracle_only(tmp_path):
    rep = tmp_path / "r.json"
    code = run("check", "free-class2", "--d", 6, "k-gap", "lemma-D", "--json", rep, "--quiet")
    data = json.loads(rep.read_text())
    verdicts = {c["name"]: c["verdict"] for c in data["checks"]}
    assert verdicts == {"k-gap": "PASS", "lemma-D": "SKIPPED"}
    assert data["checks"][0]["details"]["oracle_non_commutator"] is True
    assert code == 0


def test_check_abelian_theorem_b():
    assert run("check", "elementary-abelian(p=5,n=3)", "theorem-b", "--quiet") == 0


def test_check_unknown_suite():
    assert run("check", "heisenberg(p=5)", "nonsense") == 2


def test_small_gate_gives_skipped(tmp_path):
    assert run("check", "heisenberg(p=5)", "lemma-D", "--gate", 5, "--quiet") == 3


def test_empty_corpus_passes(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"entries": []}))
    rep = tmp_path / "r.json"
    assert run("corpus", "--config", cfg, "--json", rep, "--quiet") == 0
    data = json.loads(rep.read_text())
    assert data["overall"] == "PASS" and data["entries"] == []


def test_corpus_with_inconsistent_file_fails(tmp_path):
    bad = tmp_path / "bad.pc"
    bad.write_text("p 5\nn 3\npow 1 : g2\ncomm 2 1 : g3\n")
    good = tmp_path / "heis.pc"
    assert run("build", "heisenberg", "-o", good, "--quiet") == 0
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"entries": [{"file": "bad.pc"},
                                           {"file": "heis.pc", "suites": ["consistency"]}]}))
    rep = tmp_path / "r.json"
    assert run("corpus", "--config", cfg, "--json", rep, "--quiet") == 1
    data = json.loads(rep.read_text())
    assert data["failing"] == [str(bad)]


@pytest.fixture(scope="module")
def huppert_cert(tmp_path_factory):
    d = tmp_path_factory.mktemp("cert")
    pc = d / "h.pc"
    cert = d / "cert.json"
    assert main(["build", "huppert", "-o", str(pc), "--quiet"]) == 0
    assert main(["check", str(pc), "theorem-b", "--cert", str(cert), "--quiet"]) == 0
    return pc, cert


def test_certify_replay_pass(huppert_cert):
    pc, cert = huppert_cert
    assert run("certify-replay", cert, pc, "--quiet") == 0


def test_certify_replay_tampered_fails(huppert_cert, tmp_path):
    pc, cert = huppert_cert
    data = json.loads(cert.read_text())
    g = data["pairing"][2]["g"]
    data["pairing"][2]["g"] = [0] * len(g)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    rep = tmp_path / "r.json"
    assert run("certify-replay", bad, pc, "--json", rep, "--quiet") == 1
    assert json.loads(rep.read_text())["checks"][0]["details"]["failed_rung"] == 2


def test_certify_replay_wrong_group(huppert_cert, tmp_path):
    _, cert = huppert_cert
    other = tmp_path / "o.pc"
    assert run("build", "huppert", "--p", 7, "-o", other, "--quiet") == 0
    assert run("certify-replay", cert, other, "--quiet") == 2


def test_reports_are_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run("check", "heisenberg(p=5)", "consistency", "lemma-D", "hall", "--seed", 7,
                   "--json", path, "--timing", "--quiet") in (0, 3)
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    da.pop("timing"), db.pop("timing")
    assert da == db
    assert da["digest"] == db["digest"]


def test_console_script_version():
    out = subprocess.run([sys.executable, "-m", "pgcl.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("pgcl ")
