"""End-to-end command behaviour: exit codes, JSON shape, determinism."""

import json

import pytest

from crpqbound.cli import main
from crpqbound.qbfgen import parse_qbf
from crpqbound.syntax import parse_ucrpq

CLAIM = "?x -[(ab)*]-> ?y, ?x -[a]-> ?z, ?z -[b]-> ?w\n"
ASTARB = "?x -[a*]-> ?y, ?x -[b]-> ?y\n"
LEAFY = "?x -[a]-> ?y, ?y -[c*]-> ?z\n"


@pytest.fixture
def qfile(tmp_path):
    def write(text, name="q.txt"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return write


def test_analyze_bounded_exit_zero(qfile, capsys):
    assert main(["analyze", qfile(CLAIM)]) == 0
    out = capsys.readouterr().out
    assert "bounded" in out
    assert "Z derivation" in out


def test_analyze_unbounded_exit_one(qfile, capsys):
    assert main(["analyze", qfile(ASTARB)]) == 1
    out = capsys.readouterr().out
    assert "unbounded" in out


def test_analyze_inconclusive_exit_two(qfile):
    assert main(["analyze", qfile(ASTARB), "--cap", "1"]) == 2


def test_analyze_json_is_deterministic(qfile, capsys):
    path = qfile(ASTARB)
    assert main(["analyze", path, "--json"]) == 1
    first = capsys.readouterr().out
    assert main(["analyze", path, "--json"]) == 1
    second = capsys.readouterr().out
    assert first == second
    report = json.loads(first)
    assert report["schema"] == 1
    assert report["verdict"] == "unbounded"
    assert report["bounds"]["Z"] == 16
    assert report["bounds"]["Zplus"] == 33
    assert report["stats"]["wall_ms"] == 0


def test_analyze_letters_max_json(qfile, capsys):
    assert main(["analyze", qfile(LEAFY), "--letters", "max", "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["maximal_letters"] == ["c"]


def test_analyze_letters_set(qfile, capsys):
    assert main(["analyze", qfile(LEAFY), "--letters", "c"]) == 0
    assert main(["analyze", qfile(ASTARB), "--letters", "a"]) == 1


def test_analyze_oracle_verify(qfile, capsys):
    assert main(["analyze", qfile(ASTARB), "--oracle-verify", "--json"]) == 1
    captured = capsys.readouterr()
    assert json.loads(captured.out)["mode"]["oracle_verify"] is True
    # exit 70 with a stderr complaint would mean the cross-check failed
    assert "contradicted" not in captured.err


def test_missing_file_exit_64(capsys):
    assert main(["analyze", "/nonexistent/q.txt"]) == 64
    assert capsys.readouterr().err


def test_parse_error_exit_64(qfile, capsys):
    assert main(["analyze", qfile("?x -[(a*)*]-> ?y\n")]) == 64
    assert capsys.readouterr().err


def test_unknown_flag_exit_64(qfile, capsys):
    assert main(["analyze", qfile(CLAIM), "--bogus"]) == 64
    capsys.readouterr()


def test_contains_directions(qfile, capsys):
    left = qfile("?x -[a]-> ?y, ?y -[a]-> ?z\n", "l.txt")
    wide = qfile("?x -[a^<=4]-> ?y\n", "r.txt")
    narrow = qfile("?x -[a^3]-> ?y\n", "r2.txt")
    assert main(["contains", left, wide]) == 0
    assert main(["contains", left, narrow]) == 1
    capsys.readouterr()


def test_member_exit_codes(tmp_path, capsys):
    nfa = tmp_path / "m.nfa"
    nfa.write_text("initial: p\nfinals: f\np -[(ab)^3]-> f\n")
    assert main(["member", str(nfa), "ab", "3"]) == 0
    assert main(["member", str(nfa), "ab", "2"]) == 1
    capsys.readouterr()


def test_eval_exit_codes(tmp_path, qfile, capsys):
    g = tmp_path / "g.csv"
    g.write_text("src,label,dst\nu,a,v\n")
    assert main(["eval", "--graph", str(g), "--query", qfile("?x -[a*]-> ?y\n")]) == 0
    assert main(["eval", "--graph", str(g), "--query", qfile("?x -[b]-> ?y\n")]) == 1
    capsys.readouterr()


def test_qbfgen_output_reparses(tmp_path, capsys):
    phi = tmp_path / "phi.qbf"
    phi.write_text("forall 1..1\nexists 2..2\n1 2 2 0\n")
    assert main(["qbfgen", str(phi)]) == 0
    text = capsys.readouterr().out
    q = parse_ucrpq(text)
    assert len(q.disjuncts[0].atoms) == 88


def test_qbfgen_emit_q1(tmp_path, capsys):
    phi = tmp_path / "phi.qbf"
    phi.write_text("forall 1..1\nexists 2..2\n1 2 2 0\n")
    assert main(["qbfgen", str(phi), "--emit", "q1"]) == 0
    q = parse_ucrpq(capsys.readouterr().out)
    assert len(q.disjuncts[0].atoms) == 75


def test_cap_flag_rejects_nonpositive(qfile, capsys):
    assert main(["analyze", qfile(CLAIM), "--cap", "0"]) == 64
    capsys.readouterr()


def test_seed_env_fallback(qfile, capsys, monkeypatch):
    monkeypatch.setenv("CRPQ_BOUND_SEED", "7")
    assert main(["analyze", qfile(CLAIM), "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["stats"]["seed"] == 7
