import json

import pytest

from qmcnpa.cli import build_parser, parse_grid, parse_schedule, run


def _run(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_solve_star(capsys):
    code, d = _run(capsys, "solve", "--family", "star:4", "--basis", "proj", "--level", "1",
                   "--eps", "1e-8")
    assert code == 0
    assert d["sdp_value"] == pytest.approx(2.5, abs=1e-6)
    for key in ("instance", "basis", "level", "sdp_value", "oracle_value", "gap",
                "eps_achieved", "validation"):
        assert key in d
    for key in ("monogamy_min_margin", "gram_max_cos", "min_eig"):
        assert key in d["validation"]


def test_verify_cert_even_complete(capsys):
    code, d = _run(capsys, "verify-cert", "--family", "even_complete:6")
    assert code == 0 and d["residual"] < 1e-9 and d["accepted"]


def test_classify_k5(capsys):
    code, d = _run(capsys, "classify", "--family", "complete:5", "--eps-schedule", "1e-4..1e-9")
    assert code == 0
    assert d["verdict"] == "inexact"
    assert d["final_delta"] == pytest.approx(0.375, abs=1e-5)


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as e:
        run(["solve", "--family", "star:3", "--bogus"])
    assert e.value.code == 2


def test_bad_input_exits_2(capsys):
    assert run(["solve", "--family", "nosuch:3"]) == 2
    assert run(["verify-cert", "--family", "crown:4:x=3"]) == 2


def test_failed_check_exits_1(capsys, monkeypatch):
    from qmcnpa import certs
    orig = certs.check_certificate

    def tampered(c, annihilation=False):
        r = orig(c, annihilation)
        r.residual = 1.0
        return r
    monkeypatch.setattr("qmcnpa.cli.check_certificate", tampered)
    code, d = _run(capsys, "verify-cert", "--family", "star:3")
    assert code == 1 and d["passed"] is False


def test_output_is_reproducible(capsys, tmp_path):
    docs = []
    for _ in range(2):
        code, d = _run(capsys, "solve", "--family", "crown:3:x=2", "--basis", "pauli")
        d.pop("metadata")
        docs.append(json.dumps(d, sort_keys=True))
    assert docs[0] == docs[1]


def test_out_and_csv(capsys, tmp_path):
    out, csvp = tmp_path / "r.json", tmp_path / "r.csv"
    code, d = _run(capsys, "--out", str(out), "scan", "--family", "crown:3", "--edge", "3,4",
                   "--grid", "1:2:0.5", "--single-eps", "--csv", str(csvp))
    assert code == 0
    assert json.loads(out.read_text())["grid"] == [1.0, 1.5, 2.0]
    assert csvp.read_text().splitlines()[0] == "param,sdp_value,oracle_value,rel_error,derivative"


def test_threads_do_not_change_values(capsys):
    _, a = _run(capsys, "--threads", "1", "enumerate", "--n", "4", "--classify",
                "--eps-schedule", "1e-4..1e-6")
    _, b = _run(capsys, "--threads", "2", "enumerate", "--n", "4", "--classify",
                "--eps-schedule", "1e-4..1e-6")
    ea = [r["errors"]["proj1"] for r in a["records"]]
    eb = [r["errors"]["proj1"] for r in b["records"]]
    assert max(abs(x - y) for x, y in zip(ea, eb)) <= 1e-10


def test_other_commands(capsys, tmp_path):
    assert _run(capsys, "ed", "--graph6", "D~o")[0] == 0
    assert _run(capsys, "verify-fixture", "--kind", "odd_complete", "--n", "5")[0] == 0
    p = tmp_path / "x.dat-s"
    code, d = _run(capsys, "export-sdpa", "--family", "cycle:5", "--sdpa", str(p))
    assert code == 0 and p.exists() and d["constraints"] > 0
    code, d = _run(capsys, "correlate", "--L", "8")
    assert code == 0 and len(d["C"]) == 4
    code, d = _run(capsys, "enumerate", "--n", "5")
    assert d["count"] == 21


def test_schedule_and_grid_parsing():
    assert parse_schedule("1e-4..1e-6") == [1e-4, 1e-5, 1e-6]
    assert parse_schedule("1e-3,1e-5") == [1e-3, 1e-5]
    assert parse_grid("0:0.3:0.1") == [0.0, 0.1, 0.2, 0.3]
    assert build_parser().parse_args(["ed", "--family", "star:2"]).command == "ed"
