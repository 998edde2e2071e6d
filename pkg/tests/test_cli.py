import hashlib
import json
import os

from refltower import jacobi
from refltower.cli import main


def test_expand_theta_text(capsys):
    assert main(["expand", "theta", "--qmax", "2", "--smax", "0"]) == 0
    out = capsys.readouterr().out
    assert "descriptor: theta" in out
    assert "grid: r=1 den_z=2" in out
    # the lowest theta term is q^{1/8} zeta^{1/2}, stored at q_num 3, z 1
    assert "s^0 q^1/8: 2 terms" in out
    assert "  (1) 1" in out
    assert "  (-1) -1" in out


def test_expand_accepts_block_shorthand(capsys):
    assert main(["expand", "D2", "--qmax", "2", "--smax", "2"]) == 0
    first = capsys.readouterr().out
    assert main(["expand", "psi_10_D2", "--qmax", "2", "--smax", "2"]) == 0
    second = capsys.readouterr().out
    assert first.replace("descriptor: D2", "descriptor: psi_10_D2") == second


def test_expand_json_digest_is_self_consistent(capsys):
    assert main(["expand", "eta^3", "--qmax", "8", "--smax", "0",
                 "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    body = json.dumps(doc["series"], separators=(",", ":"), sort_keys=True)
    assert hashlib.sha256(body.encode()).hexdigest() == doc["digest"]
    assert doc["window"] == {"q_max": 192, "s_max": 0}


def test_expand_unknown_descriptor_is_usage_error(capsys):
    assert main(["expand", "psi_99_E8"]) == 2
    assert main(["expand", "closedform:psi_5_A1"]) == 2
    assert "error" in capsys.readouterr().err


def test_expand_cache_round_trip(tmp_path, capsys):
    args = ["expand", "lift:D2", "--qmax", "3", "--smax", "2",
            "--cache-dir", str(tmp_path)]
    assert main(args) == 0
    first = capsys.readouterr().out
    files = list(tmp_path.glob("*.json"))
    assert len(files) == 1
    stamp = files[0].stat().st_mtime_ns
    assert main(args) == 0
    second = capsys.readouterr().out
    assert first == second
    assert files[0].stat().st_mtime_ns == stamp
    # a corrupted entry is detected by its digest and rebuilt
    doc = json.loads(files[0].read_text())
    doc["series"] = doc["series"].replace(":1", ":7", 1)
    files[0].write_text(json.dumps(doc))
    assert main(args) == 0
    assert capsys.readouterr().out == first


def test_cache_dir_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("CACHE_DIR", str(tmp_path))
    assert main(["expand", "theta", "--qmax", "1", "--smax", "0"]) == 0
    capsys.readouterr()
    assert len(list(tmp_path.glob("*.json"))) == 1


def test_out_writes_file_only(tmp_path, capsys):
    target = tmp_path / "theta.txt"
    assert main(["expand", "theta", "--qmax", "1", "--smax", "0",
                 "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert "descriptor: theta" in target.read_text()


def test_compare_lift_and_product_agree(capsys):
    assert main(["compare", "lift:D2", "borcherds:D2",
                 "--qmax", "3", "--smax", "2"]) == 0
    assert "equal" in capsys.readouterr().out


def test_compare_reports_first_difference(capsys):
    # two independent constructions of the same product agree
    assert main(["compare", "borcherds:D2", "product:D2",
                 "--qmax", "3", "--smax", "2"]) == 0
    assert "equal" in capsys.readouterr().out
    # the bare block sits at s^0, one layer below where its lift starts
    assert main(["compare", "psi_10_D2", "lift:psi_10_D2",
                 "--qmax", "3", "--smax", "2"]) == 1
    out = capsys.readouterr().out
    assert "difference at s^0" in out


def test_compare_incompatible_grids_is_usage_error(capsys):
    assert main(["compare", "theta", "eta^3", "--qmax", "2"]) == 2
    assert "incompatible grids" in capsys.readouterr().err


def test_verify_list_names(capsys):
    assert main(["verify", "--list"]) == 0
    names = capsys.readouterr().out.split()
    assert "q0-terms" in names
    assert "lift-equals-product:psi_2_4A1" in names
    assert names == sorted(names)


def test_verify_selected_identities_json(capsys):
    assert main(["verify", "weight-equals-half-constant", "q0-terms",
                 "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [r["identity"] for r in doc] == [
        "q0-terms", "weight-equals-half-constant"]
    assert all(r["status"] == "pass" for r in doc)


def test_verify_unknown_identity_is_usage_error(capsys):
    assert main(["verify", "no-such-check"]) == 2
    assert "unknown identity" in capsys.readouterr().err


def test_verify_failure_exits_one(monkeypatch, capsys):
    real = jacobi.theta_product_form
    monkeypatch.setattr(jacobi, "theta_product_form",
                        lambda q_max: real(q_max).scaled(3))
    assert main(["verify", "theta-triple-product", "--qmax", "2"]) == 1
    out = capsys.readouterr().out
    assert "fail" in out
    assert "claim:" in out
