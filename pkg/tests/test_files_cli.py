import json

import pytest

from chaos_lab.cli import main
from chaos_lab.errors import DuplicateKey, RepeatedIndex, SchemaError
from chaos_lab.files import (UnsortedIndexWarning, dump_report, kernel_from_json, kernel_hash,
                             kernel_to_json, load_kernel, save_kernel)
from chaos_lab.kernels import ChaosCoefficients
from chaos_lab.suites import fixtures


def test_round_trip_bitwise(tmp_path, complete23):
    for name, c in fixtures().items():
        p = save_kernel(c, tmp_path / f"{name}.json")
        back = load_kernel(p)
        assert back.max_level == c.max_level
        for m, k in c.levels.items():
            for key, v in k.entries.items():
                assert back.kernel(m).entries[key].hex() == v.hex()
        assert kernel_to_json(back) == p.read_text()
        assert kernel_hash(back) == kernel_hash(c)


def test_repeated_index_pointer():
    doc = {"levels": [{"m": 2, "entries": [[[1, 1], 0.5]]}]}
    with pytest.raises(RepeatedIndex) as e:
        kernel_from_json(doc)
    assert e.value.pointer == "/levels/0/entries/0"


def test_unsorted_index_warns():
    doc = {"levels": [{"m": 2, "entries": [[[2, 1], 0.5]]}]}
    with pytest.warns(UnsortedIndexWarning):
        c = kernel_from_json(doc)
    assert c.kernel(2).entries == {(1, 2): 0.5}


@pytest.mark.parametrize("doc,ptr", [
    ("[]", ""),
    ("{}", "/levels"),
    ({"levels": [{"m": 0, "entries": []}]}, "/levels/0/m"),
    ({"levels": [{"m": 2, "entries": [[[1, 2, 3], 0.5]]}]}, "/levels/0/entries/0/0"),
    ({"levels": [{"m": 2, "entries": [[[1, 2], "x"]]}]}, "/levels/0/entries/0/1"),
    ({"levels": [{"m": 2, "entries": [[[1, 2], 1.0]]}], "max_level": 1}, "/max_level"),
    ("{not json", ""),
])
def test_schema_errors(doc, ptr):
    with pytest.raises(SchemaError) as e:
        kernel_from_json(doc)
    assert e.value.pointer == ptr


def test_duplicate_key():
    with pytest.raises(DuplicateKey):
        kernel_from_json({"levels": [{"m": 2, "entries": [[[1, 2], 1.0], [[1, 2], 2.0]]}]})


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError, match="nope.json"):
        load_kernel(tmp_path / "nope.json")


def test_dump_report_deterministic():
    import numpy as np
    r = {"b": np.float64(0.1), "a": (1, 2), "c": float("inf"), "d": np.int64(3)}
    assert dump_report(r) == dump_report(dict(reversed(list(r.items()))))
    assert json.loads(dump_report(r)) == {"a": [1, 2], "b": 0.1, "c": "inf", "d": 3}


# ------------------------------------------------------------------ CLI

def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_gen_diag(tmp_path, capsys):
    k = tmp_path / "k.json"
    assert _run(capsys, ["gen", "--family", "complete", "--m", "2", "--n", "3", "--out", str(k)])[0] == 0
    code, out, _ = _run(capsys, ["diag", "--kernel", str(k)])
    assert code == 0
    rep = json.loads(out)
    assert rep["i_N"] == pytest.approx(1.0)
    assert rep["levels"]["2"]["delta"] == pytest.approx(0.40825, abs=1e-5)
    assert rep["levels"]["2"]["kappa4"] == pytest.approx(6.0)
    p = tmp_path / "p.json"
    _run(capsys, ["gen", "--family", "path", "--m", "2", "--n", "50", "--out", str(p)])
    code, out, _ = _run(capsys, ["diag", "--kernel", str(p)])
    assert json.loads(out)["i_N"] == pytest.approx(1.0)


def test_cli_errors(tmp_path, capsys):
    code, _, err = _run(capsys, ["diag", "--kernel", str(tmp_path / "missing.json")])
    assert code == 1 and "missing.json" in err
    bad = tmp_path / "bad.json"
    bad.write_text('{"levels": [{"m": 2, "entries": [[[1, 1], 0.5]]}]}')
    code, _, err = _run(capsys, ["diag", "--kernel", str(bad)])
    assert code == 1 and "/levels/0/entries/0" in err
    with pytest.raises(SystemExit) as e:
        main(["diag"])
    assert e.value.code == 1
    k = tmp_path / "k.json"
    save_kernel(fixtures()["complete23"], k)
    code, _, err = _run(capsys, ["simulate", "--kernel", str(k), "--dist", "cauchy", "--n", "10"])
    assert code == 1 and "cauchy" in err


def test_cli_simulate_reproducible(tmp_path, capsys, monkeypatch):
    k = tmp_path / "k.json"
    save_kernel(fixtures()["mixed123"], k)
    argv = ["simulate", "--kernel", str(k), "--n", "20000", "--shards", "4"]
    monkeypatch.setenv("CHAOS_LAB_SEED", "17")
    a = _run(capsys, argv)[1]
    b = _run(capsys, argv)[1]
    assert a == b
    rep = json.loads(a)
    assert rep["header"]["seed"] == 17 and rep["header"]["shards"] == 4
    monkeypatch.setenv("CHAOS_LAB_SEED", "18")
    assert _run(capsys, argv)[1] != a
    code, csv_out, _ = _run(capsys, argv + ["--report", "csv"])
    assert code == 0 and csv_out.count("\n") > 2


def test_cli_kappa_bounds_delta(tmp_path, capsys):
    k = tmp_path / "k.json"
    save_kernel(fixtures()["complete23"], k)
    code, out, _ = _run(capsys, ["kappa", "--kernel", str(k), "--oracle"])
    assert code == 0 and "6.0" in out
    code, out, _ = _run(capsys, ["bounds", "--kernel", str(k)])
    assert code == 0 and json.loads(out)
    code, out, _ = _run(capsys, ["delta", "--kernel", str(k), "--n", "20000", "--shards", "2"])
    assert code == 0 and json.loads(out)["bound_holds"]
    cfile = tmp_path / "c.json"
    cfile.write_text('{"C_star": 0.0}')
    code, _, _ = _run(capsys, ["bounds", "--kernel", str(k), "--constants", str(cfile)])
    assert code == 1


def test_cli_checks(capsys):
    code, out, _ = _run(capsys, ["verify", "--cases", "10", "--instances", "20"])
    assert code == 0 and json.loads(out)["ok"]
    code, out, _ = _run(capsys, ["oracle-check", "--cases", "10"])
    assert code == 0
    code, out, _ = _run(capsys, ["split-check", "--n", "20000"])
    assert code == 0
    code, _, err = _run(capsys, ["split-check", "--dist", "rademacher", "--n", "100"])
    assert code == 1


def test_cli_experiment(capsys):
    argv = ["experiment", "clt", "--family", "path", "--n-list", "10,20", "--samples", "3000",
            "--shards", "2", "--format", "csv"]
    code, a, _ = _run(capsys, argv)
    assert code == 0 and a == _run(capsys, argv)[1]
    lines = a.strip().splitlines()
    assert lines[0].startswith("# ") and len(lines) == 4
