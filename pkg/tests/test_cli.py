import json

import pytest

from patfolio.cli import LOCK_FILE, RunConfig, UsageError, cmd_run, main, store_lock
from patfolio.errors import StoreLockedError
from patfolio.portfolio import MatrixStore, RaoStore


def snapshot(directory):
    return {p.relative_to(directory): p.read_bytes() for p in sorted(directory.rglob("*")) if p.is_file()}


def run_args(fixtures, store, name, *inputs, extra=()):
    return [
        "run", *(str(fixtures / i) for i in inputs), "--name", name,
        "--basemap4", str(fixtures / "toy_ipc4.tsv"), "--layout4", str(fixtures / "toy_ipc4_layout.tsv"),
        "--basemap3", str(fixtures / "toy_ipc3.tsv"), "--layout3", str(fixtures / "toy_ipc3_layout.tsv"),
        "--store", str(store), "--year", "2014", *extra,
    ]


@pytest.mark.parametrize(
    "argv, expected",
    [
        (["--kind", "city-country", "--term", "amsterdam", "--country", "nl"], "ic/amsterdam and icn/nl and isd/2014$$"),
        (["--kind", "city-state", "--term", "boston", "--state", "MA"], "ic/boston and is/ma and isd/2014$$"),
        (
            ["--kind", "city-country", "--term", "beer-sheva", "--term", "beersheva", "--country", "il"],
            "(ic/beer-sheva or ic/beersheva) and icn/il and isd/2014$$",
        ),
        (
            ["--kind", "cbsa", "--group", "MA=Boston,Cambridge", "--group", "NH=Quincy"],
            "(ic/(Boston OR Cambridge) AND IS/MA) OR (ic/Quincy AND IS/NH) AND ISD/2014$$",
        ),
    ],
)
def test_query(capsys, argv, expected):
    assert main(["query", *argv]) == 0
    assert capsys.readouterr().out == expected + "\n"


def test_run_writes_outputs_and_summary(tmp_path, fixtures, capsys):
    store = tmp_path / "store"
    assert main(run_args(fixtures, store, "toulouse", "toulouse.txt")) == 0
    out = capsys.readouterr().out
    assert out == "toulouse: n_patents=4 variety=4 rao_delta=0.5122 true_diversity=2.0502\n"
    names = {p.name for p in (store / "runs" / "toulouse").iterdir()}
    assert names == {
        "coocc.dat", "cosine.net", "lcomp.net", "ipc4.vec", "ipc4.clu", "vos4.txt", "vos4n.txt",
        "ipc3.vec", "ipc3.clu", "vos3.txt", "vos3n.txt",
    }
    assert MatrixStore.load(store / "matrix.tsv").column("toulouse").counts.tolist() == [0, 3, 0, 2, 1, 1]
    assert RaoStore.load(store / "rao.tsv").names == ["toulouse"]
    assert not (store / LOCK_FILE).exists()


def test_run_without_ipc3_map(tmp_path, fixtures):
    cfg = RunConfig("paris", [fixtures / "paris.txt"], fixtures / "toy_ipc4.tsv", tmp_path / "s",
                    layout4=fixtures / "toy_ipc4_layout.tsv")
    result = cmd_run(cfg)
    assert len(result.outputs) == 8
    assert {p.name for p in result.outputs} >= {"coocc.dat", "cosine.net", "ipc4.vec", "ipc4.clu", "vos4.txt", "ipc3.vec"}
    assert all(p.exists() for p in result.outputs)


def test_rerun_same_name_leaves_store_untouched(tmp_path, fixtures, capsys):
    store = tmp_path / "store"
    assert main(run_args(fixtures, store, "tls", "toulouse.txt")) == 0
    before = snapshot(store)
    assert main(run_args(fixtures, store, "tls", "paris.txt")) == 1
    assert capsys.readouterr().err.startswith("name-conflict: ")
    assert snapshot(store) == before


def test_empty_record_file(tmp_path, fixtures, capsys):
    (tmp_path / "empty.txt").write_text("")
    store = tmp_path / "store"
    assert main(run_args(tmp_path, store, "empty", "empty.txt")[:1] + [str(tmp_path / "empty.txt")]
                + run_args(fixtures, store, "empty", "toulouse.txt")[2:]) == 1
    assert capsys.readouterr().err.startswith("empty-portfolio: ")
    assert not (store / "matrix.tsv").exists()


def test_failed_run_keeps_existing_store(tmp_path, fixtures):
    store = tmp_path / "store"
    assert main(run_args(fixtures, store, "tls", "toulouse.txt")) == 0
    before = snapshot(store)
    (tmp_path / "bad.txt").write_text("PN X1\nCL G06F\n")
    assert main(run_args(tmp_path, store, "bad", "bad.txt")[:2] + run_args(fixtures, store, "bad", "x")[2:]) == 1
    assert snapshot(store) == before


def test_run_reproducible(tmp_path, fixtures):
    for d in ("a", "b"):
        assert main(run_args(fixtures, tmp_path / d, "boston", "boston.tsv")) == 0
    assert snapshot(tmp_path / "a") == snapshot(tmp_path / "b")


def test_compare_identical_columns(tmp_path, fixtures, capsys):
    store = tmp_path / "store"
    for name in ("one", "two"):
        assert main(run_args(fixtures, store, name, "paris.txt")) == 0
    capsys.readouterr()
    assert main(["compare", "one", "two", "--store", str(store)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].split("\t")[:5] == ["one", "two", "1.000", "1.000", "1.000"]
    d = (store / "compare" / "distance.tsv").read_text().splitlines()
    assert d == ["\tone\ttwo", "one\t0\t0", "two\t0\t0"]
    for f in ("cosine_sets.net", "sets_map.txt", "sets_net.txt"):
        assert (store / "compare" / f).exists()


def test_compare_three_cities(tmp_path, fixtures, capsys):
    store = tmp_path / "store"
    for name, f in (("toulouse", "toulouse.txt"), ("paris", "paris.txt"), ("boston", "boston.tsv")):
        assert main(run_args(fixtures, store, name, f)) == 0
    capsys.readouterr()
    assert main(["compare", "--all", "--store", str(store)]) == 0
    rows = [ln.split("\t") for ln in capsys.readouterr().out.splitlines()[1:]]
    assert [r[:2] for r in rows] == [["toulouse", "paris"], ["toulouse", "boston"], ["paris", "boston"]]
    assert [r[2] for r in rows] == ["-0.552", "0.094", "0.053"]
    assert [r[4] for r in rows] == ["0.387", "0.609", "0.648"]


def test_compare_single_name_is_usage_error(tmp_path, fixtures, capsys):
    store = tmp_path / "store"
    main(run_args(fixtures, store, "tls", "toulouse.txt"))
    capsys.readouterr()
    assert main(["compare", "tls", "--store", str(store)]) == 2
    assert capsys.readouterr().err.startswith("usage: ")


def test_compare_unknown_name_lists_valid(tmp_path, fixtures, capsys):
    store = tmp_path / "store"
    main(run_args(fixtures, store, "tls", "toulouse.txt"))
    main(run_args(fixtures, store, "par", "paris.txt"))
    capsys.readouterr()
    assert main(["compare", "tls", "nyc", "--store", str(store)]) == 1
    err = capsys.readouterr().err
    assert err.startswith("unknown-name: ") and "nyc" in err and "tls, par" in err


def test_cohesion_k4(tmp_path, capsys):
    (tmp_path / "k4.txt").write_text("PN K1\nISD 20140101\nIC X||FR\nCL A01B\nCL B64C\nCL C07D\nCL G06F\n")
    assert main(["cohesion", str(tmp_path / "k4.txt"), "--name", "K4"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "\tNetwork Cohesion Measures\tK4"
    assert len(lines) == 17
    assert lines[6] == "6\tDensity\t1.000"
    assert lines[11] == "11\tClosure\t1.000"
    assert lines[14] == "14\tDiameter\t1"


def test_cohesion_json(tmp_path, fixtures, capsys):
    assert main(["cohesion", str(fixtures / "paris.txt"), "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["n"] == 5 and report["components"] == 1


def test_cohesion_single_class(tmp_path, capsys):
    (tmp_path / "one.txt").write_text("PN K1\nISD 20140101\nIC X||FR\nCL A01B 1/00\nCL A01B 3/00\n")
    assert main(["cohesion", str(tmp_path / "one.txt")]) == 1
    assert capsys.readouterr().err.startswith("degenerate-graph: ")


def test_config_file_and_flag_precedence(tmp_path, fixtures, capsys):
    config = {
        "set_name": "fromcfg",
        "inputs": [str(fixtures / "toulouse.txt")],
        "basemap4": str(fixtures / "toy_ipc4.tsv"),
        "layout4": str(fixtures / "toy_ipc4_layout.tsv"),
        "store_dir": str(tmp_path / "store"),
        "threshold": 0.5,
    }
    (tmp_path / "run.json").write_text(json.dumps(config))
    assert main(["run", "--config", str(tmp_path / "run.json"), "--name", "flag", str(fixtures / "paris.txt")]) == 0
    assert capsys.readouterr().out.startswith("flag: n_patents=4 variety=5 ")
    assert MatrixStore.load(tmp_path / "store" / "matrix.tsv").names == ["flag"]


def test_config_unknown_key(tmp_path, capsys):
    (tmp_path / "run.json").write_text('{"colour": "red"}')
    assert main(["run", "--config", str(tmp_path / "run.json")]) == 2
    assert "colour" in capsys.readouterr().err


def test_config_validation():
    with pytest.raises(UsageError):
        RunConfig("x", ["a"], "m", "s", threshold=1.5)
    with pytest.raises(UsageError):
        RunConfig("x", ["a"], "m", "s", counting="bag")


def test_invalid_name(tmp_path, fixtures, capsys):
    assert main(run_args(fixtures, tmp_path / "s", "much-too-long-name", "toulouse.txt")) == 1
    assert capsys.readouterr().err.startswith("invalid-name: ")


def test_lock_serializes_runs(tmp_path, fixtures, capsys):
    store = tmp_path / "store"
    with store_lock(store):
        with pytest.raises(StoreLockedError):
            with store_lock(store):
                pass
        assert main(run_args(fixtures, store, "tls", "toulouse.txt")) == 1
        assert capsys.readouterr().err.startswith("store-locked: ")
    assert not (store / LOCK_FILE).exists()
    assert main(run_args(fixtures, store, "tls", "toulouse.txt")) == 0


def test_export_subcommand(tmp_path, fixtures, capsys):
    store = tmp_path / "store"
    main(run_args(fixtures, store, "tls", "toulouse.txt"))
    capsys.readouterr()
    argv = ["export", "tls", "--store", str(store), "--basemap", str(fixtures / "toy_ipc4.tsv"),
            "--layout", str(fixtures / "toy_ipc4_layout.tsv"), "--out", str(tmp_path / "x")]
    assert main(argv) == 0
    for f in ("ipc4.vec", "ipc4.clu", "vos4.txt", "vos4n.txt"):
        assert (tmp_path / "x" / f).read_bytes() == (store / "runs" / "tls" / f).read_bytes()


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "patfolio", "query", "--kind", "cbsa", "--term", "Boulder",
                           "--state", "CO"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "IS/CO and isd/2014$$ and ic/Boulder"
