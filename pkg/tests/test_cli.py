import csv

import numpy as np
import pytest

from divknn.cli import main
from divknn.data import read_attrs, write_fvecs
from divknn.suites import SuiteResult


@pytest.fixture()
def dataset(tmp_path):
    rng = np.random.default_rng(90)
    base = str(tmp_path / "base.fvecs")
    queries = str(tmp_path / "queries.fvecs")
    write_fvecs(base, rng.normal(size=(120, 6)).astype(np.float32))
    write_fvecs(queries, rng.normal(size=(8, 6)).astype(np.float32))
    attrs = str(tmp_path / "attrs.txt")
    assert main(["gen-attrs", "--base", base, "--mode", "prob",
                 "--seed", "7", "--out", attrs]) == 0
    return base, queries, attrs


def read_csv(path):
    with open(path) as f:
        return list(csv.reader(f))


def strip_timing(rows):
    """Drop the latency_us column (the only nondeterministic one)."""
    header = rows[0]
    drop = header.index("latency_us")
    return [r[:drop] + r[drop + 1:] for r in rows]


def test_gen_attrs_prob_header(dataset):
    _, _, attrs = dataset
    t = read_attrs(attrs)
    assert t.c == 20 and t.n == 120
    with open(attrs) as f:
        assert f.readline().strip() == "#c=20"


def test_gen_attrs_clus_distinct_ids(tmp_path, dataset):
    base, _, _ = dataset
    out = str(tmp_path / "clus.txt")
    assert main(["gen-attrs", "--base", base, "--mode", "clus",
                 "--c", "20", "--seed", "3", "--out", out]) == 0
    t = read_attrs(out)
    assert len({row[0] for row in t.atb}) == 20


def test_gen_attrs_missing_base_flag_is_usage_error(capsys):
    assert main(["gen-attrs", "--mode", "prob", "--out", "/tmp/x.txt"]) == 2


def test_gen_attrs_nonexistent_file_is_io_error(tmp_path):
    assert main(["gen-attrs", "--base", str(tmp_path / "nope.fvecs"),
                 "--mode", "prob", "--out", str(tmp_path / "o.txt")]) == 3


def test_run_ann_ratio_is_one(dataset, tmp_path):
    base, queries, attrs = dataset
    out = str(tmp_path / "ann.csv")
    assert main(["run", "--base", base, "--queries", queries, "--attrs",
                 attrs, "--algo", "ann", "--k", "5", "--out", out]) == 0
    rows = read_csv(out)
    header = rows[0]
    ratio_col = header.index("approx_ratio")
    recall_col = header.index("recall")
    data_rows = [r for r in rows[1:] if r[0].isdigit()]
    assert len(data_rows) == 8
    for r in data_rows:
        assert float(r[ratio_col]) == 1.0
        assert float(r[recall_col]) == 1.0


def test_run_pmean_p1_matches_ann(dataset, tmp_path):
    base, queries, attrs = dataset
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    assert main(["run", "--base", base, "--queries", queries, "--attrs",
                 attrs, "--algo", "ann", "--k", "5", "--out", a]) == 0
    assert main(["run", "--base", base, "--queries", queries, "--attrs",
                 attrs, "--algo", "pmean", "--p", "1", "--k", "5",
                 "--out", b]) == 0
    ra, rb = read_csv(a), read_csv(b)
    cols = [ra[0].index(c) for c in ("approx_ratio", "recall", "entropy",
                                     "inverse_simpson", "distinct_count")]
    for qa, qb in zip(ra[1:], rb[1:]):
        if not qa[0].isdigit():
            continue
        for c in cols:
            assert qa[c] == qb[c]


def test_run_incompatible_flags(dataset, tmp_path):
    base, queries, attrs = dataset
    out = str(tmp_path / "x.csv")
    common = ["run", "--base", base, "--queries", queries, "--attrs", attrs,
              "--out", out]
    assert main(common + ["--algo", "nash", "--k", "3", "--kprime", "2"]) == 2
    assert main(common + ["--algo", "div", "--k", "3"]) == 2          # no k'
    assert main(common + ["--algo", "ann", "--k", "3", "--p", "0.5"]) == 2
    assert main(common + ["--algo", "nash", "--k", "3",
                          "--pool-L", "10"]) == 2
    assert main(common + ["--algo", "pmean", "--k", "3", "--p", "2"]) == 2
    assert main(common + ["--algo", "nash", "--k", "3",
                          "--eta", "-1"]) == 2
    assert main(common + ["--algo", "nash"]) == 2                     # no k


def test_run_all_algorithms_produce_csv(dataset, tmp_path):
    base, queries, attrs = dataset
    cases = [
        ["--algo", "ann", "--k", "4"],
        ["--algo", "div", "--k", "4", "--kprime", "1"],
        ["--algo", "nash", "--k", "4", "--eta", "0.01"],
        ["--algo", "pmean", "--k", "4", "--p", "-1"],
        ["--algo", "multi-nash", "--k", "4"],
        ["--algo", "multi-pmean", "--k", "4", "--p", "0.5",
         "--pool-L", "50"],
        ["--algo", "multi-div", "--k", "4", "--kprime", "2"],
        ["--algo", "fetch-union", "--k", "4", "--pool-L", "40"],
    ]
    for i, extra in enumerate(cases):
        out = str(tmp_path / f"case{i}.csv")
        args = ["run", "--base", base, "--queries", queries, "--attrs",
                attrs, "--out", out] + extra
        assert main(args) == 0, extra
        rows = read_csv(out)
        assert rows[0][0] == "query_id"
        assert rows[-1][0] == "qps"
        assert len([r for r in rows[1:] if r[0].isdigit()]) == 8


def test_run_deterministic_across_threads(dataset, tmp_path):
    base, queries, attrs = dataset
    outs = []
    for i, threads in enumerate(("1", "1", "4")):
        out = str(tmp_path / f"det{i}.csv")
        assert main(["run", "--base", base, "--queries", queries,
                     "--attrs", attrs, "--algo", "nash", "--k", "5",
                     "--eta", "0.5", "--seed", "11", "--threads", threads,
                     "--out", out]) == 0
        outs.append(strip_timing(read_csv(out)))
    assert outs[0] == outs[1] == outs[2]


def test_run_config_file_precedence(dataset, tmp_path):
    base, queries, attrs = dataset
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# benchmark defaults\nk=3\neta=0.5\nalgo=nash\n")
    out1 = str(tmp_path / "cfg1.csv")
    assert main(["run", "--base", base, "--queries", queries, "--attrs",
                 attrs, "--config", str(cfg), "--out", out1]) == 0
    rows = read_csv(out1)
    k_col, eta_col = rows[0].index("k"), rows[0].index("eta")
    assert rows[1][k_col] == "3" and rows[1][eta_col] == "0.5"
    # flag overrides config
    out2 = str(tmp_path / "cfg2.csv")
    assert main(["run", "--base", base, "--queries", queries, "--attrs",
                 attrs, "--config", str(cfg), "--eta", "2", "--out",
                 out2]) == 0
    rows2 = read_csv(out2)
    assert rows2[1][eta_col] == "2"


def test_run_preset_defaults(dataset, tmp_path):
    base, queries, attrs = dataset
    out = str(tmp_path / "preset.csv")
    assert main(["run", "--base", base, "--queries", queries, "--attrs",
                 attrs, "--preset", "sift-prob", "--algo", "nash", "--k",
                 "4", "--out", out]) == 0
    rows = read_csv(out)
    assert rows[1][rows[0].index("eta")] == "0.01"
    assert main(["run", "--base", base, "--queries", queries, "--attrs",
                 attrs, "--preset", "bogus", "--algo", "nash", "--k", "4",
                 "--out", out]) == 2


def test_run_multi_attribute_per_class_columns(tmp_path):
    rng = np.random.default_rng(91)
    base = str(tmp_path / "b.fvecs")
    queries = str(tmp_path / "q.fvecs")
    write_fvecs(base, rng.normal(size=(60, 8)).astype(np.float32))
    write_fvecs(queries, rng.normal(size=(5, 8)).astype(np.float32))
    attrs = str(tmp_path / "a.txt")
    assert main(["gen-attrs", "--base", base, "--mode", "clus", "--c", "3",
                 "--chunks", "2", "--seed", "1", "--out", attrs]) == 0
    out = str(tmp_path / "m.csv")
    assert main(["run", "--base", base, "--queries", queries, "--attrs",
                 attrs, "--algo", "multi-nash", "--k", "4", "--out",
                 out]) == 0
    rows = read_csv(out)
    assert "entropy_class0" in rows[0] and "inverse_simpson_class1" in rows[0]


def test_run_entropy_base_flag(dataset, tmp_path):
    base, queries, attrs = dataset
    nat = str(tmp_path / "nat.csv")
    bits = str(tmp_path / "bits.csv")
    for out, extra in ((nat, []), (bits, ["--entropy-base", "2"])):
        assert main(["run", "--base", base, "--queries", queries, "--attrs",
                     attrs, "--algo", "nash", "--k", "5", "--eta", "0.01",
                     "--out", out] + extra) == 0
    rn, rb = read_csv(nat), read_csv(bits)
    col = rn[0].index("entropy")
    import math
    for qa, qb in zip(rn[1:], rb[1:]):
        if qa[0].isdigit() and float(qa[col]) > 0:
            assert float(qb[col]) == pytest.approx(
                float(qa[col]) / math.log(2), rel=1e-9)


def test_verify_passes(capsys):
    assert main(["verify", "--suite", "ersp", "--trials", "15"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out


def test_verify_failure_exit_code(monkeypatch, capsys):
    from divknn import suites as suites_mod

    def failing(trials=0, seed=0):
        return SuiteResult(name="synthetic failure", checks=1, violations=1)

    monkeypatch.setitem(suites_mod.SUITES, "ersp", failing)
    assert main(["verify", "--suite", "ersp"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_verify_alpha_flag():
    assert main(["verify", "--suite", "alpha", "--trials", "20",
                 "--alpha", "0.5"]) == 0


def test_missing_subcommand_usage():
    assert main([]) == 2
