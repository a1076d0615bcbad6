import io
import json

import pytest
from hypothesis import given, settings, strategies as st

from spectral_hecke import cli
from spectral_hecke.cli import ReportDocument, emit_report, parse_report, run_subcommand


def run(argv):
    out = io.BytesIO()
    code = run_subcommand(argv, out)
    return code, out.getvalue()


def test_homology_rank_table():
    code, raw = run(["homology", "--p", "3", "--N", "1", "--m", "1", "--r", "2", "--max-deg", "4"])
    assert code == 0
    doc = json.loads(raw)
    assert doc["tables"]["degree_ranks"] == [1, 2, 3, 4, 5]
    assert list(doc) == ["params", "checks", "tables", "timing_ms"]
    assert list(doc["params"]) == ["p", "m", "exponents", "rank", "trunc", "max_degree"]
    assert doc["timing_ms"] == 0


def test_cyclic_degree_ranks():
    code, raw = run(["homology", "--p", "5", "--N", "2", "--m", "1", "--max-deg", "4"])
    assert code == 0 and json.loads(raw)["tables"]["degree_ranks"] == [1, 1, 1, 1, 1]


def test_satake_non_regular_exit_one_with_witness():
    code, raw = run(["satake-check", "--type", "A1", "--pm", "9", "--u", "1"])
    assert code == 1
    doc = json.loads(raw)
    assert doc["checks"][0]["verdict"] == "fail"
    assert "root (2,)" in doc["checks"][0]["detail"]


@pytest.mark.parametrize("argv", [
    ["homology", "--p", "3", "--q", "4", "--m", "2"],          # v_3(3) = 1 < 2
    ["homology", "--p", "3", "--N", "1", "--m", "2"],          # m > N
    ["homology", "--p", "6", "--N", "1"],
    ["satake-check", "--pm", "12", "--u", "5"],
    ["satake-check", "--pm", "9", "--u", "3"],                 # not a unit
    ["spectral-hecke", "--p", "3", "--N", "1", "--trunc", "0"],
])
def test_invalid_input_exit_two(argv):
    code, _ = run(argv)
    assert code == 2


def test_q_input_converts_to_valuation():
    code, raw = run(["homology", "--p", "3", "--q", "19", "--m", "1", "--max-deg", "2"])
    assert code == 0
    assert json.loads(raw)["params"]["exponents"] == [2]


def test_expected_fail_exits_zero():
    code, raw = run(["model-compare", "--p", "2", "--N", "1", "--m", "1"])
    assert code == 0
    verdicts = [c["verdict"] for c in json.loads(raw)["checks"]]
    assert "expected-fail" in verdicts and "fail" not in verdicts


def test_bockstein_index_family():
    code, raw = run(["bockstein", "--p", "3", "--N", "2", "--m", "1"])
    assert code == 0
    checks = {c["name"]: c["verdict"] for c in json.loads(raw)["checks"]}
    assert checks["β(H¹) = p^(N-m)·H²_ind"] == "pass"
    assert checks["β(H¹) = H²_ind"] == "expected-fail"


@pytest.mark.parametrize("argv", [
    ["cohomology", "--p", "3", "--N", "1", "--m", "1", "--r", "2", "--max-deg", "3"],
    ["decompose2", "--p", "5", "--N", "1", "--m", "1", "--r", "2"],
    ["spectral-hecke", "--p", "3", "--exponents", "1,2", "--m", "1", "--trunc", "2", "--max-deg", "3"],
    ["torus-dha", "--p", "3", "--N", "1", "--m", "1", "--r", "1", "--type", "A1", "--max-deg", "2"],
    ["localize", "--type", "A1", "--pm", "25", "--u", "2", "--k", "3"],
    ["derived-satake", "--p", "5", "--N", "1", "--m", "1", "--r", "1", "--type", "A1", "--u", "2"],
    ["hurewicz", "--p", "3", "--N", "2", "--m", "1", "--r", "2"],
    ["tangent-table", "--p", "5", "--N", "1", "--m", "1", "--r", "2"],
])
def test_subcommands_pass(argv):
    code, raw = run(argv)
    assert code == 0, raw.decode()


def test_text_format_is_fixed_width():
    code, raw = run(["homology", "--p", "3", "--N", "1", "--m", "1", "--format", "text", "--max-deg", "2"])
    assert code == 0
    lines = raw.decode().splitlines()
    assert lines[0].startswith("params")
    assert any(line.startswith("degree_ranks") for line in lines)


def test_empty_document_is_valid():
    doc = ReportDocument({"p": 3, "m": 1, "exponents": [], "rank": 0, "trunc": None, "max_degree": 0})
    d = json.loads(emit_report(doc))
    assert d["checks"] == []
    assert d["tables"] == {"degree_ranks": [], "structure_constants": []}


rows = st.fixed_dictionaries({k: st.integers(0, 20) for k in
                              ("deg_a", "idx_a", "deg_b", "idx_b", "deg_c", "idx_c", "value")})
checks = st.fixed_dictionaries({"name": st.text(max_size=20), "verdict": st.sampled_from(["pass", "fail", "expected-fail"]),
                                "detail": st.text(max_size=30)})


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 7), st.integers(1, 3), st.lists(st.integers(1, 3), max_size=3), st.lists(checks, max_size=4),
       st.lists(st.integers(0, 50), max_size=7), st.lists(rows, max_size=5), st.integers(0, 10 ** 6))
def test_round_trip(p, m, exps, cks, ranks, sc, t):
    params = {"p": p, "m": m, "exponents": exps, "rank": len(exps), "trunc": None, "max_degree": 4}
    doc = ReportDocument(params, cks, ranks, sc, t)
    back = parse_report(emit_report(doc))
    assert back.to_dict() == doc.to_dict()
    assert emit_report(back) == emit_report(doc)


def test_deterministic_output():
    argv = ["cohomology", "--p", "3", "--N", "1", "--m", "1", "--r", "2", "--max-deg", "3"]
    assert run(argv)[1] == run(argv)[1]


def test_timing_flag():
    code, raw = run(["homology", "--p", "3", "--N", "1", "--m", "1", "--timing"])
    assert code == 0 and json.loads(raw)["timing_ms"] >= 0


@pytest.mark.parametrize("p,N,m,r", [(3, 2, 1, 2), (2, 1, 1, 1)])
def test_grid_point_matches_subcommands(p, N, m, r):
    point = cli.grid_point(p, N, m, r, 2, 4)
    verdicts = {c["name"]: c["verdict"] for c in point["checks"]}
    base = ["--p", str(p), "--N", str(N), "--m", str(m), "--r", str(r), "--max-deg", "4"]
    for name in ["homology", "cohomology", "bockstein", "decompose2", "model-compare", "hurewicz",
                 "tangent-table", "spectral-hecke"]:
        extra = ["--trunc", "2"] if name == "spectral-hecke" else []
        code, raw = run([name] + base + extra)
        for c in json.loads(raw)["checks"]:
            assert verdicts[f"{name}: {c['name']}"] == c["verdict"]


def test_verify_all_small_grid():
    code, raw = run(["verify-all", "--grid", "small"])
    assert code == 0
    docs = json.loads(raw)
    keys = [ReportDocument.from_dict(d).sort_key() for d in docs]
    assert keys == sorted(keys)
