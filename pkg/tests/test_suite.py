import json
from importlib import resources

import jsonschema
import pytest

from fsforms import suite as S

SCHEMA = json.loads((resources.files("fsforms") / "schema" / "report.schema.json").read_text())
EXPECTED = {"ym-core": 5, "ym-corner": 9, "brst": 6, "aux-b2": 9}


def test_registered_suites():
    assert S.available_suites() == sorted(EXPECTED)


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_suite_passes(name):
    report = S.run_suite(name)
    assert len(report.cases) == EXPECTED[name]
    failures = [(c.name, c.residual, c.error) for c in report.cases if c.verdict != "pass"]
    assert not failures
    jsonschema.validate(report.to_dict(), SCHEMA)


def test_unknown_suite():
    with pytest.raises(S.UnknownSuiteError, match="nope"):
        S.run_suite("nope")


def test_corrupted_curvature_sign_fails_with_residual():
    case = next(c for c in S.load_suite("ym-core") if c.name == "curv-E")
    bad = S.TheoremCase(case.name, case.lhs, "-bracket(F, E)", case.mode, case.provenance, case.env)
    result = S.run_case(bad)
    assert result.verdict == "fail"
    # twice [delta w, E] plus its bracket partner
    assert "2*E*delta(w)" in result.residual and "2*delta(w)*E" in result.residual


def test_curvature_cases_hold_with_expanded_curvature():
    for case in S.load_suite("ym-core"):
        if "F" in case.rhs:
            expanded = S.TheoremCase(case.name, case.lhs, case.rhs.replace("F", "curv()"),
                                     case.mode, case.provenance, case.env)
            assert S.run_case(expanded).verdict == "pass"


def test_failing_case_carries_residual_and_validates():
    bad = S.TheoremCase("broken", "dH(E)", "delta(E)")
    report = S.run_cases("scratch", [bad])
    d = report.to_dict()
    assert d["cases"][0]["verdict"] == "fail" and d["cases"][0]["residual"]
    jsonschema.validate(d, SCHEMA)


def test_dsl_error_reported_with_case_name():
    result = S.run_case(S.TheoremCase("typo", "dH(E", "E"))
    assert result.verdict == "fail"
    assert result.error.startswith("case typo:")


def test_degree_mismatch_is_a_failure_not_a_crash():
    result = S.run_case(S.TheoremCase("mismatch", "E", "A"))
    assert result.verdict == "fail" and result.error


def test_every_sign_mutant_is_killed():
    survivors, total = [], 0
    for name in EXPECTED:
        for case in S.load_suite(name):
            for m in S.mutation_run(case):
                if m.equivalent:
                    continue
                total += 1
                if not m.killed:
                    survivors.append((name, case.name, m.label))
    assert total > 50
    assert not survivors


def test_sign_mutants_of_a_source():
    labels = [src for _, src in S.sign_mutants("a - 1/2*b")]
    assert labels == ["a + 1/2*b", "a - (-1/2)*b", "-(a - 1/2*b)"]


def test_reports_deterministic_across_runs_and_jobs():
    a = S.run_suite("aux-b2").to_dict(timings=False)
    b = S.run_suite("aux-b2").to_dict(timings=False)
    c = S.run_suite("aux-b2", jobs=4).to_dict(timings=False)
    assert a == b == c


def test_suite_dir_override(tmp_path, monkeypatch):
    (tmp_path / "mini.suite").write_text(
        "let T = tr(E*w)\n"
        "case nil\n"
        "lhs: delta(delta(T))\n"
        "rhs: 0\n"
        "mode: exact\n"
        "provenance: nilpotency\n"
        "case long\n"
        "lhs: dH(A)\n"
        "rhs: delta(A) + bracket(w, A)\n"
        "  - d(w)\n")
    monkeypatch.setenv(S.SUITE_DIR_ENV, str(tmp_path))
    assert S.available_suites() == ["mini"]
    report = S.run_suite("mini")
    assert [c.verdict for c in report.cases] == ["pass", "pass"]


@pytest.mark.parametrize("text, fragment", [
    ("lhs: E\n", "unexpected line"),
    ("case x\nlhs: E\n", "lacks"),
    ("case x\nlhs: E\nrhs: E\ncase x\nlhs: E\nrhs: E\n", "duplicate"),
    ("case x\nlhs: E\nrhs: E\nmode: sideways\n", "unknown mode"),
    ("let = E\n", "malformed let"),
    ("  E\n", "continuation"),
])
def test_malformed_suite_files(text, fragment):
    with pytest.raises(S.SuiteError, match=fragment):
        S.parse_suite(text)
