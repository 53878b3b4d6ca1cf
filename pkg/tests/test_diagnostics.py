"""Diagnostic classification and compile feature vectors."""

import pytest

from studentrisk.diagnostics import (
    NONE_CATEGORY,
    OTHER_CATEGORY,
    CompileFeatureVector,
    DiagnosticRule,
    DiagnosticTaxonomy,
    classify_diagnostic,
    default_taxonomy,
    extract_features,
    load_taxonomy,
    save_taxonomy,
)
from studentrisk.errors import DataFormatError
from studentrisk.model import GroupingSpec, assemble_cohort

from conftest import _rec
from studentrisk.model import CompileStatus

BUILTIN_RULE_NAMES = [
    "Syntax error",
    "Redefinition of main",
    "Undeclared",
    "Invalid value",
    "Stray",
    "Invalid operands",
    "Not a function",
    "Conflicting",
    "Not use struct",
]


class TestDefaultTaxonomy:
    def test_feature_count(self):
        tax = default_taxonomy()
        assert len(tax.error_categories) == 22
        assert tax.n_features == 23
        assert tax.feature_names[0] == NONE_CATEGORY
        assert tax.feature_names[-1] == OTHER_CATEGORY

    def test_builtin_rules_first_and_in_order(self):
        tax = default_taxonomy()
        assert [r.name for r in tax.rules[:9]] == BUILTIN_RULE_NAMES

    def test_has_syntax_error_category(self):
        assert "Syntax error" in default_taxonomy().feature_names

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            DiagnosticTaxonomy(
                rules=(DiagnosticRule("A", "x"), DiagnosticRule("A", "y"))
            )

    def test_reserved_names_rejected(self):
        with pytest.raises(ValueError, match="reserved"):
            DiagnosticTaxonomy(rules=(DiagnosticRule("None", "x"),))


class TestClassify:
    def test_keyword_hit(self):
        tax = default_taxonomy()
        assert classify_diagnostic("'x' undeclared (first use)", tax) == "Undeclared"

    def test_fallback(self):
        tax = default_taxonomy()
        assert classify_diagnostic("linker exploded", tax) == OTHER_CATEGORY

    def test_first_match_wins(self):
        tax = default_taxonomy()
        text = "syntax error near 'x'; also 'y' undeclared"
        assert classify_diagnostic(text, tax) == "Syntax error"

    def test_agrees_with_sequential_rule_oracle(self):
        # reference semantics: walk the rules in order, return the first hit
        tax = default_taxonomy()
        samples = [
            "prog.c: syntax error before token",
            "redefinition of 'main' at line 3",
            "variable 'k' undeclared",
            "invalid operands to binary +",
            "stray '\\302'",
            "conflicting types for 'f'",
            "invalid use of 'struct data'",
            "totally novel message",
            "invalid value and also 'z' undeclared",
        ]
        for text in samples:
            expected = OTHER_CATEGORY
            for rule in tax.rules:
                if rule.applies(text):
                    expected = rule.name
                    break
            assert classify_diagnostic(text, tax) == expected

    def test_case_insensitive(self):
        tax = default_taxonomy()
        assert classify_diagnostic("SYNTAX ERROR", tax) == "Syntax error"

    def test_empty_text_rejected(self):
        with pytest.raises(ValueError):
            classify_diagnostic("", default_taxonomy())

    def test_regex_rule(self):
        tax = DiagnosticTaxonomy(
            rules=(DiagnosticRule("Exit codes", r"exit code \d+", is_regex=True),)
        )
        assert classify_diagnostic("died with exit code 137", tax) == "Exit codes"
        assert classify_diagnostic("died with exit code x", tax) == OTHER_CATEGORY


def tiny_cohort(events):
    """events: list of (student, status, diag) on one assignment."""
    submissions = [
        _rec(sid, "a1", i, 1, status=status, diag=diag)
        for i, (sid, status, diag) in enumerate(events)
    ]
    students = {sid for sid, _, _ in events}
    outcomes = {sid: 70.0 for sid in students}
    grouping = GroupingSpec.from_mapping({"a1": 1})
    return assemble_cohort(submissions, outcomes, grouping)


class TestExtractFeatures:
    def test_direct_counting(self):
        tax = default_taxonomy()
        cohort = tiny_cohort(
            [
                ("s1", CompileStatus.OK, ""),
                ("s1", CompileStatus.OK, ""),
                ("s1", CompileStatus.ERROR, "'x' undeclared"),
            ]
        )
        vec = extract_features(cohort, tax)["s1"]
        by_name = dict(zip(tax.feature_names, vec.counts))
        assert by_name[NONE_CATEGORY] == 2
        assert by_name["Undeclared"] == 1
        assert vec.total == 3

    def test_zero_event_student_gets_zero_vector(self):
        tax = default_taxonomy()
        cohort = tiny_cohort([("s1", CompileStatus.OK, "")])
        # outcome-only student via direct assembly
        submissions = list(cohort.submissions)
        outcomes = dict(cohort.outcomes)
        outcomes["s2"] = 90.0
        cohort2 = assemble_cohort(submissions, outcomes, cohort.grouping)
        vec = extract_features(cohort2, tax)["s2"]
        assert vec.total == 0

    def test_line_by_line_recount(self):
        tax = default_taxonomy()
        events = [
            ("s1", CompileStatus.OK, ""),
            ("s1", CompileStatus.ERROR, "syntax error before 'x'"),
            ("s2", CompileStatus.ERROR, "stray '\\302'"),
            ("s2", CompileStatus.ERROR, "no keyword here"),
            ("s3", CompileStatus.OK, ""),
            ("s3", CompileStatus.ERROR, "conflicting types"),
            ("s4", CompileStatus.OK, ""),
            ("s5", CompileStatus.ERROR, "'y' undeclared"),
        ]
        cohort = tiny_cohort(events)
        vectors = extract_features(cohort, tax)
        # independent recount straight off the event list
        expected = {sid: [0] * tax.n_features for sid in cohort.students}
        index = {name: i for i, name in enumerate(tax.feature_names)}
        for sid, status, diag in events:
            if status is CompileStatus.OK:
                expected[sid][0] += 1
            else:
                expected[sid][index[classify_diagnostic(diag, tax)]] += 1
        for sid in cohort.students:
            assert list(vectors[sid].counts) == expected[sid]

    def test_partition_property(self):
        tax = default_taxonomy()
        events = [
            ("s1", CompileStatus.OK, ""),
            ("s1", CompileStatus.ERROR, "anything"),
            ("s1", CompileStatus.ERROR, "invalid value"),
        ]
        cohort = tiny_cohort(events)
        vec = extract_features(cohort, tax)["s1"]
        assert vec.total == 3

    def test_event_order_irrelevant(self):
        tax = default_taxonomy()
        events = [
            ("s1", CompileStatus.ERROR, "syntax error"),
            ("s1", CompileStatus.OK, ""),
            ("s1", CompileStatus.ERROR, "stray marker"),
        ]
        a = extract_features(tiny_cohort(events), tax)["s1"]
        b = extract_features(tiny_cohort(events[::-1]), tax)["s1"]
        assert a == b

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            CompileFeatureVector(counts=(1, -1))


class TestTaxonomyFile:
    def test_round_trip(self, tmp_path):
        tax = DiagnosticTaxonomy(
            rules=(
                DiagnosticRule("Syntax error", "syntax error"),
                DiagnosticRule("Timeouts", r"timed? ?out", is_regex=True),
                DiagnosticRule("Weird", "unusual keyword"),
            )
        )
        path = tmp_path / "taxonomy.cfg"
        save_taxonomy(tax, path)
        assert load_taxonomy(path) == tax

    def test_default_round_trip(self, tmp_path):
        tax = default_taxonomy()
        path = tmp_path / "taxonomy.cfg"
        save_taxonomy(tax, path)
        assert load_taxonomy(path) == tax

    def test_missing_tab_rejected(self, tmp_path):
        path = tmp_path / "taxonomy.cfg"
        path.write_text("Syntax error without tab\n", encoding="utf-8")
        with pytest.raises(DataFormatError, match="TAB"):
            load_taxonomy(path)

    def test_bad_regex_rejected(self, tmp_path):
        path = tmp_path / "taxonomy.cfg"
        path.write_text("Broken\tre:[unclosed\n", encoding="utf-8")
        with pytest.raises(DataFormatError, match="regex"):
            load_taxonomy(path)

    def test_comments_and_blanks_skipped(self, tmp_path):
        path = tmp_path / "taxonomy.cfg"
        path.write_text(
            "# site rules\n\nSyntax error\tsyntax error\n", encoding="utf-8"
        )
        tax = load_taxonomy(path)
        assert [r.name for r in tax.rules] == ["Syntax error"]
