"""Compiler-diagnostic classification and per-student compile feature vectors.

Diagnostics are classified by ordered keyword rules (first match wins,
case-insensitive). The default taxonomy carries nine C-compiler error
categories plus twelve user-replaceable placeholder rules; together with
the implicit "Other" fallback that makes 22 error categories, and the
success category "None" brings the feature vector to 23 counts.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass

from .errors import DataFormatError
from .model import Cohort, CompileStatus

NONE_CATEGORY = "None"
OTHER_CATEGORY = "Other"

REGEX_PREFIX = "re:"

# (category name, diagnostic keyword) in priority order
_DEFAULT_RULES = [
    ("Syntax error", "syntax error"),
    ("Redefinition of main", "redefinition of 'main'"),
    ("Undeclared", "undeclared"),
    ("Invalid value", "invalid value"),
    ("Stray", "stray"),
    ("Invalid operands", "invalid operands"),
    ("Not a function", "not a function"),
    ("Conflicting", "conflicting"),
    ("Not use struct", "invalid use of 'struct'"),
]

_PLACEHOLDER_COUNT = 12


@dataclass(frozen=True)
class DiagnosticRule:
    """One classification rule: substring keyword or (with is_regex) a regex."""

    name: str
    matcher: str
    is_regex: bool = False

    def applies(self, text: str) -> bool:
        if self.is_regex:
            return re.search(self.matcher, text, re.IGNORECASE) is not None
        return self.matcher.lower() in text.lower()


@dataclass(frozen=True)
class DiagnosticTaxonomy:
    """Ordered rules plus the implicit None (success) and Other (fallback)."""

    rules: tuple[DiagnosticRule, ...]

    def __post_init__(self):
        names = [r.name for r in self.rules]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate category names: {dupes}")
        for reserved in (NONE_CATEGORY, OTHER_CATEGORY):
            if reserved in names:
                raise ValueError(f"category name {reserved!r} is reserved")

    @property
    def feature_names(self) -> tuple[str, ...]:
        """Vector layout: None first, then rules in order, Other last."""
        return (NONE_CATEGORY, *(r.name for r in self.rules), OTHER_CATEGORY)

    @property
    def n_features(self) -> int:
        return len(self.rules) + 2

    @property
    def error_categories(self) -> tuple[str, ...]:
        return self.feature_names[1:]


def default_taxonomy() -> DiagnosticTaxonomy:
    """Nine built-in C error rules plus twelve placeholder slots.

    The placeholders keep the 23-feature layout while leaving the rules
    for site-specific compilers to the taxonomy config file; their default
    keywords are inert tokens that never occur in real diagnostics.
    """
    rules = [DiagnosticRule(name, keyword) for name, keyword in _DEFAULT_RULES]
    for i in range(1, _PLACEHOLDER_COUNT + 1):
        rules.append(DiagnosticRule(f"Custom {i:02d}", f"custom-error-{i:02d}"))
    return DiagnosticTaxonomy(rules=tuple(rules))


def classify_diagnostic(text: str, taxonomy: DiagnosticTaxonomy) -> str:
    """Name of the first rule matching the text; Other when none does."""
    if not text:
        raise ValueError("diagnostic text must be non-empty for error events")
    for rule in taxonomy.rules:
        if rule.applies(text):
            return rule.name
    return OTHER_CATEGORY


@dataclass(frozen=True)
class CompileFeatureVector:
    """Per-student counts: [None, <error categories...>, Other]."""

    counts: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ValueError("feature counts must be non-negative")

    @property
    def total(self) -> int:
        return sum(self.counts)


def extract_features(
    cohort: Cohort, taxonomy: DiagnosticTaxonomy
) -> dict[str, CompileFeatureVector]:
    """Count compile outcomes per student into the taxonomy's feature layout.

    Every compile event lands in exactly one counter, so each student's
    vector sums to their number of submissions.
    """
    names = taxonomy.feature_names
    index = {name: i for i, name in enumerate(names)}
    counts = {sid: [0] * len(names) for sid in cohort.students}
    for rec in cohort.submissions:
        row = counts[rec.student_id]
        if rec.compile_status is CompileStatus.OK:
            row[0] += 1
        else:
            row[index[classify_diagnostic(rec.diagnostic_text, taxonomy)]] += 1
    return {
        sid: CompileFeatureVector(counts=tuple(row)) for sid, row in counts.items()
    }


def save_taxonomy(taxonomy: DiagnosticTaxonomy, path) -> None:
    """One rule per line: name<TAB>keyword, regexes prefixed with 're:'."""
    with open(path, "w", encoding="utf-8") as fh:
        for rule in taxonomy.rules:
            matcher = (REGEX_PREFIX + rule.matcher) if rule.is_regex else rule.matcher
            fh.write(f"{rule.name}\t{matcher}\n")


def load_taxonomy(path) -> DiagnosticTaxonomy:
    rules = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if "\t" not in line:
                raise DataFormatError(
                    "expected 'category_name<TAB>keyword_or_regex'", line=lineno
                )
            name, matcher = line.split("\t", 1)
            name = name.strip()
            matcher = matcher.strip()
            if not name or not matcher:
                raise DataFormatError("empty category name or matcher", line=lineno)
            is_regex = matcher.startswith(REGEX_PREFIX)
            if is_regex:
                matcher = matcher[len(REGEX_PREFIX):]
                try:
                    re.compile(matcher)
                except re.error as err:
                    raise DataFormatError(
                        f"bad regex {matcher!r}: {err}", line=lineno
                    ) from None
            rules.append(DiagnosticRule(name=name, matcher=matcher, is_regex=is_regex))
    try:
        return DiagnosticTaxonomy(rules=tuple(rules))
    except ValueError as err:
        raise DataFormatError(str(err)) from None


def write_features_csv(
    features: dict[str, CompileFeatureVector], taxonomy: DiagnosticTaxonomy, path
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["student_id", "none", *taxonomy.error_categories])
        for sid in sorted(features):
            writer.writerow([sid, *features[sid].counts])
