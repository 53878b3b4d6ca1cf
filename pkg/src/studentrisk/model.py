"""Canonical data model: submission logs, outcomes, assignment grouping, cohorts.

Every other stage of the pipeline consumes the immutable ``Cohort`` built here.
Input files are plain CSV (RFC-4180, UTF-8) with the headers listed next to
each loader.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

from .errors import CohortError, DataFormatError

FAIL_THRESHOLD = 60.0

SUBMISSIONS_HEADER = [
    "student_id",
    "assignment_id",
    "timestamp",
    "submission_order",
    "plagiarism_flag",
    "compile_status",
    "diagnostic_text",
]
OUTCOMES_HEADER = ["student_id", "final_score"]
GROUPING_HEADER = ["assignment_id", "group_index"]


class Outcome(Enum):
    PASS = "pass"
    FAIL = "fail"


class CompileStatus(Enum):
    OK = "ok"
    ERROR = "error"


def label_outcome(score: float) -> Outcome:
    """Fail strictly below 60; a score of exactly 60 passes."""
    return Outcome.FAIL if score < FAIL_THRESHOLD else Outcome.PASS


def parse_timestamp(text: str) -> datetime:
    """Parse an ISO-8601 instant; naive values are taken as UTC."""
    cleaned = text.strip()
    if cleaned.endswith(("Z", "z")):
        cleaned = cleaned[:-1] + "+00:00"
    ts = datetime.fromisoformat(cleaned)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    ts = ts.astimezone(timezone.utc)
    return ts.isoformat().replace("+00:00", "Z")


@dataclass(frozen=True)
class SubmissionRecord:
    """One submission event from the course log."""

    student_id: str
    assignment_id: str
    timestamp: datetime
    submission_order: int
    plagiarism_flag: bool
    compile_status: CompileStatus
    diagnostic_text: str = ""

    def __post_init__(self):
        if not self.student_id:
            raise DataFormatError("empty student_id", field="student_id")
        if not self.assignment_id:
            raise DataFormatError("empty assignment_id", field="assignment_id")
        if self.submission_order < 1:
            raise DataFormatError(
                f"submission_order must be >= 1, got {self.submission_order}",
                field="submission_order",
            )
        if self.compile_status is CompileStatus.OK and self.diagnostic_text:
            raise DataFormatError(
                "diagnostic_text must be empty when compile_status is 'ok'",
                field="diagnostic_text",
            )


@dataclass(frozen=True)
class GroupingSpec:
    """Assignment -> group index mapping with contiguous groups 1..g."""

    groups: dict[str, int]
    g: int

    @classmethod
    def from_mapping(cls, groups: dict[str, int]) -> "GroupingSpec":
        if not groups:
            raise DataFormatError("grouping is empty")
        g = max(groups.values())
        seen = set(groups.values())
        if min(seen) < 1:
            raise DataFormatError(f"group indices must be >= 1, got {min(seen)}")
        missing = sorted(set(range(1, g + 1)) - seen)
        if missing:
            raise DataFormatError(
                f"group indices must form a contiguous range 1..{g}; "
                f"missing {missing}"
            )
        return cls(groups=dict(groups), g=g)

    def assignments_in_group(self, group_index: int) -> list[str]:
        return sorted(a for a, j in self.groups.items() if j == group_index)


@dataclass(frozen=True)
class Cohort:
    """All students under analysis: submissions, scores, and grouping.

    The student universe is the union of ids seen in submissions and
    outcomes, in lexicographic order. Construction goes through
    ``assemble_cohort`` which enforces the cross-file invariants.
    """

    submissions: tuple[SubmissionRecord, ...]
    outcomes: dict[str, float]
    grouping: GroupingSpec
    students: tuple[str, ...] = field(default=())

    @property
    def size(self) -> int:
        return len(self.students)

    def label(self, student_id: str) -> Outcome:
        return label_outcome(self.outcomes[student_id])

    def students_by_label(self) -> tuple[list[str], list[str]]:
        """(failing students, passing students), each in universe order."""
        fail = [s for s in self.students if self.label(s) is Outcome.FAIL]
        ok = [s for s in self.students if self.label(s) is Outcome.PASS]
        return fail, ok


def assemble_cohort(
    submissions: list[SubmissionRecord],
    outcomes: dict[str, float],
    grouping: GroupingSpec,
) -> Cohort:
    """Cross-validate the three inputs and build an immutable cohort.

    Students present only in outcomes are kept as zero-activity students;
    students with submissions but no outcome are an error.
    """
    submitting = {r.student_id for r in submissions}
    unlabeled = sorted(submitting - outcomes.keys())
    if unlabeled:
        raise CohortError(
            "students have submissions but no outcome: " + ", ".join(unlabeled)
        )
    ungrouped = sorted(
        {r.assignment_id for r in submissions} - grouping.groups.keys()
    )
    if ungrouped:
        raise CohortError(
            "assignments missing from the grouping: " + ", ".join(ungrouped)
        )
    for student, score in outcomes.items():
        if not 0.0 <= score <= 100.0:
            raise CohortError(f"score out of range for {student}: {score}")
    universe = tuple(sorted(submitting | outcomes.keys()))
    return Cohort(
        submissions=tuple(submissions),
        outcomes=dict(outcomes),
        grouping=grouping,
        students=universe,
    )


def _read_rows(path, expected_header: list[str]):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file, expected header") from None
        if header != expected_header:
            raise DataFormatError(
                f"{path}: bad header {header!r}, expected {expected_header!r}",
                line=1,
            )
        yield from ((lineno, row) for lineno, row in enumerate(reader, start=2))


def load_submissions(path) -> list[SubmissionRecord]:
    """Load submissions.csv, preserving row order."""
    records = []
    for lineno, row in _read_rows(path, SUBMISSIONS_HEADER):
        if len(row) != len(SUBMISSIONS_HEADER):
            raise DataFormatError(
                f"expected {len(SUBMISSIONS_HEADER)} fields, got {len(row)}",
                line=lineno,
            )
        sid, aid, ts_text, order_text, plag_text, status_text, diag = row
        try:
            ts = parse_timestamp(ts_text)
        except ValueError:
            raise DataFormatError(
                f"bad timestamp {ts_text!r}", line=lineno, field="timestamp"
            ) from None
        try:
            order = int(order_text)
        except ValueError:
            raise DataFormatError(
                f"bad submission_order {order_text!r}",
                line=lineno,
                field="submission_order",
            ) from None
        if plag_text not in ("0", "1"):
            raise DataFormatError(
                f"plagiarism_flag must be 0 or 1, got {plag_text!r}",
                line=lineno,
                field="plagiarism_flag",
            )
        try:
            status = CompileStatus(status_text)
        except ValueError:
            raise DataFormatError(
                f"unknown compile_status {status_text!r}",
                line=lineno,
                field="compile_status",
            ) from None
        try:
            records.append(
                SubmissionRecord(
                    student_id=sid,
                    assignment_id=aid,
                    timestamp=ts,
                    submission_order=order,
                    plagiarism_flag=plag_text == "1",
                    compile_status=status,
                    diagnostic_text=diag,
                )
            )
        except DataFormatError as err:
            raise DataFormatError(str(err), line=lineno) from None
    return records


def load_outcomes(path) -> dict[str, float]:
    """Load outcomes.csv; duplicate ids and out-of-range scores are errors."""
    outcomes: dict[str, float] = {}
    for lineno, row in _read_rows(path, OUTCOMES_HEADER):
        if len(row) != 2:
            raise DataFormatError(f"expected 2 fields, got {len(row)}", line=lineno)
        sid, score_text = row
        if sid in outcomes:
            raise DataFormatError(
                f"duplicate student_id {sid!r}", line=lineno, field="student_id"
            )
        try:
            score = float(score_text)
        except ValueError:
            raise DataFormatError(
                f"bad final_score {score_text!r}", line=lineno, field="final_score"
            ) from None
        if not 0.0 <= score <= 100.0:
            raise DataFormatError(
                f"final_score out of [0, 100]: {score}",
                line=lineno,
                field="final_score",
            )
        outcomes[sid] = score
    return outcomes


def load_grouping(path) -> GroupingSpec:
    """Load grouping.csv into a validated GroupingSpec."""
    groups: dict[str, int] = {}
    for lineno, row in _read_rows(path, GROUPING_HEADER):
        if len(row) != 2:
            raise DataFormatError(f"expected 2 fields, got {len(row)}", line=lineno)
        aid, idx_text = row
        if aid in groups:
            raise DataFormatError(
                f"duplicate assignment_id {aid!r}", line=lineno, field="assignment_id"
            )
        try:
            groups[aid] = int(idx_text)
        except ValueError:
            raise DataFormatError(
                f"bad group_index {idx_text!r}", line=lineno, field="group_index"
            ) from None
    return GroupingSpec.from_mapping(groups)


def write_submissions(records: list[SubmissionRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUBMISSIONS_HEADER)
        for r in records:
            writer.writerow(
                [
                    r.student_id,
                    r.assignment_id,
                    format_timestamp(r.timestamp),
                    r.submission_order,
                    int(r.plagiarism_flag),
                    r.compile_status.value,
                    r.diagnostic_text,
                ]
            )


def write_outcomes(outcomes: dict[str, float], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(OUTCOMES_HEADER)
        for sid in sorted(outcomes):
            writer.writerow([sid, f"{outcomes[sid]:g}"])


def write_grouping(grouping: GroupingSpec, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GROUPING_HEADER)
        for aid in sorted(grouping.groups):
            writer.writerow([aid, grouping.groups[aid]])
