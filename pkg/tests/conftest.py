"""Shared fixtures: a four-student, two-group cohort small enough to
verify every derived value by hand."""

from datetime import datetime, timedelta, timezone

import pytest

from studentrisk.model import (
    CompileStatus,
    GroupingSpec,
    SubmissionRecord,
    assemble_cohort,
)

T0 = datetime(2024, 3, 4, 9, 0, tzinfo=timezone.utc)


def _rec(sid, aid, minute, order, plag=False, status=CompileStatus.OK, diag=""):
    return SubmissionRecord(
        student_id=sid,
        assignment_id=aid,
        timestamp=T0 + timedelta(minutes=minute),
        submission_order=order,
        plagiarism_flag=plag,
        compile_status=status,
        diagnostic_text=diag,
    )


def hand_cohort_parts():
    """Submissions, outcomes, and grouping for the hand-computed cohort.

    Group 1 = {a1, a2}, group 2 = {a3}. Per-student group-1 totals are
    8/4/2/2 (means 4/2/1/1 against a cohort mean of 2), group 2 is one
    submission each. First-submission ranks: a1 and a3 in id order, a2
    with s2 and s4 ahead of s1 and s3. With order thresholds (2, 3) the
    expected sequences are:

        s1: times (2, 0)   order (1, 1)  plagiarism (2, 0)
        s2: times (0, 0)   order (1, 1)  plagiarism (1, 0)
        s3: times (-2, 0)  order (3, 2)  plagiarism (0, 1)
        s4: times (-2, 0)  order (3, 3)  plagiarism (1, 0)
    """
    err = CompileStatus.ERROR
    submissions = [
        # a1 (group 1): firsts at minutes 0..3 -> ranks s1,s2,s3,s4 = 1,2,3,4
        _rec("s1", "a1", 0, 1, plag=True),
        _rec("s1", "a1", 10, 1, plag=True,
             status=err, diag="prog.c:4: error: syntax error before 'int'"),
        _rec("s1", "a1", 11, 1, plag=True),
        _rec("s1", "a1", 12, 1),
        _rec("s1", "a1", 13, 1, status=err, diag="prog.c:9: 'x' undeclared here"),
        _rec("s2", "a1", 1, 2),
        _rec("s2", "a1", 14, 2, plag=True),
        _rec("s3", "a1", 2, 3),
        _rec("s4", "a1", 3, 4, plag=True),
        # a2 (group 1): firsts s2,s1,s4,s3 -> ranks 1,2,3,4
        _rec("s2", "a2", 60, 1),
        _rec("s2", "a2", 70, 1),
        _rec("s1", "a2", 61, 2),
        _rec("s1", "a2", 71, 2),
        _rec("s1", "a2", 72, 2),
        _rec("s4", "a2", 62, 3, plag=True),
        _rec("s3", "a2", 63, 4, status=err, diag="mystery failure, no known phrase"),
        # a3 (group 2): firsts in id order -> ranks 1..4
        _rec("s1", "a3", 120, 1),
        _rec("s2", "a3", 121, 2),
        _rec("s3", "a3", 122, 3, plag=True),
        _rec("s4", "a3", 123, 4),
    ]
    outcomes = {"s1": 55.0, "s2": 60.0, "s3": 59.99, "s4": 90.0}
    grouping = GroupingSpec.from_mapping({"a1": 1, "a2": 1, "a3": 2})
    return submissions, outcomes, grouping


EXPECTED_HAND_SEQUENCES = {
    "s1": {"times": (2, 0), "order": (1, 1), "plagiarism": (2, 0)},
    "s2": {"times": (0, 0), "order": (1, 1), "plagiarism": (1, 0)},
    "s3": {"times": (-2, 0), "order": (3, 2), "plagiarism": (0, 1)},
    "s4": {"times": (-2, 0), "order": (3, 3), "plagiarism": (1, 0)},
}

HAND_ORDER_THRESHOLDS = (2.0, 3.0)


@pytest.fixture
def hand_cohort():
    submissions, outcomes, grouping = hand_cohort_parts()
    return assemble_cohort(submissions, outcomes, grouping)
