"""Standardized per-student feature sequences over assignment groups.

Three sequences per student, one symbol per assignment group:

* times      -- submission-count deviation from the cohort mean, bucketed
                into {-2, -1, 0, 1, 2} via the difference rate
                ``(x_ij - x_j) / x_j``;
* order      -- mean first-submission rank, bucketed into {1, 2, 3};
* plagiarism -- plagiarism-flag total, bucketed into {0, 1, 2}.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum

from .errors import DataFormatError, DegenerateGroupError
from .model import Cohort, Outcome

ZERO_DR_TOLERANCE = 1e-12
DEFAULT_ORDER_THRESHOLDS = (500.0, 1000.0)


class SequenceKind(Enum):
    TIMES = "times"
    ORDER = "order"
    PLAGIARISM = "plagiarism"

    @property
    def alphabet(self) -> tuple[int, ...]:
        return _ALPHABETS[self]


_ALPHABETS = {
    SequenceKind.TIMES: (-2, -1, 0, 1, 2),
    SequenceKind.ORDER: (1, 2, 3),
    SequenceKind.PLAGIARISM: (0, 1, 2),
}

KIND_EXPORT_ORDER = (SequenceKind.TIMES, SequenceKind.ORDER, SequenceKind.PLAGIARISM)


@dataclass(frozen=True)
class FeatureSequence:
    """A length-G vector of discrete symbols of a single kind."""

    kind: SequenceKind
    symbols: tuple[int, ...]

    def __post_init__(self):
        allowed = set(self.kind.alphabet)
        for i, s in enumerate(self.symbols):
            if s not in allowed:
                raise ValueError(
                    f"symbol {s} at index {i} not in {self.kind.value} "
                    f"alphabet {sorted(allowed)}"
                )

    def __len__(self) -> int:
        return len(self.symbols)


def difference_rate(x_ij: float, x_j: float) -> float:
    """Relative deviation of a student's group mean from the cohort mean."""
    if x_j <= 0.0:
        raise DegenerateGroupError(
            f"cohort mean submission count must be positive, got {x_j}"
        )
    return (x_ij - x_j) / x_j


def discretize_times(dr: float) -> int:
    """Bucket a difference rate into {-2, -1, 0, 1, 2}.

    The +-0.5 boundaries close toward the extreme buckets; |dr| below
    1e-12 counts as exactly zero so the dr == 0 case is reachable in
    floating point.
    """
    if not math.isfinite(dr):
        raise ValueError(f"difference rate must be finite, got {dr}")
    if abs(dr) < ZERO_DR_TOLERANCE:
        return 0
    if dr <= -0.5:
        return -2
    if dr < 0.0:
        return -1
    if dr < 0.5:
        return 1
    return 2


def discretize_order(avg_order: float, thresholds=DEFAULT_ORDER_THRESHOLDS) -> int:
    """Bucket a mean submission rank into {1, 2, 3}."""
    t1, t2 = thresholds
    if not 0 < t1 < t2:
        raise ValueError(f"order thresholds must satisfy 0 < t1 < t2, got {thresholds}")
    if avg_order < 0:
        raise ValueError(f"average order must be >= 0, got {avg_order}")
    if avg_order <= t1:
        return 1
    if avg_order <= t2:
        return 2
    return 3


def discretize_plagiarism(count: int) -> int:
    """Bucket a plagiarism-flag total into {0, 1, 2}."""
    if count < 0:
        raise ValueError(f"plagiarism count must be >= 0, got {count}")
    if count == 0:
        return 0
    if count <= 2:
        return 1
    return 2


@dataclass(frozen=True)
class GroupAggregates:
    """Raw per-(student, group) aggregates the discretizers consume.

    Indexed [student][group] following cohort student order and group
    indices 1..g (stored 0-based). ``group_count_mean[j]`` is the mean of
    ``submission_count_mean[:, j]`` over students.
    """

    students: tuple[str, ...]
    submission_count_mean: list[list[float]]
    order_mean: list[list[float]]
    plagiarism_total: list[list[int]]
    group_count_mean: list[float]


@dataclass(frozen=True)
class SequenceSet:
    """All three sequences plus the pass/fail label for every student."""

    students: tuple[str, ...]
    labels: dict[str, Outcome]
    sequences: dict[str, dict[SequenceKind, FeatureSequence]]
    g: int

    def of_kind(self, kind: SequenceKind) -> list[FeatureSequence]:
        return [self.sequences[s][kind] for s in self.students]

    def split_by_label(
        self, kind: SequenceKind
    ) -> tuple[list[FeatureSequence], list[FeatureSequence]]:
        """(fail sequences, pass sequences) in student order."""
        fail = [
            self.sequences[s][kind]
            for s in self.students
            if self.labels[s] is Outcome.FAIL
        ]
        ok = [
            self.sequences[s][kind]
            for s in self.students
            if self.labels[s] is Outcome.PASS
        ]
        return fail, ok


def compute_group_aggregates(cohort: Cohort) -> GroupAggregates:
    """Aggregate raw submission activity per (student, group).

    A student with no submissions to an assignment contributes count 0 and
    a rank equal to the cohort size (worst possible) for that assignment.
    """
    g = cohort.grouping.g
    students = cohort.students
    index = {s: i for i, s in enumerate(students)}
    n = len(students)
    group_of = cohort.grouping.groups
    assignments_by_group: list[list[str]] = [[] for _ in range(g)]
    for aid, j in group_of.items():
        assignments_by_group[j - 1].append(aid)

    counts = [[0] * g for _ in range(n)]
    plag = [[0] * g for _ in range(n)]
    # earliest submission rank per (student, assignment)
    first_order: dict[tuple[str, str], tuple] = {}
    for rec in cohort.submissions:
        i = index[rec.student_id]
        j = group_of[rec.assignment_id] - 1
        counts[i][j] += 1
        plag[i][j] += int(rec.plagiarism_flag)
        key = (rec.student_id, rec.assignment_id)
        seen = first_order.get(key)
        if seen is None or rec.timestamp < seen[0]:
            first_order[key] = (rec.timestamp, rec.submission_order)

    count_mean = [[0.0] * g for _ in range(n)]
    order_mean = [[0.0] * g for _ in range(n)]
    for i, sid in enumerate(students):
        for j in range(g):
            assignments = assignments_by_group[j]
            a_count = len(assignments)
            count_mean[i][j] = counts[i][j] / a_count
            total_order = 0.0
            for aid in assignments:
                seen = first_order.get((sid, aid))
                total_order += seen[1] if seen is not None else n
            order_mean[i][j] = total_order / a_count

    group_count_mean = [
        sum(count_mean[i][j] for i in range(n)) / n if n else 0.0 for j in range(g)
    ]
    return GroupAggregates(
        students=students,
        submission_count_mean=count_mean,
        order_mean=order_mean,
        plagiarism_total=plag,
        group_count_mean=group_count_mean,
    )


def build_sequences(
    cohort: Cohort, order_thresholds=DEFAULT_ORDER_THRESHOLDS
) -> SequenceSet:
    """Build the three standardized sequences for every student.

    A group nobody submitted to is an error when the cohort has any
    activity at all; a cohort with zero submissions overall degenerates to
    the all-zero-activity encoding (every student sits exactly at the
    group mean of zero).
    """
    agg = compute_group_aggregates(cohort)
    g = cohort.grouping.g
    n = len(agg.students)
    cohort_is_empty = not cohort.submissions

    sequences: dict[str, dict[SequenceKind, FeatureSequence]] = {}
    for i, sid in enumerate(agg.students):
        times_syms = []
        for j in range(g):
            x_j = agg.group_count_mean[j]
            if x_j == 0.0:
                if not cohort_is_empty:
                    raise DegenerateGroupError(
                        f"group {j + 1} has no submissions from any student"
                    )
                times_syms.append(0)  # everyone equals the (zero) group mean
                continue
            times_syms.append(
                discretize_times(difference_rate(agg.submission_count_mean[i][j], x_j))
            )
        order_syms = [
            discretize_order(agg.order_mean[i][j], order_thresholds) for j in range(g)
        ]
        plag_syms = [discretize_plagiarism(agg.plagiarism_total[i][j]) for j in range(g)]
        sequences[sid] = {
            SequenceKind.TIMES: FeatureSequence(SequenceKind.TIMES, tuple(times_syms)),
            SequenceKind.ORDER: FeatureSequence(SequenceKind.ORDER, tuple(order_syms)),
            SequenceKind.PLAGIARISM: FeatureSequence(
                SequenceKind.PLAGIARISM, tuple(plag_syms)
            ),
        }

    labels = {sid: cohort.label(sid) for sid in agg.students}
    return SequenceSet(students=agg.students, labels=labels, sequences=sequences, g=g)


def sequences_header(g: int) -> list[str]:
    return ["student_id", "kind"] + [f"s{i}" for i in range(1, g + 1)]


def write_sequences_csv(seqset: SequenceSet, path) -> None:
    """Export one row per (student, kind), students in universe order."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(sequences_header(seqset.g))
        for sid in seqset.students:
            for kind in KIND_EXPORT_ORDER:
                seq = seqset.sequences[sid][kind]
                writer.writerow([sid, kind.value, *seq.symbols])


def load_sequences_csv(path) -> tuple[tuple[str, ...], dict[str, dict[SequenceKind, FeatureSequence]], int]:
    """Read a sequences export back; returns (students, sequences, g)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file, expected header") from None
        if len(header) < 3 or header[:2] != ["student_id", "kind"]:
            raise DataFormatError(f"{path}: bad sequences header {header!r}", line=1)
        g = len(header) - 2
        if header[2:] != [f"s{i}" for i in range(1, g + 1)]:
            raise DataFormatError(f"{path}: bad symbol columns in {header!r}", line=1)
        students: list[str] = []
        sequences: dict[str, dict[SequenceKind, FeatureSequence]] = {}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != g + 2:
                raise DataFormatError(
                    f"expected {g + 2} fields, got {len(row)}", line=lineno
                )
            sid, kind_text = row[0], row[1]
            try:
                kind = SequenceKind(kind_text)
            except ValueError:
                raise DataFormatError(
                    f"unknown sequence kind {kind_text!r}", line=lineno, field="kind"
                ) from None
            try:
                symbols = tuple(int(v) for v in row[2:])
                seq = FeatureSequence(kind, symbols)
            except ValueError as err:
                raise DataFormatError(str(err), line=lineno) from None
            if sid not in sequences:
                students.append(sid)
                sequences[sid] = {}
            if kind in sequences[sid]:
                raise DataFormatError(
                    f"duplicate ({sid}, {kind.value}) row", line=lineno
                )
            sequences[sid][kind] = seq
    return tuple(students), sequences, g
