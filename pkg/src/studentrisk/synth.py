"""Deterministic synthetic cohorts with planted ground truth, plus the
brute-force oracles tests check the production code against.

Two generation modes share one entry point:

* pattern mode (``planted_patterns`` set, or neither signal set): sequences
  are drawn first -- background symbols, planted pattern embeddings, and a
  repair pass that keeps zero-rate groups match-free -- then submission
  logs are synthesized so that rebuilding sequences from the CSVs
  reproduces the planted symbols exactly;
* compile mode (``compile_signal`` set): per-category Poisson draws define
  each student's compile events and the behavior sequences fall out of the
  realized logs.

All randomness comes from one ``numpy.random.default_rng`` (PCG64) stream
consumed in a fixed order, so a seed pins every output byte.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .diagnostics import DiagnosticTaxonomy, default_taxonomy
from .errors import ConfigError, GenerationError, OracleBoundsError
from .model import (
    Cohort,
    CompileStatus,
    GroupingSpec,
    Outcome,
    SubmissionRecord,
    assemble_cohort,
    write_grouping,
    write_outcomes,
    write_submissions,
)
from .patterns import (
    DEFAULT_GAP_POLICY,
    GapPolicy,
    MinedPattern,
    MiningConfig,
    Pattern,
    PatternStats,
    format_pattern,
    max_embeddable_length,
)
from .sequences import (
    FeatureSequence,
    SequenceKind,
    SequenceSet,
    build_sequences,
)

# ---------------------------------------------------------------------------
# Independent matching / mining oracles


def oracle_match(
    seq: FeatureSequence, pattern: Pattern, policy: GapPolicy = DEFAULT_GAP_POLICY
) -> bool:
    """Dynamic-programming re-statement of the gap-wildcard match.

    Builds the full table reach[k][i] = "the first k+1 pattern symbols can
    be matched with the last one at position i". Deliberately a different
    algorithm from the production greedy matcher so the two can check each
    other.
    """
    if seq.kind is not pattern.kind:
        raise ValueError(
            f"kind mismatch: sequence is {seq.kind.value}, "
            f"pattern is {pattern.kind.value}"
        )
    symbols = seq.symbols
    g = len(symbols)
    step = policy.min_step
    margin = policy.margin
    m = len(pattern.symbols)

    reach = [[False] * g for _ in range(m)]
    for i in range(margin, g):
        reach[0][i] = symbols[i] == pattern.symbols[0]
    for k in range(1, m):
        # prefix_any[i] = any(reach[k-1][0..i])
        any_so_far = False
        prefix_any = [False] * g
        for i in range(g):
            any_so_far = any_so_far or reach[k - 1][i]
            prefix_any[i] = any_so_far
        for i in range(g):
            if symbols[i] == pattern.symbols[k] and i - step >= 0:
                reach[k][i] = prefix_any[i - step]
    last_allowed = g - 1 - margin
    return any(reach[m - 1][i] for i in range(0, last_allowed + 1))


def _oracle_sort_key(item: MinedPattern):
    stats = item.stats
    return (
        -(stats.accuracy or 0.0),
        -stats.recall,
        len(item.pattern),
        item.pattern.symbols,
    )


ORACLE_MAX_ALPHABET = 5
ORACLE_MAX_LENGTH = 4
ORACLE_MAX_STUDENTS = 60


def oracle_mine(
    fail_seqs: list[FeatureSequence],
    pass_seqs: list[FeatureSequence],
    config: MiningConfig = MiningConfig(),
) -> list[MinedPattern]:
    """Exhaustive enumeration of every pattern up to the length cap.

    No pruning at all: every candidate is scored with ``oracle_match``.
    Only usable on desk-scale inputs; bounds are enforced.
    """
    if not fail_seqs:
        raise OracleBoundsError("fail group must be non-empty")
    if not pass_seqs:
        raise OracleBoundsError("pass group must be non-empty")
    kind = fail_seqs[0].kind
    g = len(fail_seqs[0])
    alphabet = kind.alphabet
    if len(alphabet) > ORACLE_MAX_ALPHABET:
        raise OracleBoundsError(f"alphabet larger than {ORACLE_MAX_ALPHABET}")
    if config.max_pattern_length > ORACLE_MAX_LENGTH:
        raise OracleBoundsError(f"pattern length cap above {ORACLE_MAX_LENGTH}")
    if len(fail_seqs) + len(pass_seqs) > ORACLE_MAX_STUDENTS:
        raise OracleBoundsError(f"more than {ORACLE_MAX_STUDENTS} students")

    policy = config.gap_policy
    max_len = min(config.max_pattern_length, max_embeddable_length(g, policy))
    results = []
    for length in range(1, max_len + 1):
        for combo in itertools.product(alphabet, repeat=length):
            pattern = Pattern(kind, combo)
            fail_m = sum(1 for s in fail_seqs if oracle_match(s, pattern, policy))
            pass_m = sum(1 for s in pass_seqs if oracle_match(s, pattern, policy))
            stats = PatternStats(
                fail_matches=fail_m,
                pass_matches=pass_m,
                fail_total=len(fail_seqs),
                pass_total=len(pass_seqs),
            )
            if not stats.supported:
                continue
            if stats.recall >= config.min_recall and stats.accuracy >= config.min_accuracy:
                results.append(MinedPattern(pattern, stats))
    results.sort(key=_oracle_sort_key)
    return results


# ---------------------------------------------------------------------------
# Synthetic cohort generation

OK_RATE = 0.7  # compile-success share in pattern-mode cohorts

# Sample diagnostics, one per built-in category. Each text contains its own
# rule's keyword and none of the keywords of earlier rules.
DIAGNOSTIC_SAMPLES = {
    "Syntax error": "prog.c:12:5: error: syntax error before 'return'",
    "Redefinition of main": "prog.c:20:1: error: redefinition of 'main'",
    "Undeclared": "prog.c:8:9: error: 'sum' undeclared (first use in this function)",
    "Invalid value": "prog.c:5:3: error: invalid value for array size",
    "Stray": "prog.c:3:1: error: stray '\\302' in program",
    "Invalid operands": "prog.c:15:13: error: invalid operands to binary * (have 'char *' and 'int')",
    "Not a function": "prog.c:9:5: error: called object 'total' is not a function",
    "Conflicting": "prog.c:2:6: error: conflicting types for 'area'",
    "Not use struct": "prog.c:30:11: error: invalid use of 'struct data'",
}
OTHER_DIAGNOSTIC = "prog.c:1:1: fatal: unrecognized token soup"

# Submission-count realization for the times sequence: per-group counts sit
# in symbol buckets around a fixed group mean of TIMES_BASE, with the exact
# +-0.5 boundary counts (12 and 36) left unused so float rounding can never
# flip a bucket.
TIMES_BASE = 24
_TIMES_BUCKETS = {
    -2: (0, 11),  # lower bound raised to the per-cell minimum later
    -1: (13, 23),
    0: (24, 24),
    1: (25, 35),
    2: (37, 72),
}
_TIMES_PRELIM = {
    -2: (3, 10),
    -1: (14, 22),
    0: (24, 24),
    1: (26, 34),
    2: (38, 56),
}

_BASE_TIME = datetime(2024, 1, 8, 9, 0, tzinfo=timezone.utc)

MAX_REPAIR_ROUNDS = 60


@dataclass(frozen=True)
class PlantedPattern:
    """A pattern embedded into the stated fraction of each class."""

    pattern: Pattern
    fail_rate: float
    pass_rate: float

    def __post_init__(self):
        for rate in (self.fail_rate, self.pass_rate):
            if not 0.0 <= rate <= 1.0:
                raise ConfigError(f"carrier rates must be in [0, 1], got {rate}")


@dataclass(frozen=True)
class CompileSignal:
    """Per-category Poisson rates (index 0 = compile success) per class."""

    fail_rates: tuple[float, ...]
    pass_rates: tuple[float, ...]

    def __post_init__(self):
        if len(self.fail_rates) != len(self.pass_rates):
            raise ConfigError("fail and pass rate vectors must have equal length")
        if not self.fail_rates:
            raise ConfigError("rate vectors must be non-empty")
        if any(r < 0 for r in self.fail_rates + self.pass_rates):
            raise ConfigError("Poisson rates must be non-negative")


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    n_students: int
    g: int = 14
    fail_fraction: float = 0.4
    assignments_per_group: int = 2
    label_noise: float = 0.0
    planted_patterns: tuple[PlantedPattern, ...] = ()
    compile_signal: CompileSignal | None = None
    order_thresholds: tuple[float, float] | None = None

    def __post_init__(self):
        if not 4 <= self.n_students <= 5000:
            raise ConfigError("n_students must be in [4, 5000]")
        if self.g < 1:
            raise ConfigError("g must be >= 1")
        if not 1 <= self.assignments_per_group <= 8:
            raise ConfigError("assignments_per_group must be in [1, 8]")
        if not 0.0 < self.fail_fraction < 1.0:
            raise ConfigError("fail_fraction must be in (0, 1)")
        if not 0.0 <= self.label_noise < 0.5:
            raise ConfigError("label_noise must be in [0, 0.5)")
        if self.planted_patterns and self.compile_signal is not None:
            raise ConfigError(
                "planted_patterns and compile_signal cannot be combined: "
                "compile-driven submission counts would contradict the "
                "submission counts that realize planted times symbols"
            )
        limit = max_embeddable_length(self.g, DEFAULT_GAP_POLICY)
        for planted in self.planted_patterns:
            if len(planted.pattern) > limit:
                raise ConfigError(
                    f"pattern {format_pattern(planted.pattern)} of length "
                    f"{len(planted.pattern)} cannot embed into g={self.g} "
                    f"(limit {limit})"
                )
        if self.compile_signal is not None:
            if len(self.compile_signal.fail_rates) != default_taxonomy().n_features:
                raise ConfigError(
                    "compile_signal rate vectors must have one entry per "
                    f"feature ({default_taxonomy().n_features})"
                )

    def resolved_order_thresholds(self) -> tuple[float, float]:
        if self.order_thresholds is not None:
            t1, t2 = self.order_thresholds
            if not 0 < t1 < t2:
                raise ConfigError("order thresholds must satisfy 0 < t1 < t2")
            return (float(t1), float(t2))
        n = self.n_students
        t1 = max(1, int(np.ceil(n / 3)))
        t2 = max(t1 + 1, int(np.ceil(2 * n / 3)))
        return (float(t1), float(t2))


@dataclass(frozen=True)
class GeneratedCohort:
    cohort: Cohort
    sequences: SequenceSet
    manifest: dict


def _student_ids(n: int) -> list[str]:
    width = max(4, len(str(n)))
    return [f"s{i:0{width}d}" for i in range(1, n + 1)]


def _assignment_ids(g: int, per_group: int) -> list[list[str]]:
    return [
        [f"g{j:02d}a{k:02d}" for k in range(1, per_group + 1)]
        for j in range(1, g + 1)
    ]


def _valid_tuples(g: int, length: int, policy: GapPolicy) -> list[tuple[int, ...]]:
    """All 0-based index tuples a length-m pattern may occupy."""
    step = policy.min_step
    margin = policy.margin
    out = []
    for combo in itertools.combinations(range(margin, g - margin), length):
        if all(b - a >= step for a, b in zip(combo, combo[1:])):
            out.append(combo)
    return out


def _row_matches(row: np.ndarray, pattern: Pattern, policy: GapPolicy) -> bool:
    seq = FeatureSequence(pattern.kind, tuple(int(v) for v in row))
    return oracle_match(seq, pattern, policy)


class _PatternModeGenerator:
    """Sequence-first generation: symbols, then logs realizing them.

    Order symbols are special: ranks rebuilt from timestamps are always a
    contiguous 1..n per assignment, so each order band must hold exactly
    its capacity (t1, t2-t1, n-t2) of students in every group. Backgrounds
    are therefore dealt from an exact per-group bag and repairs swap
    symbols between students rather than redrawing them.
    """

    def __init__(self, cfg: SynthConfig, rng, students, gen_fail: np.ndarray):
        self.cfg = cfg
        self.rng = rng
        self.students = students
        self.gen_fail = gen_fail  # generative class per student (True = fail)
        self.n = cfg.n_students
        self.g = cfg.g
        self.policy = DEFAULT_GAP_POLICY
        t1, t2 = cfg.resolved_order_thresholds()
        if not (t1.is_integer() and t2.is_integer()):
            raise ConfigError(
                "pattern-mode order thresholds must be integers (ranks are)"
            )
        self.t1, self.t2 = int(t1), int(t2)
        if not 1 <= self.t1 < self.t2 < self.n:
            raise ConfigError(
                f"order thresholds ({self.t1}, {self.t2}) must satisfy "
                f"1 <= t1 < t2 < n_students={self.n}; scale them to the cohort"
            )
        self.symbols = {
            SequenceKind.TIMES: _draw_symbols(rng, SequenceKind.TIMES, self.n, self.g),
            SequenceKind.ORDER: np.ones((self.n, self.g), dtype=int),
            SequenceKind.PLAGIARISM: _draw_symbols(
                rng, SequenceKind.PLAGIARISM, self.n, self.g
            ),
        }
        self.pinned = {
            kind: np.zeros((self.n, self.g), dtype=bool) for kind in SequenceKind
        }
        self.carriers: list[set[int]] = []
        self.embeddings: list[dict[int, tuple[int, ...]]] = []
        self.forbidden: list[set[int]] = []  # students that must not match
        self._fix_attempts: dict[tuple[int, int], int] = {}

    def band_size(self, symbol: int) -> int:
        if symbol == 1:
            return self.t1
        if symbol == 2:
            return self.t2 - self.t1
        return self.n - self.t2

    # -- planting -----------------------------------------------------

    def plant_all(self):
        for planted in self.cfg.planted_patterns:
            carrier_set: set[int] = set()
            embedding: dict[int, tuple[int, ...]] = {}
            forbidden_set: set[int] = set()
            for i in range(self.n):
                rate = planted.fail_rate if self.gen_fail[i] else planted.pass_rate
                if rate >= 1.0:
                    is_carrier = True
                elif rate <= 0.0:
                    is_carrier = False
                    forbidden_set.add(i)
                else:
                    is_carrier = bool(self.rng.random() < rate)
                if is_carrier:
                    carrier_set.add(i)
                    embedding[i] = self._plant_one(i, planted.pattern)
            self.carriers.append(carrier_set)
            self.embeddings.append(embedding)
            self.forbidden.append(forbidden_set)
        self._deal_order_backgrounds()

    def _plant_one(self, student: int, pattern: Pattern) -> tuple[int, ...]:
        kind = pattern.kind
        grid = self.symbols[kind]
        pins = self.pinned[kind]
        candidates = []
        for combo in _valid_tuples(self.g, len(pattern), self.policy):
            ok = True
            for pos, sym in zip(combo, pattern.symbols):
                if pins[student, pos] and grid[student, pos] != sym:
                    ok = False
                    break
                if kind is SequenceKind.ORDER and not (
                    pins[student, pos] and grid[student, pos] == sym
                ):
                    if not self._order_band_has_room(pos, sym):
                        ok = False
                        break
            if ok:
                candidates.append(combo)
        if not candidates:
            raise GenerationError(
                f"no feasible embedding for pattern {format_pattern(pattern)} "
                f"on student {self.students[student]}; the config plants too "
                "densely for the sequence length or the order-band capacity"
            )
        combo = candidates[int(self.rng.integers(len(candidates)))]
        for pos, sym in zip(combo, pattern.symbols):
            grid[student, pos] = sym
            pins[student, pos] = True
        return combo

    def _order_band_has_room(self, group: int, symbol: int) -> bool:
        col = self.symbols[SequenceKind.ORDER][:, group]
        pins = self.pinned[SequenceKind.ORDER][:, group]
        pinned_in_band = int(np.sum(pins & (col == symbol)))
        return pinned_in_band + 1 <= self.band_size(symbol)

    def _deal_order_backgrounds(self):
        """Fill unpinned order cells from the exact per-group band bag."""
        grid = self.symbols[SequenceKind.ORDER]
        pins = self.pinned[SequenceKind.ORDER]
        for j in range(self.g):
            remaining = {s: self.band_size(s) for s in (1, 2, 3)}
            for i in np.flatnonzero(pins[:, j]):
                remaining[int(grid[i, j])] -= 1
            if any(v < 0 for v in remaining.values()):
                raise GenerationError(
                    f"pinned order symbols exceed band capacity in group {j + 1}"
                )
            bag = np.array(
                [s for s in (1, 2, 3) for _ in range(remaining[s])], dtype=int
            )
            bag = bag[self.rng.permutation(bag.size)]
            grid[np.flatnonzero(~pins[:, j]), j] = bag

    # -- repair -------------------------------------------------------

    def repair(self):
        for _ in range(MAX_REPAIR_ROUNDS):
            changed = self._rebalance_times_columns()
            changed |= self._break_forbidden_matches()
            if not changed:
                break
        else:
            raise GenerationError(
                "could not reconcile zero-rate groups with realizable times "
                f"columns within {MAX_REPAIR_ROUNDS} repair rounds"
            )
        self._verify_constraints()

    def _times_cell_min(self, student: int, group: int, symbol: int) -> int:
        plag_min = {0: 0, 1: 1, 2: 3}[
            int(self.symbols[SequenceKind.PLAGIARISM][student, group])
        ]
        return max(
            _TIMES_BUCKETS[symbol][0], self.cfg.assignments_per_group, plag_min
        )

    def _rebalance_times_columns(self) -> bool:
        """Retarget unpinned background symbols until each group's counts can
        actually average to TIMES_BASE.

        A column is realizable iff sum of per-cell minima <= n*TIMES_BASE <=
        sum of per-cell maxima; too many above-mean symbols (or too many
        below-mean ones) violate that, which no choice of counts can fix.
        """
        times = self.symbols[SequenceKind.TIMES]
        pins = self.pinned[SequenceKind.TIMES]
        target = TIMES_BASE * self.n
        changed = False
        for j in range(self.g):
            for _ in range(4 * self.n):
                lo_sum = sum(
                    self._times_cell_min(i, j, int(times[i, j])) for i in range(self.n)
                )
                hi_sum = sum(_TIMES_BUCKETS[int(times[i, j])][1] for i in range(self.n))
                if lo_sum <= target <= hi_sum:
                    break
                if lo_sum > target:
                    movable = [
                        i
                        for i in range(self.n)
                        if not pins[i, j] and int(times[i, j]) > -2
                    ]
                    replacement = -2
                else:
                    movable = [
                        i
                        for i in range(self.n)
                        if not pins[i, j] and int(times[i, j]) < 2
                    ]
                    replacement = 2
                if not movable:
                    raise GenerationError(
                        f"times symbols pinned in group {j + 1} cannot average "
                        f"to {TIMES_BASE}; the planted patterns are too dense"
                    )
                # prefer students free of zero-rate constraints so the
                # rebalance does not undo forbidden-match repairs
                off_limits = self._forbidden_union(SequenceKind.TIMES)
                preferred = [i for i in movable if i not in off_limits]
                pool = preferred or movable
                victim = pool[int(self.rng.integers(len(pool)))]
                times[victim, j] = replacement
                changed = True
        return changed

    def _forbidden_union(self, kind: SequenceKind) -> set[int]:
        union: set[int] = set()
        for planted, forbidden in zip(self.cfg.planted_patterns, self.forbidden):
            if planted.pattern.kind is kind:
                union |= forbidden
        return union

    def _break_forbidden_matches(self) -> bool:
        changed = False
        for p_idx, (planted, forbidden) in enumerate(
            zip(self.cfg.planted_patterns, self.forbidden)
        ):
            kind = planted.pattern.kind
            grid = self.symbols[kind]
            pins = self.pinned[kind]
            for i in sorted(forbidden):
                if not _row_matches(grid[i], planted.pattern, self.policy):
                    continue
                if not np.any(~pins[i]):
                    raise GenerationError(
                        f"student {self.students[i]} must not match "
                        f"{format_pattern(planted.pattern)} but every position "
                        "is pinned by other planted patterns"
                    )
                changed = True
                attempts = self._fix_attempts.get((p_idx, i), 0)
                self._fix_attempts[(p_idx, i)] = attempts + 1
                if kind is SequenceKind.ORDER:
                    self._directed_order_swap(i, planted.pattern)
                elif attempts < 10:
                    free = np.flatnonzero(~pins[i])
                    grid[i, free] = _draw_symbols(self.rng, kind, 1, free.size)[0]
                else:
                    # resampling keeps re-creating the match; redraw from
                    # the alphabet minus the pattern's own symbols
                    pool = [
                        s for s in kind.alphabet if s not in set(planted.pattern.symbols)
                    ]
                    if not pool:
                        raise GenerationError(
                            f"cannot avoid {format_pattern(planted.pattern)}: "
                            "it uses the whole alphabet"
                        )
                    free = np.flatnonzero(~pins[i])
                    grid[i, free] = self.rng.choice(pool, size=free.size)
        return changed

    def _directed_order_swap(self, i: int, pattern: Pattern):
        """Swap pattern symbols out of a forbidden student's row and into
        unconstrained students, preserving exact per-group band counts."""
        grid = self.symbols[SequenceKind.ORDER]
        pins = self.pinned[SequenceKind.ORDER]
        off_limits = self._forbidden_union(SequenceKind.ORDER)
        wanted = set(pattern.symbols)
        for j in range(self.g):
            if pins[i, j] or int(grid[i, j]) not in wanted:
                continue
            partners = [
                k
                for k in range(self.n)
                if k != i
                and k not in off_limits
                and not pins[k, j]
                and int(grid[k, j]) != int(grid[i, j])
            ]
            if not partners:
                continue
            k = partners[int(self.rng.integers(len(partners)))]
            grid[i, j], grid[k, j] = int(grid[k, j]), int(grid[i, j])
            if not _row_matches(grid[i], pattern, self.policy):
                return

    def _verify_constraints(self):
        for planted, carrier_set, forbidden in zip(
            self.cfg.planted_patterns, self.carriers, self.forbidden
        ):
            grid = self.symbols[planted.pattern.kind]
            for i in sorted(carrier_set):
                if not _row_matches(grid[i], planted.pattern, self.policy):
                    raise GenerationError(
                        f"carrier {self.students[i]} lost its embedding of "
                        f"{format_pattern(planted.pattern)}"
                    )
            for i in sorted(forbidden):
                if _row_matches(grid[i], planted.pattern, self.policy):
                    raise GenerationError(
                        f"student {self.students[i]} still matches zero-rate "
                        f"pattern {format_pattern(planted.pattern)}"
                    )

    # -- realization ----------------------------------------------------

    def realize_counts(self) -> np.ndarray:
        """Integer submission counts per (student, group) whose difference
        rates discretize back to the planted times symbols exactly."""
        a = self.cfg.assignments_per_group
        times = self.symbols[SequenceKind.TIMES]
        plag = self.symbols[SequenceKind.PLAGIARISM]
        counts = np.zeros((self.n, self.g), dtype=int)
        target = TIMES_BASE * self.n
        for j in range(self.g):
            lo = np.zeros(self.n, dtype=int)
            hi = np.zeros(self.n, dtype=int)
            col = np.zeros(self.n, dtype=int)
            for i in range(self.n):
                sym = int(times[i, j])
                bucket_lo, bucket_hi = _TIMES_BUCKETS[sym]
                plag_min = {0: 0, 1: 1, 2: 3}[int(plag[i, j])]
                cell_min = max(bucket_lo, a, plag_min)
                if cell_min > bucket_hi:
                    raise GenerationError(
                        f"cell minimum {cell_min} exceeds times bucket for "
                        f"symbol {sym} (student {self.students[i]}, group {j + 1})"
                    )
                lo[i], hi[i] = cell_min, bucket_hi
                p_lo, p_hi = _TIMES_PRELIM[sym]
                p_lo = max(p_lo, cell_min)
                col[i] = int(self.rng.integers(p_lo, max(p_lo, p_hi) + 1))
            deficit = target - int(col.sum())
            if deficit != 0:
                order = self.rng.permutation(self.n)
                for i in order:
                    if deficit == 0:
                        break
                    if deficit > 0:
                        delta = min(deficit, int(hi[i] - col[i]))
                    else:
                        delta = -min(-deficit, int(col[i] - lo[i]))
                    col[i] += delta
                    deficit -= delta
            if deficit != 0:
                raise GenerationError(
                    f"times symbols in group {j + 1} cannot average to "
                    f"{TIMES_BASE}: every student deviates to the same side"
                )
            counts[:, j] = col
        return counts

    def realize_ranks(self) -> np.ndarray:
        """Per-group submission rank (1..n) realizing the order symbols.

        Exact band occupancy makes the bands tile 1..n: band 1 fills
        ranks 1..t1, band 2 fills t1+1..t2, band 3 the rest.
        """
        grid = self.symbols[SequenceKind.ORDER]
        ranks = np.zeros((self.n, self.g), dtype=int)
        for j in range(self.g):
            next_rank = 1
            for symbol in (1, 2, 3):
                members = np.flatnonzero(grid[:, j] == symbol)
                if members.size != self.band_size(symbol):
                    raise GenerationError(
                        f"band {symbol} holds {members.size} students in group "
                        f"{j + 1}, expected exactly {self.band_size(symbol)}"
                    )
                members = members[self.rng.permutation(members.size)]
                for i in members:
                    ranks[int(i), j] = next_rank
                    next_rank += 1
        return ranks

    def realize_plagiarism_counts(self, counts: np.ndarray) -> np.ndarray:
        plag = self.symbols[SequenceKind.PLAGIARISM]
        flags = np.zeros((self.n, self.g), dtype=int)
        for i in range(self.n):
            for j in range(self.g):
                sym = int(plag[i, j])
                if sym == 0:
                    continue
                if sym == 1:
                    flags[i, j] = int(self.rng.integers(1, 3))
                else:
                    upper = min(5, int(counts[i, j]))
                    flags[i, j] = int(self.rng.integers(3, upper + 1))
        return flags


def _draw_symbols(rng, kind: SequenceKind, n: int, g: int) -> np.ndarray:
    if kind is SequenceKind.PLAGIARISM:
        return rng.choice([0, 1, 2], size=(n, g), p=[0.6, 0.25, 0.15]).astype(int)
    return rng.choice(list(kind.alphabet), size=(n, g)).astype(int)


def _split_count(total: int, parts: int) -> list[int]:
    q, r = divmod(total, parts)
    return [q + (1 if k < r else 0) for k in range(parts)]


def _diagnostic_text(category: str, taxonomy: DiagnosticTaxonomy) -> str:
    if category in DIAGNOSTIC_SAMPLES:
        return DIAGNOSTIC_SAMPLES[category]
    if category == "Other":
        return OTHER_DIAGNOSTIC
    for rule in taxonomy.rules:
        if rule.name == category:
            return f"prog.c:7:1: error: {rule.matcher} detected"
    raise ValueError(f"unknown diagnostic category {category!r}")


def _finalize_rows(raw_rows: list[dict]) -> list[SubmissionRecord]:
    """Derive submission_order from first-submission timestamps and build
    validated records, sorted chronologically."""
    firsts: dict[tuple[str, str], datetime] = {}
    for row in raw_rows:
        key = (row["assignment_id"], row["student_id"])
        if key not in firsts or row["timestamp"] < firsts[key]:
            firsts[key] = row["timestamp"]
    order: dict[tuple[str, str], int] = {}
    by_assignment: dict[str, list[tuple[datetime, str]]] = {}
    for (aid, sid), ts in firsts.items():
        by_assignment.setdefault(aid, []).append((ts, sid))
    for aid, entries in by_assignment.items():
        entries.sort()
        for rank, (_, sid) in enumerate(entries, start=1):
            order[(aid, sid)] = rank

    records = [
        SubmissionRecord(
            student_id=row["student_id"],
            assignment_id=row["assignment_id"],
            timestamp=row["timestamp"],
            submission_order=order[(row["assignment_id"], row["student_id"])],
            plagiarism_flag=row["plagiarism_flag"],
            compile_status=row["compile_status"],
            diagnostic_text=row["diagnostic_text"],
        )
        for row in raw_rows
    ]
    records.sort(key=lambda r: (r.timestamp, r.student_id, r.assignment_id))
    return records


def gen_cohort(cfg: SynthConfig) -> GeneratedCohort:
    """Generate a cohort, its sequences, and the planted-truth manifest."""
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_students
    students = _student_ids(n)
    assignment_groups = _assignment_ids(cfg.g, cfg.assignments_per_group)
    grouping = GroupingSpec.from_mapping(
        {aid: j + 1 for j, aids in enumerate(assignment_groups) for aid in aids}
    )
    taxonomy = default_taxonomy()
    thresholds = cfg.resolved_order_thresholds()

    n_fail = int(round(n * cfg.fail_fraction))
    if not 1 <= n_fail <= n - 1:
        raise ConfigError(
            f"fail_fraction {cfg.fail_fraction} leaves no students in one class"
        )
    perm = rng.permutation(n)
    observed_fail = np.zeros(n, dtype=bool)
    observed_fail[perm[:n_fail]] = True

    if cfg.label_noise > 0.0:
        flips = rng.random(n) < cfg.label_noise
    else:
        flips = np.zeros(n, dtype=bool)
    gen_fail = observed_fail ^ flips

    scores = np.where(
        observed_fail,
        np.round(30.0 + rng.random(n) * 29.9, 1),
        np.round(60.0 + rng.random(n) * 39.9, 1),
    )
    outcomes = {sid: float(scores[i]) for i, sid in enumerate(students)}

    if cfg.compile_signal is not None:
        raw_rows = _generate_compile_mode_rows(
            cfg, rng, students, gen_fail, assignment_groups, taxonomy
        )
        planted_state = None
    else:
        planted_state = _PatternModeGenerator(cfg, rng, students, gen_fail)
        planted_state.plant_all()
        planted_state.repair()
        raw_rows = _generate_pattern_mode_rows(
            cfg, rng, students, planted_state, assignment_groups
        )

    records = _finalize_rows(raw_rows)
    cohort = assemble_cohort(records, outcomes, grouping)
    sequences = build_sequences(cohort, thresholds)

    if planted_state is not None:
        _check_realization(planted_state, sequences, students)

    manifest = _build_manifest(
        cfg, students, observed_fail, gen_fail, thresholds, planted_state
    )
    return GeneratedCohort(cohort=cohort, sequences=sequences, manifest=manifest)


def _generate_pattern_mode_rows(
    cfg, rng, students, state: _PatternModeGenerator, assignment_groups
) -> list[dict]:
    counts = state.realize_counts()
    ranks = state.realize_ranks()
    flag_totals = state.realize_plagiarism_counts(counts)
    n, g, a = cfg.n_students, cfg.g, cfg.assignments_per_group

    rows: list[dict] = []
    rows_by_cell: dict[tuple[int, int], list[int]] = {}
    error_texts = [*DIAGNOSTIC_SAMPLES.values(), OTHER_DIAGNOSTIC]
    for j in range(g):
        for k, aid in enumerate(assignment_groups[j]):
            day = _BASE_TIME + timedelta(days=j * a + k)
            for i in range(n):
                per_assignment = _split_count(int(counts[i, j]), a)[k]
                first = day + timedelta(seconds=10 * int(ranks[i, j]))
                for rep in range(per_assignment):
                    if rng.random() < OK_RATE:
                        status, text = CompileStatus.OK, ""
                    else:
                        status = CompileStatus.ERROR
                        text = error_texts[int(rng.integers(len(error_texts)))]
                    rows.append(
                        {
                            "student_id": students[i],
                            "assignment_id": aid,
                            "timestamp": first + timedelta(seconds=rep),
                            "plagiarism_flag": False,
                            "compile_status": status,
                            "diagnostic_text": text,
                        }
                    )
                    rows_by_cell.setdefault((i, j), []).append(len(rows) - 1)

    for i in range(n):
        for j in range(g):
            total = int(flag_totals[i, j])
            if total == 0:
                continue
            cell_rows = rows_by_cell[(i, j)]
            chosen = rng.choice(len(cell_rows), size=total, replace=False)
            for c in chosen:
                rows[cell_rows[int(c)]]["plagiarism_flag"] = True
    return rows


def _generate_compile_mode_rows(
    cfg, rng, students, gen_fail, assignment_groups, taxonomy
) -> list[dict]:
    signal = cfg.compile_signal
    feature_names = taxonomy.feature_names
    n = cfg.n_students
    flat_assignments = [aid for aids in assignment_groups for aid in aids]
    slot_of = {aid: idx for idx, aid in enumerate(flat_assignments)}
    n_slots = len(flat_assignments)

    # one permutation per assignment fixes the first-submission order
    position = {
        aid: {int(s): p for p, s in enumerate(rng.permutation(n))}
        for aid in flat_assignments
    }

    rows: list[dict] = []
    for i in range(n):
        rates = signal.fail_rates if gen_fail[i] else signal.pass_rates
        category_counts = rng.poisson(np.asarray(rates, dtype=float))
        events = [
            cat for cat, cnt in enumerate(category_counts) for _ in range(int(cnt))
        ]
        events = [events[int(k)] for k in rng.permutation(len(events))]
        offset = int(rng.integers(n_slots))
        seen_on: dict[str, int] = {}
        for k, cat in enumerate(events):
            aid = flat_assignments[(offset + k) % n_slots]
            day = _BASE_TIME + timedelta(days=slot_of[aid])
            rep = seen_on.get(aid, 0)
            seen_on[aid] = rep + 1
            ts = (
                day
                + timedelta(seconds=10 * (position[aid][i] + 1))
                + timedelta(seconds=rep)
            )
            if cat == 0:
                status, text = CompileStatus.OK, ""
            else:
                status = CompileStatus.ERROR
                text = _diagnostic_text(feature_names[cat], taxonomy)
            rows.append(
                {
                    "student_id": students[i],
                    "assignment_id": aid,
                    "timestamp": ts,
                    "plagiarism_flag": False,
                    "compile_status": status,
                    "diagnostic_text": text,
                }
            )
    if not rows:
        raise GenerationError("compile rates produced no submissions at all")
    covered = {row["assignment_id"] for row in rows}
    empty_groups = [
        j + 1
        for j, aids in enumerate(assignment_groups)
        if not any(aid in covered for aid in aids)
    ]
    if empty_groups:
        raise GenerationError(
            f"groups {empty_groups} received no submissions; raise the "
            "compile rates or shrink g"
        )
    return rows


def _check_realization(state: _PatternModeGenerator, sequences: SequenceSet, students):
    """The rebuilt sequences must reproduce the planted symbols exactly."""
    for kind in SequenceKind:
        grid = state.symbols[kind]
        for i, sid in enumerate(students):
            rebuilt = sequences.sequences[sid][kind].symbols
            planted = tuple(int(v) for v in grid[i])
            if rebuilt != planted:
                raise GenerationError(
                    f"realization drifted for {sid} ({kind.value}): "
                    f"planted {planted}, rebuilt {rebuilt}"
                )


def _build_manifest(
    cfg, students, observed_fail, gen_fail, thresholds, state
) -> dict:
    manifest = {
        "seed": cfg.seed,
        "n_students": cfg.n_students,
        "g": cfg.g,
        "assignments_per_group": cfg.assignments_per_group,
        "fail_fraction": cfg.fail_fraction,
        "label_noise": cfg.label_noise,
        "order_thresholds": list(thresholds),
        "labels": {
            sid: (Outcome.FAIL if observed_fail[i] else Outcome.PASS).value
            for i, sid in enumerate(students)
        },
        "generative_class": {
            sid: ("fail" if gen_fail[i] else "pass") for i, sid in enumerate(students)
        },
        "planted": [],
        "compile_rates": None,
    }
    if cfg.compile_signal is not None:
        manifest["compile_rates"] = {
            "fail": list(cfg.compile_signal.fail_rates),
            "pass": list(cfg.compile_signal.pass_rates),
        }
    if state is not None:
        n_fail_observed = int(observed_fail.sum())
        for planted, carrier_set, embedding in zip(
            cfg.planted_patterns, state.carriers, state.embeddings
        ):
            fail_carriers = sorted(
                students[i] for i in carrier_set if observed_fail[i]
            )
            pass_carriers = sorted(
                students[i] for i in carrier_set if not observed_fail[i]
            )
            entry = {
                "kind": planted.pattern.kind.value,
                "pattern": format_pattern(planted.pattern),
                "fail_rate": planted.fail_rate,
                "pass_rate": planted.pass_rate,
                "fail_carriers": fail_carriers,
                "pass_carriers": pass_carriers,
                "embeddings": {
                    students[i]: [p + 1 for p in embedding[i]]
                    for i in sorted(embedding)
                },
                "expected_stats": None,
            }
            exact = (
                cfg.label_noise == 0.0
                and planted.fail_rate in (0.0, 1.0)
                and planted.pass_rate in (0.0, 1.0)
            )
            if exact:
                fail_m = len(fail_carriers)
                pass_m = len(pass_carriers)
                entry["expected_stats"] = {
                    "fail_matches": fail_m,
                    "pass_matches": pass_m,
                    "accuracy": (
                        fail_m / (fail_m + pass_m) if fail_m + pass_m else None
                    ),
                    "recall": fail_m / n_fail_observed,
                }
            manifest["planted"].append(entry)
    return manifest


def write_cohort_files(result: GeneratedCohort, out_dir) -> dict[str, str]:
    """Emit submissions/outcomes/grouping CSVs plus manifest.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "submissions": out / "submissions.csv",
        "outcomes": out / "outcomes.csv",
        "grouping": out / "grouping.csv",
        "manifest": out / "manifest.json",
    }
    write_submissions(list(result.cohort.submissions), paths["submissions"])
    write_outcomes(result.cohort.outcomes, paths["outcomes"])
    write_grouping(result.cohort.grouping, paths["grouping"])
    with open(paths["manifest"], "w", encoding="utf-8") as fh:
        json.dump(result.manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {name: str(path) for name, path in paths.items()}
