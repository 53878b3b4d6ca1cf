"""Gap-wildcard sequential patterns: grammar, matching, level-wise mining.

A pattern like ``(*)2(*)2(*)-2(*)-2(*)`` lists symbols separated by
wildcards. Under the default gap policy each interior ``(*)`` stands for
one or more arbitrary symbols and the leading/trailing ``(*)`` require at
least one symbol before the first and after the last match position.
Mining is level-wise: recall over the failing group is the anti-monotone
pruning measure, accuracy is a post-filter applied at every level.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import MiningError, PatternSyntaxError
from .sequences import FeatureSequence, SequenceKind


class GapInterior(Enum):
    ONE_OR_MORE = "one_or_more"
    ZERO_OR_MORE = "zero_or_more"


class GapBoundary(Enum):
    REQUIRED = "required"
    FREE = "free"


@dataclass(frozen=True)
class GapPolicy:
    interior: GapInterior = GapInterior.ONE_OR_MORE
    boundary: GapBoundary = GapBoundary.REQUIRED

    @property
    def min_step(self) -> int:
        """Minimum index distance between consecutive matched positions."""
        return 2 if self.interior is GapInterior.ONE_OR_MORE else 1

    @property
    def margin(self) -> int:
        """Symbols forced before the first / after the last match (0-based)."""
        return 1 if self.boundary is GapBoundary.REQUIRED else 0


DEFAULT_GAP_POLICY = GapPolicy()


def max_embeddable_length(g: int, policy: GapPolicy = DEFAULT_GAP_POLICY) -> int:
    """Longest pattern with any valid embedding into a length-g sequence."""
    span = g - 1 - 2 * policy.margin
    if span < 0:
        return 0
    return span // policy.min_step + 1


@dataclass(frozen=True)
class Pattern:
    """Non-empty ordered symbol list over one sequence kind's alphabet."""

    kind: SequenceKind
    symbols: tuple[int, ...]

    def __post_init__(self):
        if not self.symbols:
            raise ValueError("pattern must contain at least one symbol")
        allowed = set(self.kind.alphabet)
        for i, s in enumerate(self.symbols):
            if s not in allowed:
                raise ValueError(
                    f"symbol {s} at index {i} not in {self.kind.value} "
                    f"alphabet {sorted(allowed)}"
                )

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return format_pattern(self)

    def extend(self, symbol: int) -> "Pattern":
        return Pattern(self.kind, self.symbols + (symbol,))


def format_pattern(pattern: Pattern) -> str:
    """Canonical string form: wildcards around every symbol, no spaces."""
    return "(*)" + "(*)".join(str(s) for s in pattern.symbols) + "(*)"


_TOKEN_RE = re.compile(r"\(\*\)|-?\d+")


def parse_pattern(text: str, kind: SequenceKind) -> Pattern:
    """Parse pattern notation; whitespace between tokens is allowed.

    The string must start and end with ``(*)`` and strictly alternate
    wildcards and integer symbols.
    """
    tokens: list[tuple[str, int]] = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise PatternSyntaxError(f"unexpected character {text[pos]!r}", pos)
        tokens.append((m.group(), pos))
        pos = m.end()
    if not tokens:
        raise PatternSyntaxError("empty pattern", 0)
    # valid token stream is (*) sym (*) sym ... (*): wildcards at even
    # offsets, symbols at odd offsets, odd total count
    symbols: list[int] = []
    for idx, (token, at) in enumerate(tokens):
        if idx % 2 == 0:
            if token != "(*)":
                message = (
                    "pattern must start with '(*)'"
                    if idx == 0
                    else "adjacent symbols must be separated by '(*)'"
                )
                raise PatternSyntaxError(message, at)
        else:
            if token == "(*)":
                raise PatternSyntaxError(
                    "expected a symbol between '(*)' wildcards", at
                )
            symbols.append(int(token))
    if len(tokens) % 2 == 0:
        raise PatternSyntaxError("pattern must end with '(*)'", tokens[-1][1])
    if not symbols:
        raise PatternSyntaxError("pattern contains no symbols", tokens[-1][1])
    try:
        return Pattern(kind, tuple(symbols))
    except ValueError as err:
        raise PatternSyntaxError(str(err), 0) from None


def matches(
    seq: FeatureSequence, pattern: Pattern, policy: GapPolicy = DEFAULT_GAP_POLICY
) -> bool:
    """True iff the pattern embeds into the sequence under the gap policy.

    Greedy leftmost embedding: taking the earliest feasible position for
    each symbol never rules out a later completion, so this is exact.
    """
    if seq.kind is not pattern.kind:
        raise MiningError(
            f"kind mismatch: sequence is {seq.kind.value}, "
            f"pattern is {pattern.kind.value}"
        )
    symbols = seq.symbols
    step = policy.min_step
    margin = policy.margin
    last_allowed = len(symbols) - 1 - margin
    pos = margin
    matched_at = -1
    for target in pattern.symbols:
        while pos <= last_allowed and symbols[pos] != target:
            pos += 1
        if pos > last_allowed:
            return False
        matched_at = pos
        pos = matched_at + step
    return matched_at <= last_allowed


@dataclass(frozen=True)
class PatternStats:
    """Match counts of a pattern against the fail and pass groups."""

    fail_matches: int
    pass_matches: int
    fail_total: int
    pass_total: int

    @property
    def supported(self) -> bool:
        return self.fail_matches + self.pass_matches > 0

    @property
    def accuracy(self) -> float | None:
        """Fraction of matching students who failed; None when unsupported."""
        total = self.fail_matches + self.pass_matches
        if total == 0:
            return None
        return self.fail_matches / total

    @property
    def recall(self) -> float:
        """Fraction of failing students the pattern matches."""
        return self.fail_matches / self.fail_total


@dataclass(frozen=True)
class MiningConfig:
    min_recall: float = 0.70
    min_accuracy: float = 0.70
    max_pattern_length: int = 6
    gap_policy: GapPolicy = field(default_factory=GapPolicy)

    def __post_init__(self):
        if self.min_recall < 0 or self.min_accuracy < 0:
            raise ValueError("mining thresholds must be >= 0")
        if self.max_pattern_length < 1:
            raise ValueError("max_pattern_length must be >= 1")


@dataclass(frozen=True)
class MinedPattern:
    pattern: Pattern
    stats: PatternStats


def _check_groups(fail_seqs, pass_seqs):
    if not fail_seqs or not pass_seqs:
        raise MiningError("both the fail and pass groups must be non-empty")
    kind = fail_seqs[0].kind
    g = len(fail_seqs[0])
    for seq in list(fail_seqs) + list(pass_seqs):
        if seq.kind is not kind:
            raise MiningError("all sequences must share one kind")
        if len(seq) != g:
            raise MiningError("all sequences must share one length")
    return kind, g


def pattern_stats(
    pattern: Pattern,
    fail_seqs: list[FeatureSequence],
    pass_seqs: list[FeatureSequence],
    policy: GapPolicy = DEFAULT_GAP_POLICY,
) -> PatternStats:
    """Count matches in each group and derive accuracy/recall."""
    kind, _ = _check_groups(fail_seqs, pass_seqs)
    if kind is not pattern.kind:
        raise MiningError("pattern kind does not match the sequences")
    fail_m = sum(1 for s in fail_seqs if matches(s, pattern, policy))
    pass_m = sum(1 for s in pass_seqs if matches(s, pattern, policy))
    return PatternStats(
        fail_matches=fail_m,
        pass_matches=pass_m,
        fail_total=len(fail_seqs),
        pass_total=len(pass_seqs),
    )


def sort_key(item: MinedPattern):
    """Canonical output order: accuracy desc, recall desc, shorter first,
    then lexicographic on symbols."""
    stats = item.stats
    return (-(stats.accuracy or 0.0), -stats.recall, len(item.pattern), item.pattern.symbols)


def mine(
    fail_seqs: list[FeatureSequence],
    pass_seqs: list[FeatureSequence],
    config: MiningConfig = MiningConfig(),
) -> list[MinedPattern]:
    """Level-wise search for failure-predictive patterns.

    Level 1 enumerates every single-symbol pattern. Each level keeps, for
    extension, only patterns whose recall over the fail group meets
    ``min_recall`` (sound because appending a symbol can only shrink the
    match set). Output is every retained pattern, at any level, that also
    meets ``min_accuracy`` and matches at least one student.
    """
    kind, g = _check_groups(fail_seqs, pass_seqs)
    policy = config.gap_policy
    alphabet = kind.alphabet
    max_len = min(config.max_pattern_length, max_embeddable_length(g, policy))

    results: list[MinedPattern] = []
    # frontier entries: (pattern, fail match indices, pass match indices)
    frontier: list[tuple[Pattern, list[int], list[int]]] = []

    def evaluate(pattern, fail_candidates, pass_candidates):
        fail_idx = [i for i in fail_candidates if matches(fail_seqs[i], pattern, policy)]
        pass_idx = [i for i in pass_candidates if matches(pass_seqs[i], pattern, policy)]
        return fail_idx, pass_idx

    def consider(pattern, fail_idx, pass_idx, next_frontier):
        stats = PatternStats(
            fail_matches=len(fail_idx),
            pass_matches=len(pass_idx),
            fail_total=len(fail_seqs),
            pass_total=len(pass_seqs),
        )
        if not stats.supported:
            return
        if stats.recall >= config.min_recall:
            if stats.accuracy >= config.min_accuracy:
                results.append(MinedPattern(pattern, stats))
            if len(pattern) < max_len:
                next_frontier.append((pattern, fail_idx, pass_idx))

    if max_len >= 1:
        all_fail = list(range(len(fail_seqs)))
        all_pass = list(range(len(pass_seqs)))
        level: list[tuple[Pattern, list[int], list[int]]] = []
        for symbol in alphabet:
            pattern = Pattern(kind, (symbol,))
            fail_idx, pass_idx = evaluate(pattern, all_fail, all_pass)
            consider(pattern, fail_idx, pass_idx, level)
        frontier = level
        while frontier:
            next_frontier: list[tuple[Pattern, list[int], list[int]]] = []
            for parent, fail_idx, pass_idx in frontier:
                for symbol in alphabet:
                    child = parent.extend(symbol)
                    c_fail, c_pass = evaluate(child, fail_idx, pass_idx)
                    consider(child, c_fail, c_pass, next_frontier)
            frontier = next_frontier

    results.sort(key=sort_key)
    return results
