"""Pattern grammar, gap-wildcard matching, and the level-wise miner."""

import numpy as np
import pytest

from studentrisk.errors import MiningError, PatternSyntaxError
from studentrisk.patterns import (
    DEFAULT_GAP_POLICY,
    GapBoundary,
    GapInterior,
    GapPolicy,
    MiningConfig,
    Pattern,
    format_pattern,
    matches,
    max_embeddable_length,
    mine,
    parse_pattern,
    pattern_stats,
)
from studentrisk.sequences import FeatureSequence, SequenceKind
from studentrisk.synth import oracle_match

TIMES = SequenceKind.TIMES
ORDER = SequenceKind.ORDER
PLAG = SequenceKind.PLAGIARISM

# reference pattern notation covering all three sequence kinds
REFERENCE_PATTERNS = [
    (TIMES, "(*)2(*)2(*)-2(*)-2(*)"),
    (TIMES, "(*)-2(*)-2(*)-2(*)-2(*)"),
    (TIMES, "(*)2(*)2(*)2(*)2(*)-2(*)"),
    (ORDER, "(*)3(*)3(*)"),
    (ORDER, "(*)3(*)3(*)3(*)"),
    (PLAG, "(*) 2 (*)"),
    (PLAG, "(*) 2 (*) 2 (*)"),
]

WORKED_SEQUENCE = FeatureSequence(
    TIMES, (-2, 2, 1, 1, 2, -2, -1, -1, -2, 1, -2, 1, 2, -1)
)


def seq(kind, *symbols):
    return FeatureSequence(kind, tuple(symbols))


class TestParseFormat:
    def test_table_notation(self):
        p = parse_pattern("(*)2(*)2(*)-2(*)-2(*)", TIMES)
        assert p.symbols == (2, 2, -2, -2)

    def test_spaced_notation(self):
        assert parse_pattern("(*) 2 (*)", PLAG).symbols == (2,)

    def test_boundary_wildcards_required(self):
        with pytest.raises(PatternSyntaxError, match="start"):
            parse_pattern("2(*)2", TIMES)
        with pytest.raises(PatternSyntaxError, match="end"):
            parse_pattern("(*)2", TIMES)

    def test_adjacent_symbols_rejected(self):
        with pytest.raises(PatternSyntaxError, match="separated"):
            parse_pattern("(*)2 2(*)", TIMES)

    def test_doubled_wildcard_rejected(self):
        with pytest.raises(PatternSyntaxError):
            parse_pattern("(*)2(*)(*)", TIMES)

    def test_no_symbols_rejected(self):
        with pytest.raises(PatternSyntaxError, match="no symbols"):
            parse_pattern("(*)", TIMES)

    def test_out_of_alphabet_rejected(self):
        with pytest.raises(PatternSyntaxError):
            parse_pattern("(*)9(*)", TIMES)
        with pytest.raises(PatternSyntaxError):
            parse_pattern("(*)-2(*)", ORDER)

    def test_garbage_rejected(self):
        with pytest.raises(PatternSyntaxError):
            parse_pattern("(*)two(*)", TIMES)

    def test_format_examples(self):
        assert format_pattern(Pattern(PLAG, (2,))) == "(*)2(*)"
        assert (
            format_pattern(Pattern(TIMES, (2, 2, -2, -2))) == "(*)2(*)2(*)-2(*)-2(*)"
        )

    def test_reference_patterns_round_trip(self):
        for kind, text in REFERENCE_PATTERNS:
            p = parse_pattern(text, kind)
            canonical = format_pattern(p)
            assert canonical == text.replace(" ", "")
            assert parse_pattern(canonical, kind) == p

    def test_random_round_trip(self):
        rng = np.random.default_rng(23)
        for _ in range(1000):
            kind = [TIMES, ORDER, PLAG][int(rng.integers(3))]
            length = int(rng.integers(1, 7))
            symbols = tuple(
                int(rng.choice(list(kind.alphabet))) for _ in range(length)
            )
            p = Pattern(kind, symbols)
            assert parse_pattern(format_pattern(p), kind) == p

    def test_empty_pattern_type_rejected(self):
        with pytest.raises(ValueError):
            Pattern(TIMES, ())


class TestMatches:
    def test_worked_example(self):
        p = parse_pattern("(*)2(*)2(*)-2(*)-2(*)", TIMES)
        assert matches(WORKED_SEQUENCE, p) is True

    def test_pigeonhole_too_long(self):
        g = 14
        too_long = max_embeddable_length(g) + 1  # 7 under the default policy
        p = Pattern(ORDER, (1,) * too_long)
        s = seq(ORDER, *([1] * g))
        assert matches(s, p) is False

    def test_max_embeddable_length_formula(self):
        assert max_embeddable_length(14) == (14 - 3) // 2 + 1 == 6
        assert max_embeddable_length(4) == 1
        free = GapPolicy(GapInterior.ZERO_OR_MORE, GapBoundary.FREE)
        assert max_embeddable_length(14, free) == 14

    def test_boundary_positions_excluded_by_default(self):
        # symbols sitting on the first/last position don't count
        assert matches(seq(PLAG, 2, 0, 0, 2), Pattern(PLAG, (2,))) is False
        assert matches(seq(PLAG, 0, 2, 0, 0), Pattern(PLAG, (2,))) is True

    def test_interior_gap_of_at_least_one(self):
        # adjacent hits need a symbol between them under one_or_more
        assert matches(seq(PLAG, 0, 2, 2, 0), Pattern(PLAG, (2, 2))) is False
        assert matches(seq(PLAG, 0, 2, 0, 2, 0), Pattern(PLAG, (2, 2))) is True

    def test_classic_gsp_policy(self):
        loose = GapPolicy(GapInterior.ZERO_OR_MORE, GapBoundary.FREE)
        assert matches(seq(PLAG, 2, 2, 0, 0), Pattern(PLAG, (2, 2)), loose) is True
        assert matches(seq(PLAG, 0, 2, 2, 0), Pattern(PLAG, (2, 2)), loose) is True

    def test_kind_mismatch_rejected(self):
        with pytest.raises(MiningError, match="kind"):
            matches(seq(ORDER, 1, 2, 3), Pattern(PLAG, (2,)))

    @pytest.mark.parametrize("kind", [TIMES, ORDER, PLAG])
    @pytest.mark.parametrize(
        "policy",
        [
            DEFAULT_GAP_POLICY,
            GapPolicy(GapInterior.ZERO_OR_MORE, GapBoundary.REQUIRED),
            GapPolicy(GapInterior.ONE_OR_MORE, GapBoundary.FREE),
            GapPolicy(GapInterior.ZERO_OR_MORE, GapBoundary.FREE),
        ],
    )
    def test_agrees_with_dp_oracle(self, kind, policy):
        rng = np.random.default_rng(hash((kind.value, policy.min_step, policy.margin)) % 2**32)
        alphabet = list(kind.alphabet)
        for _ in range(2000):
            s = seq(kind, *(int(rng.choice(alphabet)) for _ in range(14)))
            length = int(rng.integers(1, 7))
            p = Pattern(kind, tuple(int(rng.choice(alphabet)) for _ in range(length)))
            assert matches(s, p, policy) == oracle_match(s, p, policy)


class TestPatternStats:
    def test_hand_enumerated_counts(self):
        fail_seqs = [
            seq(PLAG, 0, 2, 0, 0),  # S1 matches
            seq(PLAG, 0, 0, 2, 0),  # S2 matches
            seq(PLAG, 2, 0, 0, 2),  # S3 boundary only
        ]
        pass_seqs = [
            seq(PLAG, 0, 2, 2, 0),  # S4 matches
            seq(PLAG, 0, 0, 0, 0),  # S5 no
        ]
        stats = pattern_stats(Pattern(PLAG, (2,)), fail_seqs, pass_seqs)
        assert (stats.fail_matches, stats.pass_matches) == (2, 1)
        assert stats.accuracy == pytest.approx(2 / 3)
        assert stats.recall == pytest.approx(2 / 3)

    def test_perfect_separator(self):
        fail_seqs = [seq(PLAG, 0, 2, 0, 0)] * 3
        pass_seqs = [seq(PLAG, 0, 0, 0, 0)] * 2
        stats = pattern_stats(Pattern(PLAG, (2,)), fail_seqs, pass_seqs)
        assert stats.accuracy == 1.0
        assert stats.recall == 1.0

    def test_unsupported_when_nobody_matches(self):
        fail_seqs = [seq(PLAG, 0, 0, 0, 0)]
        pass_seqs = [seq(PLAG, 0, 0, 0, 0)]
        stats = pattern_stats(Pattern(PLAG, (2,)), fail_seqs, pass_seqs)
        assert not stats.supported
        assert stats.accuracy is None

    def test_empty_group_rejected(self):
        with pytest.raises(MiningError):
            pattern_stats(Pattern(PLAG, (2,)), [], [seq(PLAG, 0, 0)])


class TestMine:
    def spec_groups(self):
        fail_seqs = [seq(ORDER, 1, 2, 1, 1), seq(ORDER, 3, 2, 1, 3)]
        pass_seqs = [seq(ORDER, 2, 1, 3, 3)]
        return fail_seqs, pass_seqs

    def test_exact_output_tiny_instance(self):
        # only (*)2(*) survives: symbol 1 matches the pass sequence too
        # (accuracy 2/3) and symbol 3 never appears interior in fail
        fail_seqs, pass_seqs = self.spec_groups()
        cfg = MiningConfig(min_recall=1.0, min_accuracy=1.0, max_pattern_length=1)
        out = mine(fail_seqs, pass_seqs, cfg)
        assert len(out) == 1
        assert out[0].pattern.symbols == (2,)
        assert out[0].stats.accuracy == 1.0
        assert out[0].stats.recall == 1.0

    def test_length_two_unembeddable_at_g4(self):
        fail_seqs, pass_seqs = self.spec_groups()
        cfg1 = MiningConfig(min_recall=1.0, min_accuracy=1.0, max_pattern_length=1)
        cfg2 = MiningConfig(min_recall=1.0, min_accuracy=1.0, max_pattern_length=2)
        assert mine(fail_seqs, pass_seqs, cfg1) == mine(fail_seqs, pass_seqs, cfg2)

    def test_anti_monotone_extension(self):
        rng = np.random.default_rng(31)
        seqs = [
            seq(TIMES, *(int(rng.choice(TIMES.alphabet)) for _ in range(14)))
            for _ in range(30)
        ]
        for _ in range(200):
            length = int(rng.integers(1, 5))
            base = Pattern(
                TIMES, tuple(int(rng.choice(TIMES.alphabet)) for _ in range(length))
            )
            extended = base.extend(int(rng.choice(TIMES.alphabet)))
            base_set = {i for i, s in enumerate(seqs) if matches(s, base)}
            ext_set = {i for i, s in enumerate(seqs) if matches(s, extended)}
            assert ext_set <= base_set

    def test_student_order_invariance(self):
        rng = np.random.default_rng(37)
        fail_seqs = [
            seq(ORDER, *(int(rng.choice(ORDER.alphabet)) for _ in range(8)))
            for _ in range(12)
        ]
        pass_seqs = [
            seq(ORDER, *(int(rng.choice(ORDER.alphabet)) for _ in range(8)))
            for _ in range(12)
        ]
        cfg = MiningConfig(min_recall=0.5, min_accuracy=0.5, max_pattern_length=3)
        baseline = mine(fail_seqs, pass_seqs, cfg)
        shuffled = mine(fail_seqs[::-1], list(reversed(pass_seqs)), cfg)
        assert baseline == shuffled

    def test_zero_thresholds_return_every_supported_pattern(self):
        from studentrisk.synth import oracle_mine

        rng = np.random.default_rng(41)
        fail_seqs = [
            seq(PLAG, *(int(rng.choice(PLAG.alphabet)) for _ in range(6)))
            for _ in range(5)
        ]
        pass_seqs = [
            seq(PLAG, *(int(rng.choice(PLAG.alphabet)) for _ in range(6)))
            for _ in range(5)
        ]
        cfg = MiningConfig(min_recall=0.0, min_accuracy=0.0, max_pattern_length=3)
        mined = mine(fail_seqs, pass_seqs, cfg)
        oracle = oracle_mine(fail_seqs, pass_seqs, cfg)
        assert [(m.pattern, m.stats) for m in mined] == [
            (m.pattern, m.stats) for m in oracle
        ]
        assert all(m.stats.supported for m in mined)

    def test_unsatisfiable_threshold_allowed_and_empty(self):
        fail_seqs, pass_seqs = self.spec_groups()
        cfg = MiningConfig(min_recall=1.01, min_accuracy=1.01, max_pattern_length=2)
        assert mine(fail_seqs, pass_seqs, cfg) == []

    def test_empty_group_rejected(self):
        with pytest.raises(MiningError):
            mine([], [seq(ORDER, 1, 2)], MiningConfig())

    def test_mixed_kinds_rejected(self):
        with pytest.raises(MiningError):
            mine([seq(ORDER, 1, 2)], [seq(PLAG, 0, 1)], MiningConfig())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            MiningConfig(max_pattern_length=0)
        with pytest.raises(ValueError):
            MiningConfig(min_recall=-0.1)
