"""Submission-behavior pattern mining and pass/fail prediction.

Pipeline stages: parse submission logs into a cohort, build standardized
behavior sequences, mine failure-predictive gap-wildcard patterns, extract
compile-diagnostic feature vectors, and train/evaluate pass-fail
predictors. A deterministic synthetic-cohort generator and brute-force
oracles back the test suite.
"""

from .model import (
    Cohort,
    CompileStatus,
    GroupingSpec,
    Outcome,
    SubmissionRecord,
    assemble_cohort,
    label_outcome,
    load_grouping,
    load_outcomes,
    load_submissions,
)
from .sequences import (
    FeatureSequence,
    SequenceKind,
    SequenceSet,
    build_sequences,
    difference_rate,
    discretize_order,
    discretize_plagiarism,
    discretize_times,
)
from .patterns import (
    GapBoundary,
    GapInterior,
    GapPolicy,
    MinedPattern,
    MiningConfig,
    Pattern,
    PatternStats,
    format_pattern,
    matches,
    mine,
    parse_pattern,
    pattern_stats,
)
from .diagnostics import (
    CompileFeatureVector,
    DiagnosticRule,
    DiagnosticTaxonomy,
    classify_diagnostic,
    default_taxonomy,
    extract_features,
)
from .synth import (
    CompileSignal,
    GeneratedCohort,
    PlantedPattern,
    SynthConfig,
    gen_cohort,
    oracle_match,
    oracle_mine,
)

__version__ = "0.1.0"
