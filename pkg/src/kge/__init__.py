"""Multilingual knowledge-graph textual enhancement by multi-source agreement."""

__version__ = "0.1.0"
FORMAT_VERSION = 1

from .contextualizer import Direction, MarkedSentence, extract_marked_span, naturalize, naturalize_fallback
from .ensemble import (
    EnhancementResult,
    EnsembleConfig,
    ScoredAnswer,
    enhance_entity,
    flag_incorrect,
    score_candidates,
    select,
)
from .evaluator import (
    BenchmarkEntry,
    MetricTriple,
    aggregate,
    coverage_scores,
    load_benchmark,
    precision_scores,
    relaxed_scores,
)
from .matchers import MatcherConfig, MatchMode, fallback_embed, normalize_name, phi_desc, phi_name
from .store import EntityRecord, KgSnapshot, PopularityBucket, load_snapshot, popularity_bucket, save_snapshot, upsert_names
