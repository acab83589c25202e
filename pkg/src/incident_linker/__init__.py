"""Link incoming AI failure reports to known incident records.

Pipeline: unify title/description, clean and tokenize, then rank incident
candidates with either exact BM25 or dense cosine similarity over an
embedding provider. Ships an evaluation harness, a triage HTTP service
with event-sourced persistence, and a CLI.
"""

from .corpus import (
    AiidAdapterConfig,
    Corpus,
    CorpusError,
    DatasetSplit,
    Incident,
    Report,
    Violation,
    load_snapshot,
    split,
    validate,
    write_canonical,
)
from .embedding import (
    CorpusStats,
    HashingEmbedderConfig,
    HashingProvider,
    ZeroVectorWarning,
    cosine,
    fit_stats,
    hashing_embed,
)
from .lexical import BM25Params, InvertedIndex, bm25_rank, bm25_score, build_index
from .metrics import (
    MetricReport,
    MetricSummary,
    accuracy_at_k,
    aggregate,
    mrr_at_k,
    ndcg_at_k,
)
from .retrieval import (
    IncidentIndex,
    PipelineConfig,
    RankedCandidates,
    StaleIndexError,
    index_incidents,
    rank,
    upsert_incident,
)
from .textprep import (
    DEFAULT_STOPWORDS,
    InputMode,
    PreprocessConfig,
    UnifiedText,
    clean,
    load_stopwords,
    prepare,
    tokenize_and_filter,
    unify,
)

__version__ = "0.1.0"

__all__ = [
    "AiidAdapterConfig",
    "BM25Params",
    "Corpus",
    "CorpusError",
    "CorpusStats",
    "DatasetSplit",
    "DEFAULT_STOPWORDS",
    "HashingEmbedderConfig",
    "HashingProvider",
    "Incident",
    "IncidentIndex",
    "InputMode",
    "InvertedIndex",
    "MetricReport",
    "MetricSummary",
    "PipelineConfig",
    "PreprocessConfig",
    "RankedCandidates",
    "Report",
    "StaleIndexError",
    "UnifiedText",
    "Violation",
    "ZeroVectorWarning",
    "accuracy_at_k",
    "aggregate",
    "bm25_rank",
    "bm25_score",
    "build_index",
    "clean",
    "cosine",
    "fit_stats",
    "hashing_embed",
    "index_incidents",
    "load_snapshot",
    "load_stopwords",
    "mrr_at_k",
    "ndcg_at_k",
    "prepare",
    "rank",
    "split",
    "tokenize_and_filter",
    "unify",
    "upsert_incident",
    "validate",
    "write_canonical",
    "__version__",
]
