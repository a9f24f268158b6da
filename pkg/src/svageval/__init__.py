"""Evaluation toolkit for multi-referent spatio-temporal video action
grounding: per-query spatial tracking quality (HOTA family), identity
mapping across the spatial/temporal boundary, temporal grounding metrics
(R@k, mAP, mIoU), and the combined m-HIoU leaderboard score."""

from .model import (
    BoundingBox,
    Detection,
    HotaComponents,
    PredictionSet,
    Query,
    Referent,
    ScoredSegment,
    TemporalMetrics,
    TemporalSegment,
    Track,
    ValidationError,
)
from .ingest import (
    DatasetSplit,
    Diagnostic,
    GroundTruthBundle,
    IngestError,
    VideoGroundTruth,
    compute_stats,
    load_split,
    parse_prediction_bundle,
    parse_query_json,
    parse_track_csv,
    validate_split,
)
from .spatial import (
    ALPHAS,
    AlphaMatchResult,
    PairAlignment,
    box_iou,
    global_alignment,
    hota_at_alpha,
    hota_sweep,
    match_at_alpha,
)
from .idmap import IdMap, TemporalPair, build_id_map, build_temporal_pairs
from .temporal import (
    average_precision,
    evaluate_temporal,
    map_at,
    miou,
    nms,
    recall_at_k,
    temporal_iou,
)
from .report import (
    DatasetReport,
    FinalReport,
    build_final_report,
    cross_dataset_mean,
    m_hiou,
    write_report,
)
from .pipeline import evaluate_datasets, evaluate_query, evaluate_split
from .synth import (
    ScenarioSpec,
    generate,
    generate_count_bundle,
    oracle_hota,
    oracle_temporal,
    write_split,
)

__version__ = "0.1.0"
