"""flowlens: flow-based diagnostics for hierarchical classification pipelines.

The package treats the entities of a classification pipeline (training
labels, feature values, predictions, ground truth) as categorical multisets
and analyzes the flow of information between them as joint and conditional
distributions, rendered as Sankey, radial-tree, violin, and trend layouts.
"""

from .distributions import (
    ConditionalDistribution,
    FlowMatrix,
    QualityReport,
    QuantityReport,
    WeightedMultiset,
    conditional,
    flow_matrix,
    multilevel_quantity,
    quality_report,
    quantity_report,
)
from .errors import FlowlensError
from .evaluation import (
    AccuracyRow,
    DiagnosticFinding,
    DiagnosticKind,
    LayeredFlow,
    TrendClass,
    TrendKind,
    accuracy_report,
    audit_snapshot,
    diagnose,
    misclassification_flow,
    model_diff,
    trend,
)
from .features import (
    ImportanceScore,
    ViolinSummary,
    WelchResult,
    feature_label_flow,
    importance,
    rank_features,
    violin,
    welch,
)
from .ingest import (
    DatasetSnapshot,
    EvaluationRecord,
    FeatureColumn,
    LabeledInstance,
    ModelRun,
    TaxonomyNode,
    build_snapshot,
    load_snapshot,
    parse_evaluation,
    parse_features,
    parse_labels,
    parse_runs,
    parse_taxonomy,
    save_snapshot,
)
from .layout import (
    RadialLayout,
    SankeyLayout,
    count_crossings,
    layout_radial,
    layout_sankey,
    layout_violin,
)
from .svg import render_svg

__version__ = "0.1.0"
