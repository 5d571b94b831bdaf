"""idrisk: Identity Ecosystem graphs, link prediction and PII disclosure risk."""

from .cases import (
    CaseFilter,
    CaseParseError,
    CaseRecord,
    SynthConfig,
    filter_cases,
    load_cases,
    save_cases,
    synthesize_cases,
)
from .graph import (
    DisclosureProb,
    EcosystemGraph,
    GraphFormatError,
    UnknownNodeError,
    build_graph,
    disclosure_probabilities,
    graph_stats,
    load_graph,
    save_graph,
)
from .metrics import (
    FeatureStandardization,
    NodeFeatureTable,
    betweenness,
    closeness,
    degrees,
    feature_table,
    pagerank,
    standardize,
)
from .models import (
    EdgeScore,
    LinkSplit,
    ModelConfig,
    TrainReport,
    evaluate,
    random_link_split,
    score_featureGCN,
    score_featureMLP,
    score_seeGCN,
    train,
)
from .risk import RiskQuery, RiskReport, assess, manual_override, structural_score
from .semantics import (
    EmbeddingProviderConfig,
    Lexicon,
    SemanticEmbedding,
    contextualize,
    embed,
    embed_all,
)
from .workspace import Workspace, WorkspaceError

__version__ = "0.1.0"
