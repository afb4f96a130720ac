"""luxen: an always-on visualization recommendation engine for tabular data.

Load a frame, optionally set an intent, and ask for a dashboard; metadata
and recommendations are computed lazily at print time, memoized, pruned via
sampling and scheduled cheapest-first.
"""

from .actions import (
    Action,
    ActionRegistry,
    Dashboard,
    Recommendation,
    Vis,
    default_registry,
    register_action,
    register_custom_action,
)
from .compiler import (
    AxisSpec,
    ChannelSpec,
    CompiledVisSpec,
    FilterSpec,
    PartialVisSpec,
    compile_intent,
    expand_intent,
    infer_encoding,
    lookup_defaults,
)
from .errors import (
    CsvFormatError,
    DuplicateActionError,
    ExpansionError,
    IntentParseError,
    IntentValidationError,
    LuxenError,
    TransformError,
    UnknownColumnError,
)
from .frame import (
    Column,
    FilterRows,
    Frame,
    GroupAggregate,
    HeadTail,
    HistoryEvent,
    InplaceModify,
    LoadOptions,
    Pivot,
    Project,
    Rename,
    SetColumn,
    apply_transform,
    expire_on_mutation,
    frame_from_dict,
    load_csv,
    transform_from_dict,
)
from .intent import (
    ClauseSpec,
    IntentSpec,
    ValidationWarning,
    parse_clause,
    parse_intent,
    print_clause,
    validate_intent,
)
from .metadata import ColumnMetadata, compute_metadata, infer_semantic_type, set_type_override
from .optimize import (
    Counters,
    Engine,
    EngineConfig,
    PruneDecision,
    SampleCache,
    approx_topk,
    make_sample,
    schedule_actions,
    should_prune,
)
from .scoring import pearson, pearson_columns, skewness
from .specdoc import serialize_spec_doc, to_spec_doc
from .visdata import VisData, process_vis

__version__ = "0.1.0"
