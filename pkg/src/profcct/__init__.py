"""profcct: a calling-context-tree toolkit for performance profiles.

Normalizes profiles from folded text, pprof, and its own native
container into one tree representation; analyzes them (top-down,
bottom-up, and flat views, pruning, recursion collapsing, diffing,
aggregation, correlation, derived metrics); and serves interactive
flame-graph documents to a browser UI over a local HTTP API.
"""

from .errors import (ArityError, CallbackError, DuplicateMetric, EmptyQuery,
                     FormatError, FormulaError, MergeError, MetricMismatch,
                     ParseError, ProfileError, RangeError, UnknownFormat,
                     UnknownMetric, UnknownMetricSemantics, UnknownPath,
                     UnknownRole, ViewError)
from .folded import emit_folded, parse_folded, parse_frame, render_frame
from .formulas import Formula, MetricContext, derive, parse_formula
from .hooks import Handle, Hooks, register_node_callback
from .ingest import SourceFormat, detect_format, load, load_profile
from .layout import (FlameRect, MIN_WIDTH_DEFAULT, export_json, export_view,
                     layout_flame, table_rows)
from .model import (Aggregator, ContextNode, Frame, MetricDescriptor,
                    MetricKind, MonitoringPoint, NodeKind, Profile,
                    ProfileMeta, new_profile)
from .multi import (AggregateTree, DiffTree, aggregate, correlate, diff,
                    histogram, resolve_path)
from .native import deserialize, serialize
from .pprof import parse_pprof
from .views import (Directive, NodeView, ViewKind, ViewTree, as_nested,
                    collapse_recursion, compute_view, hot_rows, prune, search,
                    traverse, truncate_depth)
from ._kernels import backend as kernel_backend

__version__ = "0.1.0"
