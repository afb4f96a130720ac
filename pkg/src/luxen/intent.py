"""The intent mini-language: clauses, parsing, printing and validation.

An intent is a non-empty ordered list of clauses, each either an axis
(attributes of interest, with optional channel/aggregation/bin hints) or a
filter (attribute, comparison, value). Attribute selectors may be unions
("a|b|c") or the wildcard "?" (optionally constrained to a semantic type);
filter values may be unions or the wildcard.

Textual syntax, which round-trips through ``print_clause``:

    Age                          axis on one attribute
    HourlyRate|DailyRate         axis union
    ?                            axis wildcard
    ?{data_type=quantitative}    constrained axis wildcard
    Age{aggregation=variance}    axis with explicit options
    Department=Sales             equality filter
    Country=?                    filter over every value of Country
    Age>=30                      comparison filter
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import IntentParseError, IntentValidationError

CHANNELS = ("x", "y", "color")
AGGREGATIONS = ("mean", "sum", "count", "min", "max", "variance", "none")
FILTER_OPS = ("=", ">", "<", "<=", ">=", "!=")
_OP_ALIASES = {"≤": "<=", "≥": ">=", "≠": "!="}
_SEMANTIC_TYPES = ("nominal", "quantitative", "temporal", "geographic")

# suggestions are offered up to this edit distance
SUGGESTION_MAX_DISTANCE = 3


@dataclass(frozen=True)
class ClauseSpec:
    """One parsed clause; axis and filter fields are mutually exclusive."""

    kind: str  # "axis" | "filter"
    attributes: Optional[tuple[str, ...]] = None  # named union; None = wildcard
    wildcard: bool = False
    constraint: Optional[str] = None  # semantic type, wildcard axes only
    channel: Optional[str] = None
    aggregation: Optional[str] = None
    bin_size: Optional[int] = None
    filter_op: Optional[str] = None
    values: Optional[tuple[str, ...]] = None  # named union; None = wildcard
    value_wildcard: bool = False

    def __post_init__(self):
        if self.kind not in ("axis", "filter"):
            raise IntentParseError(f"unknown clause kind {self.kind!r}")
        if self.kind == "axis":
            if self.filter_op is not None or self.values is not None or self.value_wildcard:
                raise IntentParseError("axis clause cannot carry a filter op or value")
            if not self.wildcard and not self.attributes:
                raise IntentParseError("axis clause needs at least one attribute")
            if self.wildcard and self.attributes:
                raise IntentParseError("wildcard axis cannot also name attributes")
            if self.channel is not None and self.channel not in CHANNELS:
                raise IntentParseError(f"unknown channel {self.channel!r}")
            if self.aggregation is not None and self.aggregation not in AGGREGATIONS:
                raise IntentParseError(f"unknown aggregation {self.aggregation!r}")
            if self.bin_size is not None and self.bin_size <= 0:
                raise IntentParseError("bin_size must be positive")
            if self.constraint is not None and self.constraint not in _SEMANTIC_TYPES:
                raise IntentParseError(f"unknown type constraint {self.constraint!r}")
        else:
            if self.wildcard or self.attributes is None or len(self.attributes) != 1:
                raise IntentParseError(
                    "filter clause requires exactly one named attribute"
                )
            if self.filter_op not in FILTER_OPS:
                raise IntentParseError(f"unknown filter op {self.filter_op!r}")
            if self.value_wildcard:
                if self.values is not None:
                    raise IntentParseError("wildcard value cannot also name values")
                if self.filter_op != "=":
                    raise IntentParseError(
                        "wildcard values are only supported with the = op"
                    )
            elif not self.values:
                raise IntentParseError("filter clause needs at least one value")
            if self.channel or self.aggregation or self.bin_size or self.constraint:
                raise IntentParseError(
                    "channel/aggregation/bin apply to axis clauses only"
                )

    @property
    def attribute(self) -> str:
        """Single attribute name (filters and non-union axes)."""
        assert self.attributes is not None and len(self.attributes) == 1
        return self.attributes[0]


@dataclass(frozen=True)
class IntentSpec:
    clauses: tuple[ClauseSpec, ...]

    def __post_init__(self):
        if not self.clauses:
            raise IntentParseError("intent requires at least one clause")

    @property
    def axis_clauses(self) -> tuple[ClauseSpec, ...]:
        return tuple(c for c in self.clauses if c.kind == "axis")

    @property
    def filter_clauses(self) -> tuple[ClauseSpec, ...]:
        return tuple(c for c in self.clauses if c.kind == "filter")


def _split_options(text: str, start: int) -> tuple[str, dict]:
    """Split trailing {key=value,...} options off a selector."""
    brace = text.find("{")
    if brace == -1:
        return text.strip(), {}
    if not text.rstrip().endswith("}"):
        raise IntentParseError("unterminated options block", start + brace)
    body = text.rstrip()[brace + 1 : -1]
    opts = {}
    for part in body.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise IntentParseError(
                f"malformed option {part.strip()!r}", start + brace
            )
        k, v = part.split("=", 1)
        opts[k.strip()] = v.strip()
    return text[:brace].strip(), opts


_OPTION_KEYS = {"channel", "aggregation", "bin_size", "data_type"}


def parse_clause(text: str) -> ClauseSpec:
    """Parse one clause string; raises IntentParseError with a position."""
    if not isinstance(text, str):
        raise IntentParseError(f"expected a clause string, got {type(text).__name__}")
    if not text.strip():
        raise IntentParseError("empty clause", 0)

    for alias, canon in _OP_ALIASES.items():
        text = text.replace(alias, canon)

    # find the first comparison operator outside an options block
    depth = 0
    op, op_pos = None, -1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        elif depth == 0:
            for candidate in ("<=", ">=", "!=", "=", "<", ">"):
                if text.startswith(candidate, i):
                    op, op_pos = candidate, i
                    break
            if op:
                break
        i += 1

    if op is None:
        selector, opts = _split_options(text, 0)
        unknown = set(opts) - _OPTION_KEYS
        if unknown:
            raise IntentParseError(f"unknown option {sorted(unknown)[0]!r}")
        channel = opts.get("channel")
        aggregation = opts.get("aggregation")
        bin_size = None
        if "bin_size" in opts:
            try:
                bin_size = int(opts["bin_size"])
            except ValueError:
                raise IntentParseError(f"bin_size must be an integer, got {opts['bin_size']!r}")
        constraint = opts.get("data_type")
        if selector == "?":
            return ClauseSpec(
                "axis",
                wildcard=True,
                constraint=constraint,
                channel=channel,
                aggregation=aggregation,
                bin_size=bin_size,
            )
        if constraint is not None:
            raise IntentParseError("data_type constraint applies to wildcard axes only")
        attrs = tuple(a.strip() for a in selector.split("|"))
        if any(not a for a in attrs):
            raise IntentParseError("empty attribute name in union", 0)
        if any(a == "?" for a in attrs):
            raise IntentParseError("wildcard cannot be part of a union", 0)
        return ClauseSpec(
            "axis",
            attributes=attrs,
            channel=channel,
            aggregation=aggregation,
            bin_size=bin_size,
        )

    left = text[:op_pos].strip()
    right = text[op_pos + len(op) :].strip()
    if not left:
        raise IntentParseError("filter is missing an attribute", 0)
    if not right:
        raise IntentParseError("filter is missing a value", op_pos + len(op))
    if left == "?":
        raise IntentParseError("filters cannot use a wildcard attribute", 0)
    if "|" in left:
        if right == "?":
            raise IntentParseError(
                "a union attribute with a wildcard value is not supported", 0
            )
        raise IntentParseError("filters require a single attribute", 0)
    if right == "?":
        return ClauseSpec(
            "filter", attributes=(left,), filter_op=op, value_wildcard=True
        )
    values = tuple(v.strip() for v in right.split("|"))
    if any(not v for v in values):
        raise IntentParseError("empty value in union", op_pos + len(op))
    return ClauseSpec("filter", attributes=(left,), filter_op=op, values=values)


def print_clause(clause: ClauseSpec) -> str:
    """Canonical text form; parse_clause(print_clause(c)) == c."""
    if clause.kind == "filter":
        value = "?" if clause.value_wildcard else "|".join(clause.values)
        return f"{clause.attribute}{clause.filter_op}{value}"
    selector = "?" if clause.wildcard else "|".join(clause.attributes)
    opts = []
    if clause.channel is not None:
        opts.append(f"channel={clause.channel}")
    if clause.aggregation is not None:
        opts.append(f"aggregation={clause.aggregation}")
    if clause.bin_size is not None:
        opts.append(f"bin_size={clause.bin_size}")
    if clause.constraint is not None:
        opts.append(f"data_type={clause.constraint}")
    return selector + ("{" + ",".join(opts) + "}" if opts else "")


def as_clause(obj) -> ClauseSpec:
    """Coerce a clause string, attribute list, dict or ClauseSpec."""
    if isinstance(obj, ClauseSpec):
        return obj
    if isinstance(obj, str):
        return parse_clause(obj)
    if isinstance(obj, (list, tuple)):
        attrs = tuple(str(a) for a in obj)
        if not attrs:
            raise IntentParseError("empty attribute union")
        return ClauseSpec("axis", attributes=attrs)
    if isinstance(obj, dict):
        return _clause_from_dict(obj)
    raise IntentParseError(f"cannot interpret {type(obj).__name__} as a clause")


def _clause_from_dict(d: dict) -> ClauseSpec:
    attribute = d.get("attribute")
    wildcard = attribute == "?"
    attributes: Optional[tuple[str, ...]]
    if wildcard or attribute is None:
        attributes = None
    elif isinstance(attribute, (list, tuple)):
        attributes = tuple(str(a) for a in attribute)
    else:
        attributes = (str(attribute),)

    if "filter_op" in d or "value" in d or "values" in d:
        raw = d.get("values", d.get("value"))
        value_wildcard = raw == "?"
        if value_wildcard:
            values = None
        elif isinstance(raw, (list, tuple)):
            values = tuple(str(v) for v in raw)
        elif raw is None:
            values = None
        else:
            values = (str(raw),)
        return ClauseSpec(
            "filter",
            attributes=attributes,
            filter_op=d.get("filter_op", "="),
            values=values,
            value_wildcard=value_wildcard,
        )
    bin_size = d.get("bin_size")
    return ClauseSpec(
        "axis",
        attributes=attributes,
        wildcard=wildcard,
        constraint=d.get("data_type"),
        channel=d.get("channel"),
        aggregation=d.get("aggregation"),
        bin_size=int(bin_size) if bin_size is not None else None,
    )


def parse_intent(clauses: Sequence) -> IntentSpec:
    """Build an IntentSpec from a mixed list of clause inputs."""
    if not clauses:
        raise IntentParseError("intent requires at least one clause")
    return IntentSpec(tuple(as_clause(c) for c in clauses))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass
class ValidationWarning:
    message: str
    clause_index: int
    suggestion: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "message": self.message,
            "clause_index": self.clause_index,
            "suggestion": self.suggestion,
        }


def levenshtein(a: str, b: str) -> int:
    """Classic edit distance (insert/delete/substitute, unit costs)."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def nearest_column(name: str, candidates: Sequence[str]) -> Optional[str]:
    """Closest column by case-insensitive edit distance, ties lexicographic."""
    best, best_d = None, SUGGESTION_MAX_DISTANCE + 1
    for cand in sorted(candidates):
        d = levenshtein(name.lower(), cand.lower())
        if d < best_d:
            best, best_d = cand, d
    return best


def validate_intent(intent: IntentSpec, metas: dict) -> tuple[IntentSpec, list[ValidationWarning]]:
    """Check an intent against frame metadata; never mutates the intent.

    Unknown attribute names yield a warning carrying the nearest column name.
    Unknown filter values (checked against stored uniques when the column is
    below the distinct-value cap) are warnings too. The intent is rejected
    only when no clause can be resolved at all: neither an exact column
    match nor a near-miss suggestion exists for any clause.
    """
    warnings: list[ValidationWarning] = []
    names = list(metas.keys())
    any_resolvable = False

    for i, clause in enumerate(intent.clauses):
        if clause.kind == "axis" and clause.wildcard:
            any_resolvable = True
            continue
        clause_ok = False
        for attr in clause.attributes or ():
            if attr in metas:
                clause_ok = True
                continue
            suggestion = nearest_column(attr, names)
            if suggestion is not None:
                clause_ok = True
                warnings.append(
                    ValidationWarning(
                        f"unknown attribute {attr!r}; did you mean {suggestion!r}?",
                        i,
                        suggestion,
                    )
                )
            else:
                warnings.append(
                    ValidationWarning(f"unknown attribute {attr!r}", i, None)
                )
        if clause.kind == "filter" and clause.values and clause.attribute in metas:
            meta = metas[clause.attribute]
            if not meta.capped:
                known = {str(u) for u in meta.unique_values}
                for v in clause.values:
                    if str(v) not in known:
                        warnings.append(
                            ValidationWarning(
                                f"value {v!r} not present in column "
                                f"{clause.attribute!r}",
                                i,
                            )
                        )
        any_resolvable = any_resolvable or clause_ok

    if not any_resolvable:
        raise IntentValidationError(
            "no clause of the intent resolves to a column of the frame"
        )
    return intent, warnings
