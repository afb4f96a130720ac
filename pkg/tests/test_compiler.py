import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from luxen import (
    ClauseSpec,
    ExpansionError,
    IntentSpec,
    compile_intent,
    compute_metadata,
    expand_intent,
    frame_from_dict,
    infer_encoding,
    parse_intent,
)
from luxen.compiler import AxisSpec, FilterSpec, PartialVisSpec, lookup_all, lookup_defaults


@pytest.fixture
def hr_frame():
    return frame_from_dict(
        {
            "Age": [25.0, 30.0, 41.0, 38.0],
            "HourlyRate": [10.0, 12.0, 9.0, 20.0],
            "DailyRate": [80.0, 96.0, 72.0, 160.0],
            "MonthlyRate": [1600.0, 1920.0, 1440.0, 3200.0],
            "EducationField": ["Arts", "Science", "Arts", "Math"],
            "Department": ["Sales", "Support", "Sales", "Sales"],
        }
    )


@pytest.fixture
def hr_metas(hr_frame):
    return compute_metadata(hr_frame)


def test_union_of_three_yields_three_specs(hr_metas):
    intent = parse_intent(["EducationField", ["HourlyRate", "DailyRate", "MonthlyRate"]])
    specs = expand_intent(intent, hr_metas)
    assert len(specs) == 3
    rates = {s.axes[1].attribute for s in specs}
    assert rates == {"HourlyRate", "DailyRate", "MonthlyRate"}


def test_double_quantitative_wildcard_symmetric_dedupe():
    f = frame_from_dict({"a": [1.0, 2.0], "b": [2.0, 1.0], "c": [3.0, 0.5]})
    metas = compute_metadata(f)
    intent = parse_intent(["?{data_type=quantitative}", "?{data_type=quantitative}"])
    specs = expand_intent(intent, metas)
    # 9 pairs minus 3 diagonal, halved by symmetry
    assert len(specs) == 3
    assert all(s.axes[0].attribute < s.axes[1].attribute for s in specs)


def test_fully_named_intent_single_spec(hr_metas):
    intent = parse_intent(["Age", "Department=Sales"])
    specs = expand_intent(intent, hr_metas)
    assert len(specs) == 1
    assert specs[0].filters == (FilterSpec("Department", "=", "Sales"),)


def test_filter_value_wildcard_enumerates_uniques(hr_metas):
    intent = parse_intent(["Age", "Department=?"])
    specs = expand_intent(intent, hr_metas)
    values = {s.filters[0].value for s in specs}
    assert values == {"Sales", "Support"}


def test_wildcard_over_capped_column_rejected():
    from luxen.metadata import UNIQUE_CAP

    f = frame_from_dict({"id": [f"u{i}" for i in range(UNIQUE_CAP + 1)], "x": [1.0] * (UNIQUE_CAP + 1)})
    metas = compute_metadata(f)
    with pytest.raises(ExpansionError, match="id"):
        expand_intent(parse_intent(["x", "id=?"]), metas)


def test_more_than_three_axes_dropped(hr_metas):
    intent = parse_intent(["Age", "HourlyRate", "DailyRate", "MonthlyRate"])
    assert expand_intent(intent, hr_metas) == []


def _brute_force_expand(intent, metas):
    """Independent enumerator: nested loops + explicit filtering rules.

    Unordered axis duplicates match on attribute plus explicit options; the
    originating clause does not matter.
    """
    alternatives = []
    for clause in intent.clauses:
        if clause.kind == "axis":
            if clause.wildcard:
                names = [
                    n
                    for n, m in metas.items()
                    if clause.constraint is None or m.semantic_type == clause.constraint
                ]
            else:
                names = list(clause.attributes)
            opts = (clause.channel, clause.aggregation, clause.bin_size)
            alternatives.append([("axis", n, opts) for n in names])
        else:
            if clause.value_wildcard:
                values = [str(v) for v in metas[clause.attribute].unique_values]
            else:
                values = list(clause.values)
            alternatives.append([("filter", clause.attribute, clause.filter_op, v) for v in values])

    seen = set()
    count = 0
    for combo in itertools.product(*alternatives):
        axes = [c for c in combo if c[0] == "axis"]
        filters = tuple(c for c in combo if c[0] == "filter")
        attrs = [a[1] for a in axes]
        if len(set(attrs)) != len(attrs):
            continue
        if len(axes) > 3:
            continue
        key = (frozenset(axes), filters)
        if key in seen:
            continue
        seen.add(key)
        count += 1
    return count


@pytest.mark.parametrize("seed", range(6))
def test_expansion_count_matches_bruteforce(hr_metas, seed):
    rng = random.Random(seed)
    cols = list(hr_metas.keys())
    clauses = []
    for _ in range(rng.randint(1, 3)):
        roll = rng.random()
        if roll < 0.4:
            clauses.append(ClauseSpec("axis", attributes=(rng.choice(cols),)))
        elif roll < 0.7:
            clauses.append(
                ClauseSpec("axis", attributes=tuple(rng.sample(cols, rng.randint(1, 3))))
            )
        else:
            clauses.append(
                ClauseSpec(
                    "axis",
                    wildcard=True,
                    constraint=rng.choice([None, "quantitative", "nominal"]),
                )
            )
    if rng.random() < 0.5:
        clauses.append(
            ClauseSpec("filter", attributes=("Department",), filter_op="=", value_wildcard=True)
        )
    intent = IntentSpec(tuple(clauses))
    specs = expand_intent(intent, hr_metas)
    assert len(specs) == _brute_force_expand(intent, hr_metas)


def test_lookup_attaches_semantic_types(hr_metas):
    partial = PartialVisSpec((AxisSpec("Age"),), ())
    kept, reason = lookup_defaults(partial, hr_metas)
    assert reason is None
    assert kept.axes[0].semantic_type == "quantitative"


def test_lookup_filters_two_high_cardinality_nominals():
    f = frame_from_dict(
        {
            "Name": [f"person {i}" for i in range(60)],
            "Code": [f"code {i}" for i in range(60)],
        }
    )
    metas = compute_metadata(f)
    partial = PartialVisSpec((AxisSpec("Name"), AxisSpec("Code")), ())
    kept, reason = lookup_defaults(partial, metas)
    assert kept is None and "cardinality" in reason


def test_lookup_filters_all_null_column():
    f = frame_from_dict({"x": [None, None], "y": [1.0, 2.0]})
    metas = compute_metadata(f)
    kept, reason = lookup_defaults(PartialVisSpec((AxisSpec("x"),), ()), metas)
    assert kept is None and "non-null" in reason


def test_lookup_rejects_temporal_on_color():
    f = frame_from_dict(
        {"d": ["2020-01-01", "2021-01-01"], "x": [1.0, 2.0], "y": [2.0, 1.0]}
    )
    metas = compute_metadata(f)
    partial = PartialVisSpec(
        (AxisSpec("x"), AxisSpec("y"), AxisSpec("d", channel="color")), ()
    )
    kept, reason = lookup_defaults(partial, metas)
    assert kept is None and "color" in reason


def _compile_one(frame, clause_texts):
    metas = compute_metadata(frame)
    specs, _ = compile_intent(parse_intent(clause_texts), metas, frame.row_count)
    assert len(specs) == 1
    return specs[0]


def test_infer_quantitative_nominal_bar(hr_frame):
    spec = _compile_one(hr_frame, ["Age", "EducationField"])
    assert spec.mark == "bar"
    assert spec.x.attribute == "EducationField"
    assert spec.y.attribute == "Age"
    assert spec.y.aggregation == "mean"


def test_infer_explicit_aggregation_override(hr_frame):
    spec = _compile_one(hr_frame, ["Age{aggregation=variance}", "EducationField"])
    assert spec.y.aggregation == "variance"


def test_infer_scatter_vs_heatmap_row_threshold():
    small = frame_from_dict({"a": [float(i) for i in range(10)], "b": [float(i) for i in range(10)]})
    spec = _compile_one(small, ["a", "b"])
    assert spec.mark == "scatter"
    metas = compute_metadata(small)
    big_spec = compile_intent(parse_intent(["a", "b"]), metas, 10_000)[0][0]
    assert big_spec.mark == "heatmap"
    assert big_spec.x.bin_size == 40 and big_spec.y.bin_size == 40


def test_infer_single_quantitative_histogram(hr_frame):
    spec = _compile_one(hr_frame, ["Age"])
    assert spec.mark == "histogram"
    assert spec.x.bin_size == 10
    assert spec.y.aggregation == "count"


def test_infer_single_nominal_bar_sorted(hr_frame):
    spec = _compile_one(hr_frame, ["Department"])
    assert spec.mark == "bar" and spec.sort_descending


def test_infer_temporal_line():
    f = frame_from_dict({"d": ["2020-01-01", "2021-03-01", "2022-06-01"]})
    spec = _compile_one(f, ["d"])
    assert spec.mark == "line"


def test_infer_geographic_map():
    f = frame_from_dict({"Country": ["Kenya", "Japan"], "hdi": [0.6, 0.9]})
    spec = _compile_one(f, ["Country", "hdi"])
    assert spec.mark == "map"
    assert spec.x.attribute == "Country"
    assert spec.y.aggregation == "mean"


def test_infer_two_nominal_color_bar():
    f = frame_from_dict(
        {"dept": ["a", "b", "a", "c"], "level": ["jr", "sr", "jr", "jr"]}
    )
    spec = _compile_one(f, ["dept", "level"])
    assert spec.mark == "color-bar"
    # lower-cardinality attribute takes the color channel
    assert spec.color.attribute == "level"
    assert spec.x.attribute == "dept"


def test_infer_three_quantitative_color_heatmap(hr_frame):
    spec = _compile_one(hr_frame, ["Age", "HourlyRate", "DailyRate"])
    assert spec.mark == "color-heatmap"
    assert spec.color.attribute == "DailyRate"
    assert spec.color.aggregation == "mean"


def test_infer_qqn_color_scatter(hr_frame):
    spec = _compile_one(hr_frame, ["Age", "HourlyRate", "Department"])
    assert spec.mark == "color-scatter"
    assert spec.color.attribute == "Department"


def test_infer_explicit_channel_swap(hr_frame):
    spec = _compile_one(hr_frame, ["Age{channel=x}", "EducationField{channel=y}"])
    assert spec.x.attribute == "Age"
    assert spec.y.attribute == "EducationField"


def test_compile_determinism(hr_frame):
    metas = compute_metadata(hr_frame)
    intent = parse_intent(["?", "?"])
    a, _ = compile_intent(intent, metas, hr_frame.row_count)
    b, _ = compile_intent(intent, metas, hr_frame.row_count)
    assert a == b


def test_unsupported_signature_filtered_with_diagnostic():
    f = frame_from_dict(
        {"d": ["2020-01-01", "2021-01-01"], "e": ["2020-02-01", "2021-02-01"]}
    )
    metas = compute_metadata(f)
    specs, diags = compile_intent(parse_intent(["d", "e"]), metas, 2)
    assert specs == []
    assert any("unsupported" in d.reason for d in diags)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.sampled_from(["Age", "HourlyRate", "EducationField", "Department"]),
        min_size=1,
        max_size=3,
        unique=True,
    )
)
def test_expansion_cardinality_upper_bound(attrs):
    f = frame_from_dict(
        {
            "Age": [25.0, 30.0],
            "HourlyRate": [10.0, 12.0],
            "EducationField": ["Arts", "Science"],
            "Department": ["Sales", "Support"],
        }
    )
    metas = compute_metadata(f)
    intent = IntentSpec(tuple(ClauseSpec("axis", attributes=(a,)) for a in attrs))
    specs = expand_intent(intent, metas)
    assert len(specs) <= 1  # product of singletons
