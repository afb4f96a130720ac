import random

import numpy as np
import pytest

from luxen import (
    Dashboard,
    DuplicateActionError,
    Engine,
    EngineConfig,
    FilterRows,
    HeadTail,
    Pivot,
    apply_transform,
    compute_metadata,
    default_registry,
    frame_from_dict,
    parse_intent,
    register_custom_action,
    set_type_override,
)
from luxen.actions import dashboard_branch
from luxen.compiler import CompiledVisSpec, ChannelSpec


def quiet_engine(**cfg) -> Engine:
    defaults = dict(prune=False, async_scheduling=False)
    defaults.update(cfg)
    return Engine(EngineConfig(**defaults))


@pytest.fixture
def hpi_frame():
    rng = random.Random(0)
    n = 120
    inequality = [rng.uniform(0, 60) for _ in range(n)]
    life = [82 - 0.35 * q + rng.gauss(0, 2) for q in inequality]
    gdp = [rng.lognormvariate(9, 1) for _ in range(n)]
    region = [rng.choice(["Africa", "Asia", "Europe", "Americas"]) for _ in range(n)]
    country = [rng.choice(["Kenya", "Japan", "Germany", "Brazil", "Canada"]) for _ in range(n)]
    date = [rng.choice(["2020-01-01", "2021-01-01", "2022-01-01"]) for _ in range(n)]
    return frame_from_dict(
        {
            "AvrgLifeExpectancy": life,
            "Inequality": inequality,
            "GDPperCapita": gdp,
            "Region": region,
            "Country": country,
            "ReportDate": date,
        }
    )


def test_overview_dashboard_tabs(hpi_frame):
    eng = quiet_engine()
    dash = eng.recommend(hpi_frame)
    assert dash.action_names == [
        "Correlation",
        "Distribution",
        "Occurrence",
        "Temporal",
        "Geographic",
    ]
    assert dash.current_vis is None


def test_correlation_pair_enumeration_and_dedupe(hpi_frame):
    eng = quiet_engine()
    dash = eng.recommend(hpi_frame)
    corr = dash.recommendation("Correlation")
    # 3 quantitative columns -> 3 unordered pairs
    assert len(corr.vises) == 3
    pairs = [frozenset(v.spec.referenced_attributes()) for v in corr.vises]
    assert len(set(pairs)) == len(pairs)


def test_correlation_perfect_pair_ranked_first():
    f = frame_from_dict(
        {
            "x": [1.0, 2.0, 3.0, 4.0],
            "y": [2.0, 4.0, 6.0, 8.0],
            "z": [5.0, 1.0, 4.0, 2.2],
        }
    )
    dash = quiet_engine().recommend(f)
    corr = dash.recommendation("Correlation")
    top = corr.vises[0]
    assert frozenset(top.spec.referenced_attributes()) == {"x", "y"}
    assert top.score == pytest.approx(1.0)


def test_constant_column_pair_ranked_last():
    f = frame_from_dict(
        {
            "x": [1.0, 2.0, 3.0, 4.0],
            "y": [2.0, 4.0, 6.5, 8.0],
            "const": [5.0, 5.0, 5.0, 5.0],
        }
    )
    dash = quiet_engine().recommend(f)
    corr = dash.recommendation("Correlation")
    assert "const" in corr.vises[-1].spec.referenced_attributes()
    assert corr.vises[-1].score is None


def test_distribution_ranks_skew_above_symmetric():
    rng = random.Random(1)
    f = frame_from_dict(
        {
            "skewed": [rng.expovariate(0.5) for _ in range(300)],
            "flat": [rng.uniform(0, 1) for _ in range(300)],
        }
    )
    dash = quiet_engine().recommend(f)
    dist = dash.recommendation("Distribution")
    assert dist.vises[0].spec.referenced_attributes() == ("skewed",)


def test_occurrence_cardinality_ascending(hpi_frame):
    dash = quiet_engine().recommend(hpi_frame)
    occ = dash.recommendation("Occurrence")
    metas = compute_metadata(hpi_frame)
    cards = [metas[v.spec.referenced_attributes()[0]].cardinality for v in occ.vises]
    assert cards == sorted(cards)


def test_all_quantitative_frame_has_no_occurrence():
    f = frame_from_dict({"a": [1.0, 2.0, 3.0], "b": [3.0, 1.0, 2.0]})
    dash = quiet_engine().recommend(f)
    assert dash.recommendation("Occurrence") is None


def test_univariate_sizes_by_type(hpi_frame):
    dash = quiet_engine().recommend(hpi_frame)
    assert len(dash.recommendation("Distribution").vises) == 3
    assert len(dash.recommendation("Occurrence").vises) == 1
    assert len(dash.recommendation("Temporal").vises) == 1
    assert len(dash.recommendation("Geographic").vises) == 1


def test_intent_dashboard_current_enhance_filter(hpi_frame):
    hpi_frame.set_intent(parse_intent(["AvrgLifeExpectancy", "Inequality"]))
    dash = quiet_engine().recommend(hpi_frame)
    assert dash.action_names == ["Current", "Enhance", "Filter"]
    assert dash.current_vis is not None
    assert dash.current_vis.spec.mark == "scatter"


def test_enhance_includes_region_color_scatter(hpi_frame):
    hpi_frame.set_intent(parse_intent(["AvrgLifeExpectancy", "Inequality"]))
    dash = quiet_engine().recommend(hpi_frame)
    enhance = dash.recommendation("Enhance")
    added = {v.aux["added"]: v.spec.mark for v in enhance.vises}
    assert added.get("Region") == "color-scatter"


def test_enhance_empty_for_three_axis_intent(hpi_frame):
    hpi_frame.set_intent(
        parse_intent(["AvrgLifeExpectancy", "Inequality", "GDPperCapita"])
    )
    dash = quiet_engine().recommend(hpi_frame)
    enhance = dash.recommendation("Enhance")
    assert enhance is not None and enhance.vises == []


def test_filter_candidates_enumerate_low_cardinality_values(hpi_frame):
    hpi_frame.set_intent(parse_intent(["AvrgLifeExpectancy"]))
    dash = quiet_engine().recommend(hpi_frame, k=50)
    filt = dash.recommendation("Filter")
    region_values = {
        v.aux["filter_value"] for v in filt.vises if v.aux["filter_attr"] == "Region"
    }
    assert region_values == {"Africa", "Asia", "Europe", "Americas"}


def test_wildcard_intent_shows_expanded_vislist(hpi_frame):
    hpi_frame.set_intent(parse_intent(["AvrgLifeExpectancy", "Region|Country"]))
    dash = quiet_engine().recommend(hpi_frame)
    assert dash.current_vis is None
    current = dash.recommendation("Current")
    assert len(current.vises) == 2
    assert dash.recommendation("Enhance") is None


def test_filter_only_intent_enhances_each_column(hpi_frame):
    hpi_frame.set_intent(parse_intent(["Region=Africa"]))
    dash = quiet_engine().recommend(hpi_frame)
    assert dash.current_vis is None
    enhance = dash.recommendation("Enhance")
    assert enhance is not None and len(enhance.vises) > 0
    assert all(
        v.spec.filters and v.spec.filters[0].value == "Africa" for v in enhance.vises
    )
    assert dash.recommendation("Filter") is None


def test_intent_change_does_not_change_version(hpi_frame):
    eng = quiet_engine()
    v = hpi_frame.version
    eng.recommend(hpi_frame)
    hpi_frame.set_intent(parse_intent(["Inequality"]))
    eng.recommend(hpi_frame)
    assert hpi_frame.version == v


def test_pivot_result_gets_structure_rows():
    rows = []
    for state in ["CA", "NY", "TX", "WA"]:
        for month in ["2020-01-01", "2020-02-01", "2020-03-01"]:
            rows.append((state, month, random.Random(state + month).uniform(0, 1)))
    f = frame_from_dict(
        {
            "State": [r[0] for r in rows],
            "Date": [r[1] for r in rows],
            "Cases": [r[2] for r in rows],
        }
    )
    pivoted = apply_transform(f, Pivot("State", "Date", "Cases", "sum"))
    assert pivoted.pre_aggregated
    dash = quiet_engine().recommend(pivoted)
    structure = dash.recommendation("Structure")
    assert structure is not None
    assert len(structure.vises) == 4  # one per state row
    assert all(v.spec.mark == "line" for v in structure.vises)


def test_groupby_result_column_wise_vis():
    f = frame_from_dict(
        {"dept": ["A", "A", "B", "C"], "sal": [10.0, 20.0, 30.0, 15.0]}
    )
    g = apply_transform(
        f, __import__("luxen").GroupAggregate(("dept",), (("sal", "mean"),))
    )
    dash = quiet_engine().recommend(g)
    structure = dash.recommendation("Structure")
    assert structure is not None
    vis = next(v for v in structure.vises if v.aux.get("column") == "sal")
    assert vis.data.field("index") == ["A", "B", "C"]


def test_single_quantitative_column_histogram_series():
    f = frame_from_dict({"x": [random.Random(9).gauss(0, 1) for _ in range(50)]})
    dash = quiet_engine().recommend(f)
    series = dash.recommendation("Series")
    assert series is not None
    assert series.vises[0].spec.mark == "histogram"


def test_single_nominal_column_bar_series():
    f = frame_from_dict({"c": ["a", "b", "a", "c", "a", "b"]})
    dash = quiet_engine().recommend(f)
    series = dash.recommendation("Series")
    assert series.vises[0].spec.mark == "bar"


def test_small_filtered_frame_uses_parent_history():
    f = frame_from_dict(
        {"g": ["a"] * 20 + ["b"] * 3, "v": [float(i) for i in range(23)]}
    )
    child = apply_transform(f, FilterRows("g", "=", "b"))
    assert child.row_count == 3
    dash = quiet_engine().recommend(child)
    history = dash.recommendation("History")
    assert history is not None
    assert history.note is not None
    assert len(history.vises) > 0
    # parent recommendations cover the unfiltered frame
    assert all(v.frame_version == f.version for v in history.vises)


def test_small_frame_without_filter_history_is_normal():
    f = frame_from_dict({"a": [1.0, 2.0], "b": [2.0, 1.0]})
    assert dashboard_branch(f, False) == "overview"
    dash = quiet_engine().recommend(f)
    assert dash.recommendation("History") is None


def test_large_filtered_frame_is_normal():
    f = frame_from_dict({"g": ["a"] * 1000, "v": [float(i) for i in range(1000)]})
    child = apply_transform(f, FilterRows("g", "=", "a"))
    assert dashboard_branch(child, False) == "overview"


def test_k_truncation(hpi_frame):
    dash = quiet_engine().recommend(hpi_frame, k=2)
    for rec in dash.recommendations:
        assert len(rec.vises) <= 2


def test_scores_non_increasing(hpi_frame):
    dash = quiet_engine().recommend(hpi_frame)
    for rec in dash.recommendations:
        scores = [v.score for v in rec.vises if v.score is not None]
        assert scores == sorted(scores, reverse=True)


def test_wysiwyg_frame_unchanged(hpi_frame):
    fp = hpi_frame.content_fingerprint()
    v = hpi_frame.version
    quiet_engine().recommend(hpi_frame)
    assert hpi_frame.content_fingerprint() == fp
    assert hpi_frame.version == v


def test_zip_override_moves_column_to_occurrence():
    rng = random.Random(4)
    f = frame_from_dict(
        {
            "zip": [rng.choice(range(90000, 90200)) for _ in range(300)],
            "x": [rng.gauss(0, 1) for _ in range(300)],
            "y": [rng.gauss(0, 1) for _ in range(300)],
        }
    )
    eng = quiet_engine()
    dash = eng.recommend(f)
    occ = dash.recommendation("Occurrence")
    assert occ is None  # zip inferred quantitative (high cardinality)
    set_type_override(f, "zip", "nominal")
    dash2 = eng.recommend(f)
    occ2 = dash2.recommendation("Occurrence")
    assert occ2 is not None
    assert occ2.vises[0].spec.referenced_attributes() == ("zip",)


def test_custom_action_trigger_and_duplicate():
    f = frame_from_dict({"c": ["a", "b", "a"], "v": [1.0, 2.0, 3.0]})
    reg = default_registry()

    def trigger(frame, metas, intent):
        return any(m.semantic_type == "nominal" for m in metas.values())

    def generate(frame, metas, intent):
        spec = CompiledVisSpec(
            mark="bar",
            x=ChannelSpec("c", "nominal"),
            y=ChannelSpec(None, "quantitative", "count"),
        )
        return [(spec, 0.5)]

    register_custom_action(reg, "EvenBars", trigger, generate)
    with pytest.raises(DuplicateActionError):
        register_custom_action(reg, "EvenBars", trigger, generate)

    eng = Engine(EngineConfig(prune=False, async_scheduling=False), registry=reg)
    dash = eng.recommend(f)
    assert "EvenBars" in dash.action_names
    # custom tabs come after the defaults
    assert dash.action_names[-1] == "EvenBars"


def test_custom_action_never_triggered_is_absent():
    f = frame_from_dict({"v": [1.0, 2.0], "w": [2.0, 1.0]})
    reg = default_registry()
    register_custom_action(
        reg, "Never", lambda fr, m, i: False, lambda fr, m, i: []
    )
    eng = Engine(EngineConfig(prune=False, async_scheduling=False), registry=reg)
    dash = eng.recommend(f)
    assert "Never" not in dash.action_names


def test_trigger_soundness(hpi_frame):
    eng = quiet_engine()
    dash = eng.recommend(hpi_frame)
    # every included action's trigger holds and no triggered default is missing
    from luxen.actions import ActionContext

    metas = compute_metadata(hpi_frame)
    ctx = ActionContext(
        frame=hpi_frame,
        metas=metas,
        intent=None,
        compiled_specs=[],
        base_partial=None,
        branch="overview",
        k=15,
        engine=eng,
    )
    triggered = {a.name for a in eng.registry if a.trigger(ctx)}
    assert set(dash.action_names) == triggered


def test_ranking_matches_exhaustive_oracle_small():
    """Spot check of the exhaustive oracle; the full sweep runs in acceptance."""
    import itertools

    from luxen.actions import Vis, interestingness_score, rank_key
    from luxen.compiler import compile_intent as ci

    rng = random.Random(77)
    f = frame_from_dict(
        {
            "q1": [rng.gauss(0, 1) for _ in range(80)],
            "q2": [rng.gauss(0, 1) for _ in range(80)],
            "q3": [rng.uniform(0, 5) for _ in range(80)],
        }
    )
    eng = quiet_engine()
    dash = eng.recommend(f)
    corr = dash.recommendation("Correlation")

    metas = compute_metadata(f)
    expected = []
    for a, b in itertools.combinations(sorted(metas.keys()), 2):
        specs, _ = ci(parse_intent([a, b]), metas, f.row_count)
        vis = Vis(specs[0], f.version)
        vis.score = interestingness_score(vis, f, metas, "correlation")
        expected.append(vis)
    expected.sort(key=rank_key("correlation"))
    assert [v.signature for v in corr.vises] == [v.signature for v in expected]
    assert [v.score for v in corr.vises] == [v.score for v in expected]
