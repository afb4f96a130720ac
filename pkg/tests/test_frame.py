import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from luxen import (
    CsvFormatError,
    FilterRows,
    GroupAggregate,
    HeadTail,
    InplaceModify,
    Pivot,
    Project,
    Rename,
    SetColumn,
    TransformError,
    UnknownColumnError,
    apply_transform,
    expire_on_mutation,
    frame_from_dict,
    load_csv,
)


def test_load_csv_basic():
    f = load_csv("a,b\n1,2\n3,4\n")
    assert f.version == 1
    assert f.row_count == 2
    assert [c.storage_type for c in f.columns] == ["integer", "integer"]
    assert f.history[0].kind == "load"


def test_load_csv_mixed_cells_demote_to_string():
    f = load_csv("x\n1\nfoo\n")
    assert f.column("x").storage_type == "string"


def test_load_csv_iso_dates():
    f = load_csv("d\n2020-01-01\n2020-02-01\n")
    assert f.column("d").storage_type == "datetime"


def test_load_csv_floats_and_bools():
    f = load_csv("f,b\n1.5,true\n2,false\n")
    assert f.column("f").storage_type == "float"
    assert f.column("b").storage_type == "boolean"


def test_load_csv_empty_cells_are_null():
    f = load_csv("a,b\n1,\n,2\n3,4\n")
    col = f.column("a")
    assert col.storage_type == "integer"
    assert list(col.mask) == [False, True, False]
    assert list(f.column("b").mask) == [True, False, False]


def test_load_csv_blank_lines_skipped():
    f = load_csv("a\n1\n\n3\n")
    assert f.row_count == 2


def test_load_csv_duplicate_header_rejected():
    with pytest.raises(CsvFormatError, match="dup"):
        load_csv("a,dup,dup\n1,2,3\n")


def test_load_csv_ragged_row_rejected():
    with pytest.raises(CsvFormatError, match="row 2"):
        load_csv("a,b\n1,2\n3\n")


def test_load_csv_quoting():
    f = load_csv('a,b\n"hello, world",2\n"line",3\n')
    assert f.column("a").cell(0) == "hello, world"


def test_load_csv_no_header():
    from luxen import LoadOptions

    f = load_csv("1,2\n3,4\n", LoadOptions(header=False))
    assert f.column_names == ["column_0", "column_1"]


def test_filter_transform():
    f = load_csv("a,b\n1,x\n2,y\n3,x\n")
    g = apply_transform(f, FilterRows("b", "=", "x"))
    assert g.row_count == 2
    assert g.version == f.version + 1
    assert g.parent is f
    assert [e.kind for e in g.history] == ["load", "filter"]
    # parent untouched
    assert f.row_count == 3 and f.version == 1


def test_filter_nulls_never_match():
    f = frame_from_dict({"a": [1, None, 3]})
    g = apply_transform(f, FilterRows("a", "!=", "1"))
    assert g.row_count == 1
    assert g.column("a").cell(0) == 3


def test_project_and_rename():
    f = load_csv("a,b,c\n1,2,3\n")
    g = apply_transform(f, Project(("c", "a")))
    assert g.column_names == ["c", "a"]
    h = apply_transform(g, Rename((("a", "alpha"),)))
    assert h.column_names == ["c", "alpha"]
    with pytest.raises(UnknownColumnError, match="zzz"):
        apply_transform(f, Rename((("zzz", "q"),)))


def test_set_column_replaces_and_appends():
    f = load_csv("a\n1\n2\n")
    g = apply_transform(f, SetColumn("b", (10.5, 11.5)))
    assert g.column("b").storage_type == "float"
    h = apply_transform(g, SetColumn("a", ("x", "y")))
    assert h.column("a").storage_type == "string"
    with pytest.raises(TransformError):
        apply_transform(f, SetColumn("b", (1,)))


def test_group_aggregate():
    f = load_csv("dept,sal\nA,10\nA,20\nB,30\n")
    g = apply_transform(f, GroupAggregate(("dept",), (("sal", "mean"),)))
    assert g.pre_aggregated is True
    assert g.column("dept").cell(0) == "A"
    assert g.column("sal").cell(0) == 15.0
    assert g.column("sal").cell(1) == 30.0
    assert list(g.row_labels) == ["A", "B"]
    with pytest.raises(TransformError):
        apply_transform(f, GroupAggregate((), (("sal", "mean"),)))


def test_pivot():
    f = load_csv(
        "state,date,cases\nCA,2020-01,5\nCA,2020-02,7\nNY,2020-01,3\nNY,2020-02,4\n"
    )
    g = apply_transform(f, Pivot("state", "date", "cases", "sum"))
    assert g.pre_aggregated is True
    assert g.column_names == ["2020-01", "2020-02"]
    assert list(g.row_labels) == ["CA", "NY"]
    assert g.column("2020-01").cell(0) == 5


def test_pivot_duplicate_without_aggregation_rejected():
    f = load_csv("s,d,v\nCA,x,1\nCA,x,2\n")
    with pytest.raises(TransformError, match="duplicate"):
        apply_transform(f, Pivot("s", "d", "v", None))


def test_head_tail():
    f = load_csv("a\n1\n2\n3\n4\n5\n")
    g = apply_transform(f, HeadTail(3))
    assert [g.column("a").cell(i) for i in range(3)] == [1, 2, 3]
    t = apply_transform(f, HeadTail(2, tail=True))
    assert [t.column("a").cell(i) for i in range(2)] == [4, 5]
    assert list(t.row_labels) == [3, 4]


def test_history_propagation_is_prefix():
    f = load_csv("a,b\n1,x\n2,y\n3,x\n")
    g = apply_transform(f, FilterRows("b", "=", "x"))
    h = apply_transform(g, HeadTail(1))
    assert [e.kind for e in h.history[: len(g.history)]] == [e.kind for e in g.history]
    seqs = [e.seq for e in h.history]
    assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)


def test_intent_carries_over_to_derived_frames():
    from luxen import parse_intent

    f = load_csv("a,b\n1,x\n2,y\n")
    f.set_intent(parse_intent(["a"]))
    g = apply_transform(f, FilterRows("b", "=", "x"))
    assert g.intent is f.intent


def test_expire_on_mutation_triggers():
    f = load_csv("a\n1\n2\n")
    f.metadata_cache = ({}, f.version)
    f.rec_cache = (object(), f.version, f.intent_version)
    f.sample_cache = None

    expire_on_mutation(f, "intent-change")
    assert f.metadata_cache_valid()
    assert not f.rec_cache_valid()

    f.rec_cache = (object(), f.version, f.intent_version)
    expire_on_mutation(f, "column-update")
    assert not f.metadata_cache_valid()
    assert not f.rec_cache_valid()

    with pytest.raises(ValueError):
        expire_on_mutation(f, "nonsense")


def test_unknown_filter_column_named_in_error():
    f = load_csv("a\n1\n")
    with pytest.raises(UnknownColumnError, match="missing_col"):
        apply_transform(f, FilterRows("missing_col", "=", "1"))


def test_inplace_modify_marks_history_and_bumps_version():
    f = load_csv("a\n1\n")
    g = apply_transform(f, InplaceModify("dropna"))
    assert g.version == 2
    assert g.history[-1].kind == "inplace-modify"
    assert g.metadata_cache is None and g.rec_cache is None


_TRANSFORMS = st.sampled_from(
    [
        FilterRows("a", ">", "1"),
        Project(("a",)),
        Rename((("a", "a"),)),
        HeadTail(2),
        InplaceModify(),
    ]
)


@settings(max_examples=40, deadline=None)
@given(st.lists(_TRANSFORMS, min_size=1, max_size=8))
def test_version_strictly_increases(ops):
    f = load_csv("a,b\n1,2\n3,4\n5,6\n")
    versions = [f.version]
    for op in ops:
        f = apply_transform(f, op)
        versions.append(f.version)
    assert all(b > a for a, b in zip(versions, versions[1:]))


def test_frame_from_dict_none_handling():
    f = frame_from_dict({"a": [1, None, 3], "s": ["x", "y", None]})
    assert f.column("a").storage_type == "integer"
    assert list(f.column("a").mask) == [False, True, False]
    assert f.column("s").cell(2) is None


def test_content_fingerprint_stable_and_sensitive():
    f = frame_from_dict({"a": [1, 2, 3]})
    fp1 = f.content_fingerprint()
    assert f.content_fingerprint() == fp1
    g = apply_transform(f, HeadTail(2))
    assert g.content_fingerprint() != fp1


def test_transform_from_dict_all_kinds():
    from luxen import transform_from_dict

    cases = [
        ({"kind": "filter", "column": "a", "op": ">", "value": "1"}, FilterRows),
        ({"kind": "project", "columns": ["a", "b"]}, Project),
        ({"kind": "rename", "mapping": {"a": "alpha"}}, Rename),
        ({"kind": "set-column", "name": "c", "values": [1, 2]}, SetColumn),
        (
            {"kind": "group-aggregate", "keys": ["g"], "aggregations": [["v", "mean"]]},
            GroupAggregate,
        ),
        (
            {"kind": "pivot", "index": "s", "columns": "d", "values": "v", "aggregation": "sum"},
            Pivot,
        ),
        ({"kind": "head-tail", "n": 5, "tail": True}, HeadTail),
        ({"kind": "inplace-modify"}, InplaceModify),
    ]
    for desc, cls in cases:
        assert isinstance(transform_from_dict(desc), cls)
    with pytest.raises(TransformError, match="unknown transform"):
        transform_from_dict({"kind": "explode"})
    with pytest.raises(TransformError, match="missing field"):
        transform_from_dict({"kind": "filter", "column": "a"})
