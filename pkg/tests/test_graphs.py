import json

import pytest

from qglab.errors import (
    DanglingEndpoint,
    DisconnectedGraph,
    DuplicateId,
    GraphValidationError,
    NonPositiveLength,
    SelfLoopEdge,
)
from qglab.graphs import (
    GraphClass,
    build_graph,
    free_version,
    graph_to_json,
    load_graph,
    save_graph,
    scale_graph,
)
from qglab.potentials import Constant, Expression


def doc_interval(length=1.0):
    return {
        "vertices": [{"id": "a", "sigma": 0.5}, {"id": "b", "sigma": -0.25}],
        "edges": [{"id": "e", "from": "a", "to": "b", "length": length,
                   "potential": {"kind": "constant", "value": 2.0}}],
    }


def test_build_and_accessors():
    g = build_graph(doc_interval())
    assert g.total_length() == 1.0
    assert g.degree("a") == 1 and g.degree("b") == 1
    assert g.min_degree() == 1
    assert g.vertex("a").sigma == 0.5
    assert [e.id for e in g.edges] == ["e"]


def test_duplicate_vertex_id():
    doc = doc_interval()
    doc["vertices"].append({"id": "a"})
    with pytest.raises(DuplicateId):
        build_graph(doc)


def test_duplicate_edge_id():
    doc = doc_interval()
    doc["edges"].append({"id": "e", "from": "a", "to": "b", "length": 1.0})
    with pytest.raises(DuplicateId):
        build_graph(doc)


def test_dangling_endpoint():
    doc = doc_interval()
    doc["edges"][0]["to"] = "nowhere"
    with pytest.raises(DanglingEndpoint):
        build_graph(doc)


def test_self_loop_rejected():
    doc = doc_interval()
    doc["edges"][0]["to"] = "a"
    with pytest.raises(SelfLoopEdge):
        build_graph(doc)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_non_positive_length(bad):
    with pytest.raises(NonPositiveLength):
        build_graph(doc_interval(length=bad))


def test_disconnected():
    doc = {
        "vertices": [{"id": c} for c in "abcd"],
        "edges": [
            {"id": "e1", "from": "a", "to": "b", "length": 1.0},
            {"id": "e2", "from": "c", "to": "d", "length": 1.0},
        ],
    }
    with pytest.raises(DisconnectedGraph):
        build_graph(doc)


def test_classify_line_loop_general(star_graph):
    assert build_graph(doc_interval()).classify() is GraphClass.LINE
    loop = {
        "vertices": [{"id": "u"}, {"id": "v"}],
        "edges": [
            {"id": "top", "from": "u", "to": "v", "length": 1.0},
            {"id": "bot", "from": "v", "to": "u", "length": 2.0},
        ],
    }
    assert build_graph(loop).classify() is GraphClass.LOOP
    assert star_graph.classify() is GraphClass.GENERAL


def test_total_length_sums_all_edges(star_graph):
    assert star_graph.total_length() == pytest.approx(3.0)


def test_json_round_trip(tmp_path):
    g = build_graph({
        "vertices": [{"id": "a", "sigma": 1.5}, {"id": "b"}],
        "edges": [{"id": "e", "from": "a", "to": "b", "length": 0.75,
                   "potential": {"kind": "expr", "expr": "sin(2*x)+1"}}],
    })
    path = tmp_path / "g.json"
    save_graph(g, str(path))
    g2 = load_graph(str(path))
    assert graph_to_json(g) == graph_to_json(g2)
    assert isinstance(g2.edges[0].potential, Expression)


def test_load_rejects_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(GraphValidationError):
        load_graph(str(path))


def test_scale_graph_scales_strengths_and_potentials():
    g = build_graph(doc_interval())
    s = scale_graph(g, -2.0)
    assert s.vertex("a").sigma == -1.0
    assert s.vertex("b").sigma == 0.5
    pot = s.edges[0].potential
    assert isinstance(pot, Constant) and pot.value == -4.0
    # geometry untouched
    assert s.total_length() == g.total_length()


def test_free_version_zeroes_everything():
    g = build_graph(doc_interval())
    f = free_version(g)
    assert all(v.sigma == 0.0 for v in f.vertices)
    pot = f.edges[0].potential
    assert isinstance(pot, Constant) and pot.value == 0.0


def test_incidence_lists_both_orientations():
    g = build_graph(doc_interval())
    inc_a = g.incidence("a")
    inc_b = g.incidence("b")
    assert len(inc_a) == 1 and len(inc_b) == 1
    edge_index, end_a = inc_a[0]
    assert g.edges[edge_index].id == "e"
    assert end_a != inc_b[0][1]
