"""XML interchange: canonical bytes, parsing, validation diagnostics."""

import random
from decimal import Decimal

import pytest

from agraph import aif
from agraph.api import AnnotationGraphAPI
from agraph.compare import agsets_equal
from agraph.errors import MalformedId, ParseError

from conftest import build_random_graph


def sample_session(api):
    agset_id = api.create_agset("Test")
    timeline_id = api.create_timeline(agset_id)
    ag_id = api.create_ag(agset_id, timeline_id)
    anc1 = api.create_anchor(ag_id)
    anc2 = api.create_anchor(ag_id)
    ann1 = api.create_annotation(ag_id, anc1, anc2, "Word")
    api.set_feature(ann1, "English", "cat")
    api.set_feature(ann1, "Japanese", "neko")
    return agset_id, ag_id


def test_sample_session_xml_contains_features(api):
    agset_id, ag_id = sample_session(api)
    xml = api.to_xml(agset_id)
    assert xml.startswith('<?xml version="1.0" encoding="UTF-8"?>\n')
    assert '<Feature name="English">cat</Feature>' in xml
    assert "neko" in xml
    assert xml == api.to_xml(agset_id)  # deterministic


def test_to_xml_of_single_ag_is_loadable(api):
    agset_id, ag_id = sample_session(api)
    xml = api.to_xml(ag_id)
    assert '<Timeline id="Test:Timeline1"/>' in xml
    other = AnnotationGraphAPI()
    loaded = aif.materialize(other, aif.parse_document(xml))
    assert loaded == [ag_id]
    assert agsets_equal(api.registry, "Test", other.registry, "Test")


def test_to_xml_rejects_non_container_ids(api):
    agset_id, ag_id = sample_session(api)
    with pytest.raises(MalformedId):
        api.to_xml(ag_id + ":Anchor1")


def test_empty_agset_round_trip(api):
    api.create_agset("Empty")
    xml = api.to_xml("Empty")
    assert "<AGSet id=\"Empty\"/>" in xml
    doc = aif.parse_document(xml)
    assert doc.id == "Empty" and not doc.ags
    other = AnnotationGraphAPI()
    aif.materialize(other, doc)
    assert other.to_xml("Empty") == xml


def test_fixed_point_with_everything_on_board(api):
    api.create_agset("Full")
    api.set_feature("Full", "owner", "lab")
    tl = api.create_timeline("Full")
    api.set_feature(tl, "note", "first")
    sig = api.create_signal(tl, "file:a.wav", "audio", "wav", "pcm", "16kHz", "1")
    api.set_feature(sig, "chan", "L")
    ag = api.create_ag("Full", tl)
    api.set_feature(ag, "style", "broad")
    a1, a2, a3 = (api.create_anchor(ag) for _ in range(3))
    api.set_anchor_offset(a1, "0.25")
    api.set_anchor_offset(a2, "10")
    ann = api.create_annotation(ag, a1, a2, "word")
    api.set_feature(ann, "text", "hi")
    api.create_annotation(ag, a1, a3, "open-ended")
    api.create_ag("Full")  # second, empty graph without a timeline
    first = api.to_xml("Full")
    other = AnnotationGraphAPI()
    aif.materialize(other, aif.parse_document(first))
    assert other.to_xml("Full") == first


def test_escaping_survives_round_trip(api):
    api.create_agset("Esc")
    ag = api.create_ag("Esc")
    a1, a2 = api.create_anchor(ag), api.create_anchor(ag)
    ann = api.create_annotation(ag, a1, a2, 'ty<pe>&"quoted"\ttabbed')
    api.set_feature(ann, "quote", 'a < b & c > "d"')
    api.set_feature(ann, "lines", "one\ntwo\rthree\ttab")
    api.set_feature(ann, "unicode", "神戸 café")
    xml = api.to_xml("Esc")
    other = AnnotationGraphAPI()
    aif.materialize(other, aif.parse_document(xml))
    reloaded = other.registry.resolve(ann).obj
    assert reloaded.type == 'ty<pe>&"quoted"\ttabbed'
    assert reloaded.features["quote"] == 'a < b & c > "d"'
    assert reloaded.features["lines"] == "one\ntwo\rthree\ttab"
    assert reloaded.features["unicode"] == "神戸 café"
    assert other.to_xml("Esc") == xml


def test_load_into_renamed_agset(api):
    agset_id, ag_id = sample_session(api)
    xml = api.to_xml(agset_id)
    other = AnnotationGraphAPI()
    loaded = aif.materialize(other, aif.parse_document(xml), "Copy")
    assert loaded == ["Copy:AG1"]
    assert agsets_equal(api.registry, "Test", other.registry, "Copy")


def test_randomized_fixed_point_and_graph_equality():
    rng = random.Random(4242)
    for round_no in range(25):
        api = AnnotationGraphAPI()
        api.create_agset("R")
        if rng.random() < 0.5:
            api.set_feature("R", "k", "v%d" % round_no)
        for _ in range(rng.randrange(1, 4)):
            build_random_graph(api, rng, "R", rng.randrange(2, 25), rng.randrange(0, 40),
                               unanchored=rng.randrange(0, 3))
        first = api.to_xml("R")
        other = AnnotationGraphAPI()
        aif.materialize(other, aif.parse_document(first))
        assert other.to_xml("R") == first
        assert agsets_equal(api.registry, "R", other.registry, "R")


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as err:
        aif.parse_document(b'<?xml version="1.0"?>\n<AGSet id="X">\n  <broken\n</AGSet>')
    assert err.value.line >= 1


@pytest.mark.parametrize(
    "xml",
    [
        "<Wrong/>",
        '<AGSet id="X"><Mystery/></AGSet>',
        '<AGSet id="X" extra="1"/>',
        '<AGSet id="X"><AG id="X:AG1"><Anchor offset="1"/></AG></AGSet>',
        '<AGSet id="X"><AG id="X:AG1"><Anchor id="X:AG1:Anchor1" offset="abc"/></AG></AGSet>',
        '<AGSet id="X"><Metadata><Feature name="a"/><Feature name="a"/></Metadata></AGSet>',
        '<AGSet id="X"><Metadata><Feature name="a"><b/></Feature></Metadata></AGSet>',
    ],
)
def test_parse_rejects_foreign_shapes(xml):
    with pytest.raises(ParseError):
        aif.parse_document(xml)


def _violations(xml):
    return aif.validate_document(aif.parse_document(xml))


def test_validate_clean_document(api):
    agset_id, _ = sample_session(api)
    assert _violations(api.to_xml(agset_id)) == []


def test_validate_reports_order_violation_with_id():
    xml = (
        '<AGSet id="X"><AG id="X:AG1">'
        '<Anchor id="X:AG1:Anchor1" offset="2" unit="seconds"/>'
        '<Anchor id="X:AG1:Anchor2" offset="1" unit="seconds"/>'
        '<Annotation id="X:AG1:Annotation1" type="w" start="X:AG1:Anchor1" end="X:AG1:Anchor2"/>'
        "</AG></AGSet>"
    )
    problems = _violations(xml)
    assert len(problems) == 1
    assert "X:AG1:Annotation1" in problems[0]


def test_validate_reports_dangling_anchor():
    xml = (
        '<AGSet id="X"><AG id="X:AG1">'
        '<Anchor id="X:AG1:Anchor1" offset="1" unit="seconds"/>'
        '<Annotation id="X:AG1:Annotation1" type="w" start="X:AG1:Anchor1" end="X:AG1:Anchor9"/>'
        "</AG></AGSet>"
    )
    problems = _violations(xml)
    assert any("X:AG1:Anchor9" in p and "X:AG1:Annotation1" in p for p in problems)


def test_validate_reports_cycle():
    xml = (
        '<AGSet id="X"><AG id="X:AG1">'
        '<Anchor id="X:AG1:Anchor1" unit="seconds"/>'
        '<Anchor id="X:AG1:Anchor2" unit="seconds"/>'
        '<Annotation id="X:AG1:Annotation1" type="w" start="X:AG1:Anchor1" end="X:AG1:Anchor2"/>'
        '<Annotation id="X:AG1:Annotation2" type="w" start="X:AG1:Anchor2" end="X:AG1:Anchor1"/>'
        "</AG></AGSet>"
    )
    problems = _violations(xml)
    assert any("cycle" in p for p in problems)


def test_validate_reports_ancestry_and_duplicates():
    xml = (
        '<AGSet id="X">'
        '<AG id="Y:AG1"/>'
        '<AG id="X:AG2"><Anchor id="X:AG2:Anchor1" unit="s"/>'
        '<Anchor id="X:AG2:Anchor1" unit="s"/></AG>'
        "</AGSet>"
    )
    problems = _violations(xml)
    assert any("Y:AG1" in p for p in problems)
    assert any("duplicate" in p for p in problems)


def test_materialize_rolls_back_on_semantic_failure():
    xml = (
        '<AGSet id="X"><AG id="X:AG1">'
        '<Anchor id="X:AG1:Anchor1" unit="seconds"/>'
        '<Annotation id="X:AG1:Annotation1" type="w" start="X:AG1:Anchor1" end="X:AG1:Anchor9"/>'
        "</AG></AGSet>"
    )
    api = AnnotationGraphAPI()
    with pytest.raises(Exception):
        aif.materialize(api, aif.parse_document(xml))
    assert not api.exists("X")
