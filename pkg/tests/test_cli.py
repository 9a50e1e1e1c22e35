"""Command-line surface: exit codes, output contracts, replay."""

from decimal import Decimal

import pytest

from agraph import aif, codecs, events
from agraph.api import AnnotationGraphAPI
from agraph.cli import main
from agraph.events import EventMessage

TIMIT_WRD = "0 6160 she\n6160 9360 had\n9360 12640 your\n12640 17720 dark\n17720 22560 suit\n"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def wrd_file(tmp_path):
    path = tmp_path / "sample.wrd"
    path.write_text(TIMIT_WRD)
    return str(path)


@pytest.fixture
def sample_aif(tmp_path):
    api = AnnotationGraphAPI()
    agset_id = api.create_agset("Test")
    timeline_id = api.create_timeline(agset_id)
    ag_id = api.create_ag(agset_id, timeline_id)
    anc1, anc2 = api.create_anchor(ag_id), api.create_anchor(ag_id)
    api.set_anchor_offset(anc1, "1.0")
    api.set_anchor_offset(anc2, "2.0")
    ann = api.create_annotation(ag_id, anc1, anc2, "Word")
    api.set_feature(ann, "English", "cat")
    api.set_feature(ann, "Japanese", "neko")
    path = tmp_path / "test.aif"
    path.write_text(api.to_xml(agset_id))
    return str(path)


# --- convert -------------------------------------------------------------


def test_convert_timit_to_aif(capsys, tmp_path, wrd_file):
    out_path = str(tmp_path / "out.aif")
    code, out, err = run(
        capsys, "convert", "--from", "timit", "--to", "aif", "--input", wrd_file,
        "--output", out_path, "--agset", "Timit",
    )
    assert code == 0
    assert out.splitlines() == ["Timit:AG1"]
    with open(out_path, "rb") as handle:
        doc = aif.parse_document(handle.read())
    assert sum(len(ag.annotations) for ag in doc.ags) == len(TIMIT_WRD.splitlines())
    assert aif.validate_document(doc) == []


def test_convert_to_input_only_format_fails_semantically(capsys, tmp_path, wrd_file):
    code, out, err = run(
        capsys, "convert", "--from", "timit", "--to", "timit", "--input", wrd_file,
        "--output", str(tmp_path / "x"),
    )
    assert code == 3


def test_convert_missing_input_is_usage_error(capsys, tmp_path):
    code, out, err = run(
        capsys, "convert", "--from", "timit", "--to", "aif",
        "--input", str(tmp_path / "absent.wrd"), "--output", str(tmp_path / "x"),
    )
    assert code == 1
    assert "usage" in err


def test_convert_honors_samplerate_env(capsys, tmp_path, wrd_file, monkeypatch):
    monkeypatch.setenv("AGTK_SAMPLERATE", "8000")
    out_path = str(tmp_path / "out.aif")
    code, out, err = run(
        capsys, "convert", "--from", "timit", "--to", "aif", "--input", wrd_file,
        "--output", out_path,
    )
    assert code == 0
    with open(out_path, "rb") as handle:
        doc = aif.parse_document(handle.read())
    top = max(anchor.offset for ag in doc.ags for anchor in ag.anchors)
    assert top == Decimal("2.82")  # 22560 samples at 8 kHz
    # explicit flag beats the environment
    monkeypatch.setenv("AGTK_SAMPLERATE", "1000")
    code, out, err = run(
        capsys, "convert", "--from", "timit", "--to", "aif", "--input", wrd_file,
        "--output", out_path, "--samplerate", "16000",
    )
    with open(out_path, "rb") as handle:
        doc = aif.parse_document(handle.read())
    assert max(a.offset for ag in doc.ags for a in ag.anchors) == Decimal("1.41")


def test_convert_bad_xml_is_parse_error(capsys, tmp_path):
    bad = tmp_path / "broken.aif"
    bad.write_text("<AGSet id='X'")
    code, out, err = run(
        capsys, "convert", "--from", "aif", "--to", "tf", "--input", str(bad),
        "--output", str(tmp_path / "o"),
    )
    assert code == 2


def test_unknown_flag_is_usage_error(capsys, wrd_file):
    code, out, err = run(capsys, "formats", "--bogus")
    assert code == 1


# --- query ------------------------------------------------------------------


def library_result(sample_aif, op, **kw):
    api = AnnotationGraphAPI()
    with open(sample_aif, "rb") as src:
        (ag_id,) = codecs.load(api, "AIF", src)
    return getattr(api, op)(ag_id, **kw)


def test_query_overlap_matches_library(capsys, sample_aif):
    code, out, err = run(capsys, "query", "overlap", "--aif", sample_aif, "--offset", "1.5")
    assert code == 0
    expected = library_result(sample_aif, "get_annotation_set_by_offset", offset="1.5")
    assert out == "".join(x + "\n" for x in expected)


def test_query_anchors_near_matches_library(capsys, sample_aif):
    code, out, err = run(capsys, "query", "anchors-near", "--aif", sample_aif, "--offset", "1.5")
    assert code == 0
    expected = library_result(sample_aif, "get_anchor_set_nearest_offset", offset="1.5")
    assert len(expected) == 2
    assert out == "".join(x + "\n" for x in expected)


def test_query_seq_matches_library_and_validates_bounds(capsys, sample_aif):
    code, out, err = run(capsys, "query", "seq", "--aif", sample_aif)
    expected = library_result(sample_aif, "get_annotation_seq_by_offset")
    assert (code, out) == (0, "".join(x + "\n" for x in expected))
    code, out, err = run(
        capsys, "query", "seq", "--aif", sample_aif, "--begin", "0.2", "--end", "0.1"
    )
    assert code == 3


def test_query_requires_offset_for_overlap(capsys, sample_aif):
    code, out, err = run(capsys, "query", "overlap", "--aif", sample_aif)
    assert code == 1


# --- validate ------------------------------------------------------------------


def test_validate_accepts_canonical_output(capsys, sample_aif):
    code, out, err = run(capsys, "validate", "--aif", sample_aif)
    assert code == 0 and out == ""


CORRUPT_ORDER = (
    '<AGSet id="X"><AG id="X:AG1">'
    '<Anchor id="X:AG1:Anchor1" offset="2" unit="seconds"/>'
    '<Anchor id="X:AG1:Anchor2" offset="1" unit="seconds"/>'
    '<Annotation id="X:AG1:Annotation1" type="w" start="X:AG1:Anchor1" end="X:AG1:Anchor2"/>'
    "</AG></AGSet>"
)
CORRUPT_DANGLING = (
    '<AGSet id="X"><AG id="X:AG1">'
    '<Anchor id="X:AG1:Anchor1" offset="1" unit="seconds"/>'
    '<Annotation id="X:AG1:Annotation1" type="w" start="X:AG1:Anchor1" end="X:AG1:Anchor9"/>'
    "</AG></AGSet>"
)
CORRUPT_CYCLE = (
    '<AGSet id="X"><AG id="X:AG1">'
    '<Anchor id="X:AG1:Anchor1" unit="seconds"/>'
    '<Anchor id="X:AG1:Anchor2" unit="seconds"/>'
    '<Annotation id="X:AG1:Annotation1" type="w" start="X:AG1:Anchor1" end="X:AG1:Anchor2"/>'
    '<Annotation id="X:AG1:Annotation2" type="w" start="X:AG1:Anchor2" end="X:AG1:Anchor1"/>'
    "</AG></AGSet>"
)


@pytest.mark.parametrize(
    "xml,needle",
    [
        (CORRUPT_ORDER, "X:AG1:Annotation1"),
        (CORRUPT_DANGLING, "X:AG1:Anchor9"),
        (CORRUPT_CYCLE, "cycle"),
    ],
)
def test_validate_names_the_offender(capsys, tmp_path, xml, needle):
    path = tmp_path / "corrupt.aif"
    path.write_text(xml)
    code, out, err = run(capsys, "validate", "--aif", str(path))
    assert code == 3
    assert needle in out


# --- info / formats ---------------------------------------------------------------


def test_info_counts_sample_fixture(capsys, sample_aif):
    code, out, err = run(capsys, "info", "--aif", sample_aif)
    assert code == 0
    assert out == "ags 1\nanchors 2\nannotations 1\nfeatures 2\n"


def test_formats_lists_capabilities(capsys):
    code, out, err = run(capsys, "formats")
    assert code == 0
    assert "TreeBank input/output" in out.splitlines()
    assert "TIMIT input" in out.splitlines()
    assert out == "".join(
        "%s %s\n" % pair for pair in codecs.list_formats()
    )


# --- events-replay ------------------------------------------------------------------


def test_events_replay_is_deterministic(capsys, tmp_path):
    api = AnnotationGraphAPI()
    hub, editor = events.standard_session(api, clock=events.counting_clock())
    hub.register_component("table", lambda e: None, {"SetCurrentAnnotation", "Error"})
    hub.dispatch(EventMessage("CreateAnnotation", {"start": "0.5", "end": "1.5"}, source="table"))
    hub.dispatch(EventMessage("SetFeature", {"feature": "text", "value": "dog"}, source="table"))
    hub.dispatch(EventMessage("CreateAnnotation", {"start": "2", "end": "3"}, source="table"))
    log_path = tmp_path / "session.log"
    with open(log_path, "wb") as sink:
        hub.save_log(sink)

    out_a = tmp_path / "a.aif"
    out_b = tmp_path / "b.aif"
    for out_path in (out_a, out_b):
        code, out, err = run(
            capsys, "events-replay", "--log", str(log_path), "--out", str(out_path)
        )
        assert code == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    assert b"dog" in out_a.read_bytes()


def test_events_replay_bad_log_is_parse_error(capsys, tmp_path):
    log_path = tmp_path / "bad.log"
    log_path.write_text("2\t0\ta\thub\tStop\n1\t0\ta\thub\tStop\n")
    code, out, err = run(
        capsys, "events-replay", "--log", str(log_path), "--out", str(tmp_path / "x.aif")
    )
    assert code == 2
