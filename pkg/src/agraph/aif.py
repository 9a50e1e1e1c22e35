"""Canonical XML interchange for AGSets and annotation graphs.

The element set is fixed: AGSet > (Metadata, Timeline > Signal, AG >
(Anchor, Annotation > Feature)), with Metadata holding Feature elements
on every container.  Serialization is canonical so that equal graph
states always produce identical bytes:

* timelines, signals and graphs appear in creation order,
* anchors are sorted by (offset, id) with unanchored anchors last,
* annotations are sorted by (start offset, end offset, id),
* features are sorted by name,
* attributes appear in a fixed order and empty optional attributes are
  omitted.

Parsing is strict about the element set but tolerant of element order;
everything structural beyond well-formedness is reported by
:func:`validate_document` as one diagnostic line per violation, which is
what the ``validate`` CLI command prints.
"""

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from decimal import Decimal

from . import offsets
from .errors import MalformedId, ParseError
from .ids import is_well_formed, parse_identifier

XML_DECL = '<?xml version="1.0" encoding="UTF-8"?>'


# ---------------------------------------------------------------------------
# document model
# ---------------------------------------------------------------------------


@dataclass
class DocSignal:
    id: str
    uri: str = ""
    mime_class: str = ""
    mime_type: str = ""
    encoding: str = ""
    unit: str = ""
    track: str = ""
    metadata: dict = field(default_factory=dict)


@dataclass
class DocTimeline:
    id: str
    signals: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


@dataclass
class DocAnchor:
    id: str
    offset: Decimal | None = None
    unit: str = "seconds"


@dataclass
class DocAnnotation:
    id: str
    type: str = ""
    start: str = ""
    end: str = ""
    features: dict = field(default_factory=dict)


@dataclass
class DocAG:
    id: str
    timeline: str | None = None
    anchors: list = field(default_factory=list)
    annotations: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


@dataclass
class DocAGSet:
    id: str
    timelines: list = field(default_factory=list)
    ags: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _esc_attr(value):
    value = (
        value.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )
    # Literal whitespace would be normalized away by XML attribute-value
    # normalization; character references survive.
    return value.replace("\t", "&#9;").replace("\n", "&#10;").replace("\r", "&#13;")


def _esc_text(value):
    value = value.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    return value.replace("\r", "&#13;")


def _attrs(pairs):
    return "".join(' %s="%s"' % (name, _esc_attr(value)) for name, value in pairs)


def _feature_lines(out, fmap, depth):
    pad = "  " * depth
    for name in sorted(fmap):
        value = fmap[name]
        if value:
            out.append("%s<Feature name=%s>%s</Feature>" % (pad, _quoted(name), _esc_text(value)))
        else:
            out.append("%s<Feature name=%s/>" % (pad, _quoted(name)))


def _quoted(value):
    return '"%s"' % _esc_attr(value)


def _metadata_lines(out, fmap, depth):
    if not fmap:
        return
    pad = "  " * depth
    out.append("%s<Metadata>" % pad)
    _feature_lines(out, fmap, depth + 1)
    out.append("%s</Metadata>" % pad)


def _signal_lines(out, signal, depth):
    pad = "  " * depth
    pairs = [("id", signal.id), ("uri", signal.uri)]
    for name, value in (
        ("mimeClass", signal.mime_class),
        ("mimeType", signal.mime_type),
        ("encoding", signal.encoding),
        ("unit", signal.unit),
        ("track", signal.track),
    ):
        if value:
            pairs.append((name, value))
    if signal.metadata:
        out.append("%s<Signal%s>" % (pad, _attrs(pairs)))
        _metadata_lines(out, signal.metadata, depth + 1)
        out.append("%s</Signal>" % pad)
    else:
        out.append("%s<Signal%s/>" % (pad, _attrs(pairs)))


def _timeline_lines(out, timeline, depth):
    pad = "  " * depth
    if not timeline.metadata and not timeline.signals:
        out.append("%s<Timeline%s/>" % (pad, _attrs([("id", timeline.id)])))
        return
    out.append("%s<Timeline%s>" % (pad, _attrs([("id", timeline.id)])))
    _metadata_lines(out, timeline.metadata, depth + 1)
    for signal in timeline.signals.values():
        _signal_lines(out, signal, depth + 1)
    out.append("%s</Timeline>" % pad)


def _anchor_sort_key(anchor):
    key = (0, anchor.offset) if anchor.offset is not None else (1,)
    return (key, anchor.id)


def _annotation_sort_key(ag, ann):
    start = ag.anchors[ann.start].offset
    end = ag.anchors[ann.end].offset
    return (
        (0, start) if start is not None else (1,),
        (0, end) if end is not None else (1,),
        ann.id,
    )


def _ag_lines(out, ag, depth):
    pad = "  " * depth
    pairs = [("id", ag.id)]
    if ag.timeline_id is not None:
        pairs.append(("timeline", ag.timeline_id))
    if not ag.metadata and not ag.anchors and not ag.annotations:
        out.append("%s<AG%s/>" % (pad, _attrs(pairs)))
        return
    out.append("%s<AG%s>" % (pad, _attrs(pairs)))
    _metadata_lines(out, ag.metadata, depth + 1)
    inner = "  " * (depth + 1)
    for anchor in sorted(ag.anchors.values(), key=_anchor_sort_key):
        pairs = [("id", anchor.id)]
        if anchor.offset is not None:
            pairs.append(("offset", offsets.fmt(anchor.offset)))
        pairs.append(("unit", anchor.unit))
        out.append("%s<Anchor%s/>" % (inner, _attrs(pairs)))
    for ann in sorted(ag.annotations.values(), key=lambda a: _annotation_sort_key(ag, a)):
        pairs = [("id", ann.id), ("type", ann.type), ("start", ann.start), ("end", ann.end)]
        if ann.features:
            out.append("%s<Annotation%s>" % (inner, _attrs(pairs)))
            _feature_lines(out, ann.features, depth + 2)
            out.append("%s</Annotation>" % inner)
        else:
            out.append("%s<Annotation%s/>" % (inner, _attrs(pairs)))
    out.append("%s</AG>" % pad)


def _agset_lines(agset, timelines, ags):
    out = [XML_DECL]
    pairs = [("id", agset.id)]
    if not agset.metadata and not timelines and not ags:
        out.append("<AGSet%s/>" % _attrs(pairs))
        return out
    out.append("<AGSet%s>" % _attrs(pairs))
    _metadata_lines(out, agset.metadata, 1)
    for timeline in timelines:
        _timeline_lines(out, timeline, 1)
    for ag in ags:
        _ag_lines(out, ag, 1)
    out.append("</AGSet>")
    return out


def serialize_agset(registry, agset_id):
    """Canonical XML text for a whole AGSet."""
    agset = registry.agsets[agset_id]
    lines = _agset_lines(agset, list(agset.timelines.values()), list(agset.ags.values()))
    return "\n".join(lines) + "\n"


def serialize_ag(registry, ag_id):
    """Canonical XML text for one AG, wrapped in a minimal loadable AGSet.

    The wrapper carries the parent AGSet id and the timeline the graph
    references (if any) so the output stands on its own.
    """
    parsed = parse_identifier(ag_id)
    agset = registry.agsets[parsed.segments[0]]
    ag = agset.ags[ag_id]
    shell = DocAGSet(id=agset.id)
    timelines = []
    if ag.timeline_id is not None:
        timelines.append(agset.timelines[ag.timeline_id])
    lines = _agset_lines(shell, timelines, [ag])
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_KNOWN_ATTRS = {
    "AGSet": {"id"},
    "Metadata": set(),
    "Timeline": {"id"},
    "Signal": {"id", "uri", "mimeClass", "mimeType", "encoding", "unit", "track"},
    "AG": {"id", "timeline"},
    "Anchor": {"id", "offset", "unit"},
    "Annotation": {"id", "type", "start", "end"},
    "Feature": {"name"},
}


def _check_element(elem, expected_children):
    if elem.tag not in _KNOWN_ATTRS:
        raise ParseError("unexpected element <%s>" % elem.tag)
    unknown = set(elem.attrib) - _KNOWN_ATTRS[elem.tag]
    if unknown:
        raise ParseError("unexpected attribute %r on <%s>" % (sorted(unknown)[0], elem.tag))
    for child in elem:
        if child.tag not in expected_children:
            raise ParseError("unexpected element <%s> inside <%s>" % (child.tag, elem.tag))


def _require(elem, attr):
    if attr not in elem.attrib:
        raise ParseError("<%s> is missing required attribute %r" % (elem.tag, attr))
    return elem.attrib[attr]


def _parse_features(elem, where):
    fmap = {}
    for feat in elem:
        if feat.tag != "Feature":
            raise ParseError("unexpected element <%s> in %s" % (feat.tag, where))
        _check_element(feat, set())
        if len(feat):
            raise ParseError("<Feature> may not contain child elements")
        name = _require(feat, "name")
        if name in fmap:
            raise ParseError("duplicate feature name %r in %s" % (name, where))
        fmap[name] = feat.text or ""
    return fmap


def _parse_metadata_child(elem, owner, where):
    if owner:
        raise ParseError("more than one <Metadata> in %s" % where)
    if elem.attrib:
        raise ParseError("unexpected attribute on <Metadata> in %s" % where)
    return _parse_features(elem, where)


def parse_document(data):
    """Parse XML bytes/text into the document model.

    Raises ParseError for malformed XML or for anything outside the
    interchange element set.  Semantic problems (dangling references,
    ordering, cycles) are left to :func:`validate_document`.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, column = getattr(exc, "position", (0, 0)) or (0, 0)
        raise ParseError("not well-formed XML: %s" % exc.msg, line, column) from None
    if root.tag != "AGSet":
        raise ParseError("root element must be <AGSet>, got <%s>" % root.tag)
    _check_element(root, {"Metadata", "Timeline", "AG"})
    doc = DocAGSet(id=_require(root, "id"))
    for child in root:
        if child.tag == "Metadata":
            doc.metadata = _parse_metadata_child(child, doc.metadata, "<AGSet>")
        elif child.tag == "Timeline":
            doc.timelines.append(_parse_timeline(child))
        else:
            doc.ags.append(_parse_ag(child))
    return doc


def _parse_timeline(elem):
    _check_element(elem, {"Metadata", "Signal"})
    timeline = DocTimeline(id=_require(elem, "id"))
    for child in elem:
        if child.tag == "Metadata":
            timeline.metadata = _parse_metadata_child(child, timeline.metadata, "<Timeline>")
        else:
            _check_element(child, {"Metadata"})
            signal = DocSignal(
                id=_require(child, "id"),
                uri=_require(child, "uri"),
                mime_class=child.get("mimeClass", ""),
                mime_type=child.get("mimeType", ""),
                encoding=child.get("encoding", ""),
                unit=child.get("unit", ""),
                track=child.get("track", ""),
            )
            for grand in child:
                signal.metadata = _parse_metadata_child(grand, signal.metadata, "<Signal>")
            timeline.signals.append(signal)
    return timeline


def _parse_ag(elem):
    _check_element(elem, {"Metadata", "Anchor", "Annotation"})
    ag = DocAG(id=_require(elem, "id"), timeline=elem.get("timeline"))
    for child in elem:
        if child.tag == "Metadata":
            ag.metadata = _parse_metadata_child(child, ag.metadata, "<AG>")
        elif child.tag == "Anchor":
            _check_element(child, set())
            offset_text = child.get("offset")
            offset = None
            if offset_text is not None:
                try:
                    offset = Decimal(offset_text)
                except ArithmeticError:
                    raise ParseError(
                        "anchor %r has unparseable offset %r" % (child.get("id"), offset_text)
                    ) from None
                if not offset.is_finite():
                    raise ParseError(
                        "anchor %r has non-finite offset %r" % (child.get("id"), offset_text)
                    )
                offset = offsets.quantize(offset)
            ag.anchors.append(
                DocAnchor(id=_require(child, "id"), offset=offset, unit=child.get("unit", "seconds"))
            )
        else:
            _check_element(child, {"Feature"})
            ann = DocAnnotation(
                id=_require(child, "id"),
                type=_require(child, "type"),
                start=_require(child, "start"),
                end=_require(child, "end"),
            )
            ann.features = _parse_features(child, "<Annotation %r>" % ann.id)
            ag.annotations.append(ann)
    return ag


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def _check_id(problems, text, depth, parent, what):
    if not is_well_formed(text):
        problems.append("%s %r: malformed identifier" % (what, text))
        return False
    parsed = parse_identifier(text)
    if parsed.depth != depth:
        problems.append("%s %r: expected %d identifier segments" % (what, text, depth))
        return False
    if parent is not None and parsed.parent != parent:
        problems.append("%s %r: identifier not under parent %r" % (what, text, parent))
        return False
    return True


def validate_document(doc):
    """Structural invariant suite; returns one diagnostic line per violation."""
    problems = []
    ok_root = _check_id(problems, doc.id, 1, None, "AGSet")
    seen_children = set()
    timeline_ids = set()
    for timeline in doc.timelines:
        if _check_id(problems, timeline.id, 2, doc.id if ok_root else None, "Timeline"):
            if timeline.id in seen_children:
                problems.append("Timeline %r: duplicate identifier" % timeline.id)
            seen_children.add(timeline.id)
            timeline_ids.add(timeline.id)
        seen_signals = set()
        for signal in timeline.signals:
            if _check_id(problems, signal.id, 3, timeline.id, "Signal"):
                if signal.id in seen_signals:
                    problems.append("Signal %r: duplicate identifier" % signal.id)
                seen_signals.add(signal.id)
            if not signal.uri:
                problems.append("Signal %r: empty uri" % signal.id)
    for ag in doc.ags:
        ok_ag = _check_id(problems, ag.id, 2, doc.id if ok_root else None, "AG")
        if ok_ag:
            if ag.id in seen_children:
                problems.append("AG %r: duplicate identifier" % ag.id)
            seen_children.add(ag.id)
        if ag.timeline is not None and ag.timeline not in timeline_ids:
            problems.append("AG %r: timeline %r does not exist" % (ag.id, ag.timeline))
        anchors = {}
        local_ids = set()
        for anchor in ag.anchors:
            if _check_id(problems, anchor.id, 3, ag.id if ok_ag else None, "Anchor"):
                if anchor.id in local_ids:
                    problems.append("Anchor %r: duplicate identifier" % anchor.id)
                local_ids.add(anchor.id)
            anchors[anchor.id] = anchor
            if anchor.offset is not None and anchor.offset < 0:
                problems.append("Anchor %r: negative offset %s" % (anchor.id, anchor.offset))
        edges = []
        for ann in ag.annotations:
            if _check_id(problems, ann.id, 3, ag.id if ok_ag else None, "Annotation"):
                if ann.id in local_ids:
                    problems.append("Annotation %r: duplicate identifier" % ann.id)
                local_ids.add(ann.id)
            if not ann.type:
                problems.append("Annotation %r: empty type" % ann.id)
            dangling = False
            for label, ref in (("start", ann.start), ("end", ann.end)):
                if ref not in anchors:
                    problems.append(
                        "Annotation %r: %s anchor %r does not exist" % (ann.id, label, ref)
                    )
                    dangling = True
            if dangling:
                continue
            s_off = anchors[ann.start].offset
            e_off = anchors[ann.end].offset
            if s_off is not None and e_off is not None and s_off > e_off:
                problems.append(
                    "Annotation %r: end offset %s precedes start offset %s"
                    % (ann.id, e_off, s_off)
                )
            if ann.start == ann.end:
                problems.append("Annotation %r: start and end are the same anchor" % ann.id)
            edges.append((ann.start, ann.end))
        cycle_members = _cycle_members(anchors, edges)
        if cycle_members:
            problems.append(
                "AG %r: cycle among anchors %s" % (ag.id, " ".join(sorted(cycle_members)))
            )
        for name in sorted(ag.metadata):
            if not name:
                problems.append("AG %r: empty feature name in metadata" % ag.id)
    return problems


def _cycle_members(anchors, edges):
    """Anchor ids left on a cycle after repeatedly peeling indegree-0 nodes."""
    indegree = {a: 0 for a in anchors}
    outgoing = {a: [] for a in anchors}
    for start, end in edges:
        indegree[end] += 1
        outgoing[start].append(end)
    ready = [a for a, d in indegree.items() if d == 0]
    remaining = len(indegree)
    while ready:
        node = ready.pop()
        remaining -= 1
        for nxt in outgoing[node]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                ready.append(nxt)
    if remaining == 0:
        return []
    return [a for a, d in indegree.items() if d > 0]


# ---------------------------------------------------------------------------
# materialization
# ---------------------------------------------------------------------------


def _remap(text, old_prefix, new_prefix):
    if old_prefix == new_prefix:
        return text
    if text == old_prefix:
        return new_prefix
    if text.startswith(old_prefix + ":"):
        return new_prefix + text[len(old_prefix):]
    return text


def materialize(api, doc, target_agset_id=None):
    """Build the document's content through the public API.

    With ``target_agset_id`` the content is loaded under that AGSet id,
    rewriting identifier prefixes; otherwise the document's own AGSet id
    is used (created when missing).  On failure every object created by
    this call is deleted again before the error propagates.
    """
    agset_id = target_agset_id if target_agset_id is not None else doc.id
    created_agset = not api.exists(agset_id)
    created = []  # ids to roll back, in creation order
    try:
        if created_agset:
            api.create_agset(agset_id)
        for name, value in sorted(doc.metadata.items()):
            api.set_feature(agset_id, name, value)
        timeline_map = {}
        for timeline in doc.timelines:
            requested = _remap(timeline.id, doc.id, agset_id)
            actual = api.create_timeline(requested)
            created.append(actual)
            timeline_map[timeline.id] = actual
            for name, value in sorted(timeline.metadata.items()):
                api.set_feature(actual, name, value)
            for signal in timeline.signals:
                sig_requested = _remap(signal.id, timeline.id, actual)
                sig_id = api.create_signal(
                    sig_requested,
                    signal.uri,
                    signal.mime_class,
                    signal.mime_type,
                    signal.encoding,
                    signal.unit,
                    signal.track,
                )
                for name, value in sorted(signal.metadata.items()):
                    api.set_feature(sig_id, name, value)
        ag_ids = []
        for ag in doc.ags:
            requested = _remap(ag.id, doc.id, agset_id)
            timeline_id = timeline_map.get(ag.timeline) if ag.timeline is not None else None
            if ag.timeline is not None and timeline_id is None:
                raise MalformedId("AG %r references unknown timeline %r" % (ag.id, ag.timeline))
            actual = api.create_ag(requested, timeline_id)
            created.append(actual)
            ag_ids.append(actual)
            for name, value in sorted(ag.metadata.items()):
                api.set_feature(actual, name, value)
            anchor_map = {}
            for anchor in ag.anchors:
                anchor_id = api.create_anchor(_remap(anchor.id, ag.id, actual), unit=anchor.unit)
                anchor_map[anchor.id] = anchor_id
                if anchor.offset is not None:
                    api.set_anchor_offset(anchor_id, anchor.offset)
            for ann in ag.annotations:
                start = anchor_map.get(ann.start, ann.start)
                end = anchor_map.get(ann.end, ann.end)
                ann_id = api.create_annotation(
                    _remap(ann.id, ag.id, actual), start, end, ann.type
                )
                for name, value in sorted(ann.features.items()):
                    api.set_feature(ann_id, name, value)
        return ag_ids
    except Exception:
        for obj_id in reversed(created):
            if api.exists(obj_id):
                api.delete(obj_id)
        if created_agset and api.exists(agset_id):
            api.delete(agset_id)
        raise
