"""Object model and in-memory registry.

An AGSet owns timelines (synchronized signals) and annotation graphs.
Each graph is a set of anchors (nodes, optionally carrying a time offset)
and annotations (labeled directed edges between two anchors of the same
graph).  The annotation edges always form a DAG, and whenever both ends
of an annotation carry offsets the start offset is <= the end offset.

The registry maps identifier strings to live objects and maintains, per
graph, the indexes that back the offset and adjacency queries:

* anchors ordered by offset,
* annotations ordered by start offset,
* incoming/outgoing adjacency per anchor,
* an inverted index over annotation feature values.

All mutations run under one re-entrant lock, so operations are
linearizable; callers on any thread see either the old or the new state,
never a partial one.
"""

import bisect
import threading
from dataclasses import dataclass, field
from decimal import Decimal

from .errors import (
    AnchorInUse,
    BadArgument,
    CrossGraphAnchors,
    CycleError,
    DuplicateId,
    EmptyDomain,
    MalformedId,
    NoSuchFeature,
    NoSuchObject,
    OrderViolation,
)
from .ids import Kind, child_id, parse_identifier

DEFAULT_ANCHOR_UNIT = "seconds"


@dataclass
class Anchor:
    id: str
    offset: Decimal | None = None
    unit: str = DEFAULT_ANCHOR_UNIT


@dataclass
class Annotation:
    id: str
    start: str
    end: str
    type: str
    features: dict = field(default_factory=dict)


@dataclass
class Signal:
    id: str
    uri: str
    mime_class: str = ""
    mime_type: str = ""
    encoding: str = ""
    unit: str = ""
    track: str = ""
    metadata: dict = field(default_factory=dict)


@dataclass
class Timeline:
    id: str
    signals: dict = field(default_factory=dict)  # id -> Signal, creation order
    metadata: dict = field(default_factory=dict)


@dataclass
class AG:
    id: str
    timeline_id: str | None = None
    anchors: dict = field(default_factory=dict)  # id -> Anchor, creation order
    annotations: dict = field(default_factory=dict)  # id -> Annotation
    metadata: dict = field(default_factory=dict)


@dataclass
class AGSet:
    id: str
    timelines: dict = field(default_factory=dict)  # id -> Timeline, creation order
    ags: dict = field(default_factory=dict)  # id -> AG, creation order
    metadata: dict = field(default_factory=dict)


@dataclass
class Resolved:
    """A resolved identifier: the object, its kind, and its containers."""

    obj: object
    kind: Kind
    agset: AGSet | None = None
    parent: object | None = None


def anchor_sort_key(anchor):
    """Anchored first in offset order, unanchored after, ids break ties."""
    if anchor.offset is not None:
        return ((0, anchor.offset), anchor.id)
    return ((1,), anchor.id)


class AGIndex:
    """Per-graph search indexes, kept exactly in step with object state."""

    def __init__(self):
        self.anchors = []  # sorted [(anchor key, anchor id)]
        self.starts = []  # sorted [(start key, end key, annotation id)]
        self.incoming = {}  # anchor id -> set of annotation ids ending there
        self.outgoing = {}  # anchor id -> set of annotation ids starting there
        self.features = {}  # name -> value -> set of annotation ids
        # Count of edge endpoints sitting on unanchored anchors; when zero,
        # offsets witness the topological order and cycle checks short-circuit.
        self.unanchored_degree = 0

    def __eq__(self, other):
        return (
            isinstance(other, AGIndex)
            and self.anchors == other.anchors
            and self.starts == other.starts
            and self.incoming == other.incoming
            and self.outgoing == other.outgoing
            and self.features == other.features
            and self.unanchored_degree == other.unanchored_degree
        )

    # -- anchors ---------------------------------------------------------

    def add_anchor(self, anchor):
        bisect.insort(self.anchors, (anchor_sort_key(anchor)))
        self.incoming.setdefault(anchor.id, set())
        self.outgoing.setdefault(anchor.id, set())

    def remove_anchor(self, anchor):
        self.anchors.remove(anchor_sort_key(anchor))
        del self.incoming[anchor.id]
        del self.outgoing[anchor.id]

    # -- annotations -----------------------------------------------------

    def annotation_entry(self, ag, ann):
        start = ag.anchors[ann.start].offset
        end = ag.anchors[ann.end].offset
        start_key = (0, start) if start is not None else (1,)
        end_key = (0, end) if end is not None else (1,)
        return (start_key, end_key, ann.id)

    def add_annotation(self, ag, ann):
        bisect.insort(self.starts, self.annotation_entry(ag, ann))
        self.outgoing[ann.start].add(ann.id)
        self.incoming[ann.end].add(ann.id)
        for name, value in ann.features.items():
            self.add_feature(ann.id, name, value)
        for anchor_id in (ann.start, ann.end):
            if ag.anchors[anchor_id].offset is None:
                self.unanchored_degree += 1

    def remove_annotation(self, ag, ann):
        self.starts.remove(self.annotation_entry(ag, ann))
        self.outgoing[ann.start].discard(ann.id)
        self.incoming[ann.end].discard(ann.id)
        for name, value in ann.features.items():
            self.remove_feature(ann.id, name, value)
        for anchor_id in (ann.start, ann.end):
            if ag.anchors[anchor_id].offset is None:
                self.unanchored_degree -= 1

    # -- features --------------------------------------------------------

    def add_feature(self, ann_id, name, value):
        self.features.setdefault(name, {}).setdefault(value, set()).add(ann_id)

    def remove_feature(self, ann_id, name, value):
        by_value = self.features.get(name)
        if by_value is None:
            return
        holders = by_value.get(value)
        if holders is None:
            return
        holders.discard(ann_id)
        if not holders:
            del by_value[value]
        if not by_value:
            del self.features[name]

    @classmethod
    def rebuilt(cls, ag):
        """Fresh index computed from object state alone."""
        idx = cls()
        for anchor in ag.anchors.values():
            idx.add_anchor(anchor)
        for ann in ag.annotations.values():
            idx.add_annotation(ag, ann)
        return idx


_FEATURE_BEARING = (Kind.ANNOTATION, Kind.AGSET, Kind.AG, Kind.TIMELINE, Kind.SIGNAL)


class Registry:
    """Identifier-keyed store of AGSets with index maintenance."""

    def __init__(self):
        self.lock = threading.RLock()
        self.agsets = {}
        self._counters = {}  # (parent text or "", Kind) -> next suffix number
        self._indexes = {}  # ag id -> AGIndex

    # -- resolution ------------------------------------------------------

    def try_resolve(self, text):
        """Resolved record for a live object, else None (never raises)."""
        try:
            parsed = parse_identifier(text)
        except MalformedId:
            return None
        agset = self.agsets.get(parsed.segments[0])
        if agset is None:
            return None
        if parsed.depth == 1:
            return Resolved(agset, Kind.AGSET, agset=agset)
        mid = parsed.ancestors[-1] if parsed.depth == 3 else parsed.text
        timeline = agset.timelines.get(mid)
        ag = agset.ags.get(mid)
        if parsed.depth == 2:
            if timeline is not None:
                return Resolved(timeline, Kind.TIMELINE, agset=agset, parent=agset)
            if ag is not None:
                return Resolved(ag, Kind.AG, agset=agset, parent=agset)
            return None
        if timeline is not None:
            signal = timeline.signals.get(text)
            if signal is not None:
                return Resolved(signal, Kind.SIGNAL, agset=agset, parent=timeline)
        if ag is not None:
            anchor = ag.anchors.get(text)
            if anchor is not None:
                return Resolved(anchor, Kind.ANCHOR, agset=agset, parent=ag)
            ann = ag.annotations.get(text)
            if ann is not None:
                return Resolved(ann, Kind.ANNOTATION, agset=agset, parent=ag)
        return None

    def resolve(self, text):
        found = self.try_resolve(text)
        if found is None:
            raise NoSuchObject("no object with id %r" % (text,))
        return found

    def exists(self, text):
        return self.try_resolve(text) is not None

    def expect(self, text, kind):
        found = self.resolve(text)
        if found.kind is not kind:
            raise MalformedId("%r names a %s, not a %s" % (text, found.kind.label, kind.label))
        return found

    # -- id generation ---------------------------------------------------

    def generate_id(self, parent_text, kind):
        """Next free ``<parent>:<Kind><N>`` id, skipping ids already taken.

        The per-parent, per-kind counter starts at 1 and only moves
        forward, so generated ids never collide with live ones and deleted
        ids are not quietly reused.
        """
        if parent_text is not None and self.try_resolve(parent_text) is None:
            raise NoSuchObject("no object with id %r" % (parent_text,))
        key = (parent_text or "", kind)
        counter = self._counters.get(key, 1)
        while True:
            candidate = child_id(parent_text, kind.label + str(counter))
            counter += 1
            if self.try_resolve(candidate) is None:
                self._counters[key] = counter
                return candidate

    # -- creation --------------------------------------------------------

    def add_agset(self, text):
        parsed = parse_identifier(text)
        if parsed.depth != 1:
            raise MalformedId("AGSet id must have a single segment, got %r" % (text,))
        if text in self.agsets:
            raise DuplicateId("AGSet %r already exists" % (text,))
        agset = AGSet(id=text)
        self.agsets[text] = agset
        return agset

    def _claim_child_id(self, requested, depth, parent_kinds, kind):
        """Interpret a create id: parent id -> generate, child id -> use if free.

        ``requested`` must be either a parent id (depth-1 segments, one of
        ``parent_kinds``) or a full child id whose parent exists and is one
        of ``parent_kinds``.  Returns (final id, parent Resolved).
        """
        parsed = parse_identifier(requested)
        if parsed.depth == depth - 1:
            parent = self.resolve(requested)
            if parent.kind not in parent_kinds:
                raise MalformedId(
                    "%r names a %s; expected a %s id"
                    % (requested, parent.kind.label, " or ".join(k.label for k in parent_kinds))
                )
            return self.generate_id(requested, kind), parent
        if parsed.depth != depth:
            raise MalformedId("%r is not a valid %s id" % (requested, kind.label))
        parent = self.resolve(parsed.parent)
        if parent.kind not in parent_kinds:
            raise MalformedId(
                "%r names a %s; expected a %s id"
                % (parsed.parent, parent.kind.label, " or ".join(k.label for k in parent_kinds))
            )
        if self.try_resolve(requested) is None:
            return requested, parent
        return self.generate_id(parsed.parent, kind), parent

    def add_timeline(self, requested):
        final_id, parent = self._claim_child_id(requested, 2, (Kind.AGSET,), Kind.TIMELINE)
        timeline = Timeline(id=final_id)
        parent.obj.timelines[final_id] = timeline
        return timeline

    def add_ag(self, requested, timeline_id=None):
        final_id, parent = self._claim_child_id(requested, 2, (Kind.AGSET,), Kind.AG)
        agset = parent.obj
        if timeline_id is not None:
            tl = self.expect(timeline_id, Kind.TIMELINE)
            if tl.agset.id != agset.id:
                raise BadArgument(
                    "timeline %r belongs to AGSet %r, not %r" % (timeline_id, tl.agset.id, agset.id)
                )
            timeline_id = tl.obj.id
        ag = AG(id=final_id, timeline_id=timeline_id)
        agset.ags[final_id] = ag
        self._indexes[final_id] = AGIndex()
        return ag

    def add_signal(self, requested, uri, mime_class, mime_type, encoding, unit, track):
        if not uri:
            raise BadArgument("signal uri must be non-empty")
        final_id, parent = self._claim_child_id(requested, 3, (Kind.TIMELINE,), Kind.SIGNAL)
        signal = Signal(
            id=final_id,
            uri=uri,
            mime_class=mime_class,
            mime_type=mime_type,
            encoding=encoding,
            unit=unit,
            track=track,
        )
        parent.obj.signals[final_id] = signal
        return signal

    def add_anchor(self, requested, unit=DEFAULT_ANCHOR_UNIT):
        final_id, parent = self._claim_child_id(requested, 3, (Kind.AG,), Kind.ANCHOR)
        anchor = Anchor(id=final_id, unit=unit)
        ag = parent.obj
        ag.anchors[final_id] = anchor
        self._indexes[ag.id].add_anchor(anchor)
        return anchor

    def add_annotation(self, requested, start_id, end_id, ann_type):
        if not isinstance(ann_type, str) or ann_type == "":
            raise BadArgument("annotation type must be a non-empty string")
        final_id, parent = self._claim_child_id(requested, 3, (Kind.AG,), Kind.ANNOTATION)
        ag = parent.obj
        start = self._anchor_in(ag, start_id)
        end = self._anchor_in(ag, end_id)
        if start.offset is not None and end.offset is not None and start.offset > end.offset:
            raise OrderViolation(
                "start offset %s is after end offset %s" % (start.offset, end.offset)
            )
        idx = self._indexes[ag.id]
        if self._would_cycle(ag, idx, start_id, end_id):
            raise CycleError("edge %r -> %r would close a cycle" % (start_id, end_id))
        ann = Annotation(id=final_id, start=start_id, end=end_id, type=ann_type)
        ag.annotations[final_id] = ann
        idx.add_annotation(ag, ann)
        return ann

    def _anchor_in(self, ag, anchor_id):
        anchor = ag.anchors.get(anchor_id)
        if anchor is not None:
            return anchor
        if self.exists(anchor_id):
            raise CrossGraphAnchors("anchor %r is not in graph %r" % (anchor_id, ag.id))
        raise NoSuchObject("no object with id %r" % (anchor_id,))

    def _would_cycle(self, ag, idx, start_id, end_id):
        if start_id == end_id:
            return True
        start = ag.anchors[start_id]
        end = ag.anchors[end_id]
        if (
            idx.unanchored_degree == 0
            and start.offset is not None
            and end.offset is not None
            and start.offset < end.offset
        ):
            # Every edge runs weakly forward in offset and no edge touches
            # an unanchored anchor, so no path can return to a strictly
            # earlier offset.
            return False
        stack = [end_id]
        seen = {end_id}
        while stack:
            node = stack.pop()
            if node == start_id:
                return True
            for ann_id in idx.outgoing.get(node, ()):
                nxt = ag.annotations[ann_id].end
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return False

    # -- offsets ---------------------------------------------------------

    def set_anchor_offset(self, anchor_id, offset):
        found = self.expect(anchor_id, Kind.ANCHOR)
        anchor, ag = found.obj, found.parent
        idx = self._indexes[ag.id]
        for ann_id in idx.outgoing[anchor_id]:
            other = ag.anchors[ag.annotations[ann_id].end]
            if other.offset is not None and offset > other.offset:
                raise OrderViolation(
                    "offset %s on %r would pass the end of %r" % (offset, anchor_id, ann_id)
                )
        for ann_id in idx.incoming[anchor_id]:
            other = ag.anchors[ag.annotations[ann_id].start]
            if other.offset is not None and other.offset > offset:
                raise OrderViolation(
                    "offset %s on %r would precede the start of %r" % (offset, anchor_id, ann_id)
                )
        touching = idx.incoming[anchor_id] | idx.outgoing[anchor_id]
        for ann_id in touching:
            idx.starts.remove(idx.annotation_entry(ag, ag.annotations[ann_id]))
        idx.anchors.remove(anchor_sort_key(anchor))
        if anchor.offset is None:
            idx.unanchored_degree -= len(idx.incoming[anchor_id]) + len(idx.outgoing[anchor_id])
        anchor.offset = offset
        bisect.insort(idx.anchors, anchor_sort_key(anchor))
        for ann_id in touching:
            bisect.insort(idx.starts, idx.annotation_entry(ag, ag.annotations[ann_id]))

    # -- features --------------------------------------------------------

    def feature_map(self, text):
        found = self.resolve(text)
        if found.kind not in _FEATURE_BEARING:
            raise MalformedId("%s %r does not carry features" % (found.kind.label, text))
        if found.kind is Kind.ANNOTATION:
            return found.obj.features, found
        return found.obj.metadata, found

    def set_feature(self, text, name, value):
        if not isinstance(name, str) or name == "":
            raise BadArgument("feature name must be a non-empty string")
        if not isinstance(value, str):
            raise BadArgument("feature value must be a string, got %r" % (value,))
        fmap, found = self.feature_map(text)
        if found.kind is Kind.ANNOTATION:
            idx = self._indexes[found.parent.id]
            old = fmap.get(name)
            if old is not None:
                idx.remove_feature(text, name, old)
            idx.add_feature(text, name, value)
        fmap[name] = value

    def get_feature(self, text, name):
        fmap, _ = self.feature_map(text)
        if name not in fmap:
            raise NoSuchFeature("no feature %r on %r" % (name, text))
        return fmap[name]

    def exists_feature(self, text, name):
        fmap, _ = self.feature_map(text)
        return name in fmap

    def delete_feature(self, text, name):
        fmap, found = self.feature_map(text)
        if name not in fmap:
            raise NoSuchFeature("no feature %r on %r" % (name, text))
        if found.kind is Kind.ANNOTATION:
            self._indexes[found.parent.id].remove_feature(text, name, fmap[name])
        del fmap[name]

    # -- deletion --------------------------------------------------------

    def delete(self, text):
        found = self.resolve(text)
        kind = found.kind
        if kind is Kind.AGSET:
            del self.agsets[text]
            for ag_id in found.obj.ags:
                self._indexes.pop(ag_id, None)
        elif kind is Kind.TIMELINE:
            agset = found.agset
            for ag in agset.ags.values():
                if ag.timeline_id == text:
                    ag.timeline_id = None
            del agset.timelines[text]
        elif kind is Kind.SIGNAL:
            del found.parent.signals[text]
        elif kind is Kind.AG:
            del found.agset.ags[text]
            del self._indexes[text]
        elif kind is Kind.ANCHOR:
            ag = found.parent
            idx = self._indexes[ag.id]
            if idx.incoming[text] or idx.outgoing[text]:
                raise AnchorInUse("anchor %r still has attached annotations" % (text,))
            idx.remove_anchor(found.obj)
            del ag.anchors[text]
        else:
            ag = found.parent
            self._indexes[ag.id].remove_annotation(ag, found.obj)
            del ag.annotations[text]

    # -- queries ---------------------------------------------------------

    def anchor_ids_sorted(self, ag):
        return [entry[1] for entry in self._indexes[ag.id].anchors]

    def anchors_between(self, ag, lo, hi):
        """Ids of anchored anchors with lo <= offset <= hi, in index order."""
        idx = self._indexes[ag.id]
        left = bisect.bisect_left(idx.anchors, ((0, lo),))
        out = []
        for key, anchor_id in idx.anchors[left:]:
            if key[0] == 1 or key[1] > hi:
                break
            out.append(anchor_id)
        return out

    def anchors_nearest(self, ag, target):
        """All anchor ids at minimal |offset - target|; ties all returned."""
        idx = self._indexes[ag.id]
        best = None
        out = []
        for key, anchor_id in idx.anchors:
            if key[0] == 1:
                break
            distance = abs(key[1] - target)
            if best is None or distance < best:
                best = distance
                out = [anchor_id]
            elif distance == best:
                out.append(anchor_id)
        if best is None:
            raise EmptyDomain("graph %r has no anchored anchors" % (ag.id,))
        return out

    def incoming_ids(self, ag, anchor_id):
        return sorted(self._indexes[ag.id].incoming[anchor_id])

    def outgoing_ids(self, ag, anchor_id):
        return sorted(self._indexes[ag.id].outgoing[anchor_id])

    def annotations_covering(self, ag, offset):
        """Annotation ids with both ends anchored and start <= offset <= end."""
        idx = self._indexes[ag.id]
        out = []
        for start_key, end_key, ann_id in idx.starts:
            if start_key[0] == 1 or start_key[1] > offset:
                break
            if end_key[0] == 0 and end_key[1] >= offset:
                out.append(ann_id)
        return out

    def annotations_seq(self, ag, begin=None, end=None):
        """Annotation ids with anchored starts, filtered by start offset."""
        idx = self._indexes[ag.id]
        entries = idx.starts
        lo = 0
        if begin is not None:
            lo = bisect.bisect_left(entries, ((0, begin),))
        out = []
        for start_key, _end_key, ann_id in entries[lo:]:
            if start_key[0] == 1:
                break
            if end is not None and start_key[1] > end:
                break
            out.append(ann_id)
        return out

    # -- integrity helpers -------------------------------------------------

    def index_of(self, ag):
        return self._indexes[ag.id]

    def topo_order(self, ag):
        """Anchor ids in a topological order of the annotation edges.

        Raises CycleError if the edge set is not a DAG; used by integrity
        checks, never on the mutation path.
        """
        indegree = {a: 0 for a in ag.anchors}
        for ann in ag.annotations.values():
            indegree[ann.end] += 1
        ready = sorted(a for a, d in indegree.items() if d == 0)
        idx = self._indexes[ag.id]
        order = []
        while ready:
            node = ready.pop()
            order.append(node)
            for ann_id in idx.outgoing[node]:
                nxt = ag.annotations[ann_id].end
                indegree[nxt] -= 1
                if indegree[nxt] == 0:
                    ready.append(nxt)
        if len(order) != len(ag.anchors):
            raise CycleError("graph %r contains a cycle" % (ag.id,))
        return order
