"""The string-keyed annotation graph API.

Every operation takes and returns identifier strings (plus plain string
or numeric arguments), so the whole surface can be driven from scripting
layers, event handlers and command lines without passing object handles
around.  Creation calls accept either a parent id (a fresh child id is
generated) or a full child id (used verbatim when free, otherwise a fresh
id is generated under the same parent).

All calls are linearizable: the underlying registry serializes mutations
behind one lock and queries see a consistent snapshot.
"""

from . import offsets
from .core import Registry
from .errors import BadArgument, MalformedId
from .ids import Kind


class AnnotationGraphAPI:
    """Facade over a :class:`~agraph.core.Registry`."""

    def __init__(self, registry=None):
        self.registry = registry if registry is not None else Registry()

    # ------------------------------------------------------------------
    # AGSet / AG lifecycle
    # ------------------------------------------------------------------

    def create_agset(self, agset_id):
        """Create an empty AGSet with the given single-segment id."""
        with self.registry.lock:
            return self.registry.add_agset(agset_id).id

    def create_ag(self, ag_id, timeline_id=None):
        """Create an annotation graph under an AGSet.

        ``ag_id`` may be an AGSet id (an AG id is generated) or an AG id
        (used if free).  ``timeline_id``, when given, must name an
        existing timeline of the same AGSet.
        """
        with self.registry.lock:
            return self.registry.add_ag(ag_id, timeline_id).id

    def create_timeline(self, timeline_id):
        """Create a timeline; the owning AGSet must already exist."""
        with self.registry.lock:
            return self.registry.add_timeline(timeline_id).id

    def create_signal(self, signal_id, uri, mime_class, mime_type, encoding, unit, track):
        """Register signal metadata inside a timeline.

        Two signals may share a uri with different tracks; nothing is
        decoded here, the fields only describe the recording.
        """
        with self.registry.lock:
            return self.registry.add_signal(
                signal_id, uri, mime_class, mime_type, encoding, unit, track
            ).id

    def get_signals(self, timeline_id):
        """Signal ids of a timeline, in creation order."""
        with self.registry.lock:
            found = self.registry.expect(timeline_id, Kind.TIMELINE)
            return list(found.obj.signals)

    # ------------------------------------------------------------------
    # Anchors
    # ------------------------------------------------------------------

    def create_anchor(self, anchor_id, unit=None):
        """Create an anchor with no offset; set one with set_anchor_offset."""
        with self.registry.lock:
            if unit is None:
                return self.registry.add_anchor(anchor_id).id
            return self.registry.add_anchor(anchor_id, unit=unit).id

    def set_anchor_offset(self, anchor_id, offset):
        """Store a time offset on an anchor.

        The new offset must keep start <= end for every attached
        annotation whose other endpoint is anchored.
        """
        value = offsets.to_decimal(offset, nonnegative=True)
        with self.registry.lock:
            self.registry.set_anchor_offset(anchor_id, value)

    def get_anchor_offset(self, anchor_id):
        """The anchor's offset as a Decimal, or None when unanchored."""
        with self.registry.lock:
            return self.registry.expect(anchor_id, Kind.ANCHOR).obj.offset

    # ------------------------------------------------------------------
    # Annotations
    # ------------------------------------------------------------------

    def create_annotation(self, ann_id, start, end, annotation_type):
        """Create a labeled edge from anchor ``start`` to anchor ``end``.

        Both anchors must live in the annotation's own graph, anchored
        endpoints must satisfy start <= end, and the new edge must not
        close a directed cycle.
        """
        with self.registry.lock:
            return self.registry.add_annotation(ann_id, start, end, annotation_type).id

    def exists(self, any_id):
        """True iff the id resolves; malformed ids are simply False."""
        with self.registry.lock:
            return self.registry.exists(any_id)

    def delete(self, any_id):
        """Delete an object.

        AGSets take their timelines and graphs with them, graphs take
        their anchors and annotations; deleting an anchor that still has
        attached annotations is refused; deleting a timeline detaches the
        graphs that referenced it.
        """
        with self.registry.lock:
            self.registry.delete(any_id)

    def copy_annotation(self, ann_id):
        """Duplicate an annotation under a fresh id.

        The copy shares the original's anchors and type; features are
        deep-copied so later edits stay independent.
        """
        with self.registry.lock:
            found = self.registry.expect(ann_id, Kind.ANNOTATION)
            ann = found.obj
            copy = self.registry.add_annotation(found.parent.id, ann.start, ann.end, ann.type)
            copy.features.update(ann.features)
            for name, value in copy.features.items():
                self.registry.index_of(found.parent).add_feature(copy.id, name, value)
            return copy.id

    def split_annotation(self, ann_id):
        """Split an annotation in two at a fresh middle anchor.

        The original keeps its start anchor and now ends at the middle
        anchor; a new annotation with the same type and features runs from
        the middle anchor to the original end.  When both endpoints carry
        offsets the middle anchor sits at their midpoint, otherwise it is
        left unanchored.  Returns (original id, new id).
        """
        parts = self.nsplit_annotation(ann_id, 2)
        return parts[0], parts[1]

    def nsplit_annotation(self, ann_id, n):
        """Split an annotation into ``n`` pieces over n-1 fresh anchors.

        Returns all n annotation ids, the original (leftmost piece) first,
        then the new pieces left to right, each carrying the original's
        type and a copy of its features.
        """
        if not isinstance(n, int) or isinstance(n, bool) or n < 2:
            raise BadArgument("n must be an integer >= 2, got %r" % (n,))
        with self.registry.lock:
            found = self.registry.expect(ann_id, Kind.ANNOTATION)
            ag = found.parent
            ann = found.obj
            idx = self.registry.index_of(ag)
            start = ag.anchors[ann.start]
            end = ag.anchors[ann.end]
            anchored = start.offset is not None and end.offset is not None
            bounds = offsets.subdivide(start.offset, end.offset, n) if anchored else None
            middles = []
            for k in range(1, n):
                anchor = self.registry.add_anchor(ag.id, unit=start.unit)
                if anchored:
                    self.registry.set_anchor_offset(anchor.id, bounds[k])
                middles.append(anchor.id)
            # Rewire the original onto the first middle anchor.
            idx.remove_annotation(ag, ann)
            ann.end = middles[0]
            idx.add_annotation(ag, ann)
            pieces = [ann.id]
            hops = middles + [end.id]
            for k in range(1, n):
                piece = self.registry.add_annotation(ag.id, hops[k - 1], hops[k], ann.type)
                piece.features.update(ann.features)
                for name, value in piece.features.items():
                    idx.add_feature(piece.id, name, value)
                pieces.append(piece.id)
            return pieces

    # ------------------------------------------------------------------
    # Features
    # ------------------------------------------------------------------

    def set_feature(self, any_id, name, value):
        """Upsert a feature on an annotation or on an object's metadata."""
        with self.registry.lock:
            self.registry.set_feature(any_id, name, value)

    def get_feature(self, any_id, name):
        with self.registry.lock:
            return self.registry.get_feature(any_id, name)

    def exists_feature(self, any_id, name):
        with self.registry.lock:
            return self.registry.exists_feature(any_id, name)

    def delete_feature(self, any_id, name):
        with self.registry.lock:
            self.registry.delete_feature(any_id, name)

    # ------------------------------------------------------------------
    # Offset and adjacency queries
    # ------------------------------------------------------------------

    def get_anchor_set(self, ag_id):
        """All anchor ids: offset ascending, unanchored last, id tie-break."""
        with self.registry.lock:
            found = self.registry.expect(ag_id, Kind.AG)
            return self.registry.anchor_ids_sorted(found.obj)

    def get_anchor_set_by_offset(self, ag_id, offset, epsilon=0):
        """Anchor ids with offset in [offset-epsilon, offset+epsilon], inclusive."""
        target = offsets.to_decimal(offset)
        eps = offsets.to_decimal(epsilon, what="epsilon")
        if eps < 0:
            raise BadArgument("epsilon must be >= 0, got %s" % (eps,))
        with self.registry.lock:
            found = self.registry.expect(ag_id, Kind.AG)
            return self.registry.anchors_between(found.obj, target - eps, target + eps)

    def get_anchor_set_nearest_offset(self, ag_id, offset):
        """All anchor ids at minimal distance from ``offset`` (ties included)."""
        target = offsets.to_decimal(offset)
        with self.registry.lock:
            found = self.registry.expect(ag_id, Kind.AG)
            return self.registry.anchors_nearest(found.obj, target)

    def get_incoming_annotation_set(self, anchor_id):
        """Ids of annotations ending at this anchor, sorted by id."""
        with self.registry.lock:
            found = self.registry.expect(anchor_id, Kind.ANCHOR)
            return self.registry.incoming_ids(found.parent, anchor_id)

    def get_outgoing_annotation_set(self, anchor_id):
        """Ids of annotations starting at this anchor, sorted by id."""
        with self.registry.lock:
            found = self.registry.expect(anchor_id, Kind.ANCHOR)
            return self.registry.outgoing_ids(found.parent, anchor_id)

    def get_annotation_set_by_offset(self, ag_id, offset):
        """Annotations overlapping an offset (closed interval, both ends anchored)."""
        target = offsets.to_decimal(offset)
        with self.registry.lock:
            found = self.registry.expect(ag_id, Kind.AG)
            return self.registry.annotations_covering(found.obj, target)

    def get_annotation_seq_by_offset(self, ag_id, begin=None, end=None):
        """Annotations with anchored starts, in (start, end, id) order.

        With ``begin`` only, keeps start >= begin; with both bounds, keeps
        begin <= start <= end (inclusive).  Annotations whose start anchor
        has no offset are never included.
        """
        lo = offsets.to_decimal(begin, what="begin") if begin is not None else None
        hi = offsets.to_decimal(end, what="end") if end is not None else None
        if lo is not None and hi is not None and lo > hi:
            raise BadArgument("begin %s is after end %s" % (lo, hi))
        with self.registry.lock:
            found = self.registry.expect(ag_id, Kind.AG)
            return self.registry.annotations_seq(found.obj, lo, hi)

    # ------------------------------------------------------------------
    # XML export
    # ------------------------------------------------------------------

    def to_xml(self, any_id):
        """Canonical XML interchange text for an AGSet or a single AG."""
        from . import aif

        with self.registry.lock:
            found = self.registry.resolve(any_id)
            if found.kind is Kind.AGSET:
                return aif.serialize_agset(self.registry, any_id)
            if found.kind is Kind.AG:
                return aif.serialize_ag(self.registry, any_id)
            raise MalformedId("to_xml needs an AGSet or AG id, got a %s" % found.kind.label)


_default_api = AnnotationGraphAPI()


def default_api():
    """Process-wide shared API instance used by the scripting surface."""
    return _default_api


__all__ = ["AnnotationGraphAPI", "default_api"]
