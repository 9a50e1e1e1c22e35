"""Graph equality up to identifier renaming.

Two annotation graphs are considered equal when some bijection between
their anchors preserves offsets and units and carries the annotation
multiset of one graph exactly onto the other's (type, features and
endpoints all matching).  Identifier text plays no role, so codecs that
regenerate ids still round-trip cleanly.

Anchors are first grouped by an iterated neighborhood signature; a
backtracking search then settles the remaining ambiguous groups and the
final bijection is verified edge-for-edge, so the answer is exact.
"""

from collections import Counter

from . import offsets

_ROUNDS = 3


def _edge_payload(ann):
    return (ann.type, tuple(sorted(ann.features.items())))


def _anchor_label(anchor):
    offset = offsets.fmt(anchor.offset) if anchor.offset is not None else "-"
    return (offset, anchor.unit)


def _adjacency(ag):
    adjacency = {a: ([], []) for a in ag.anchors}
    for ann in ag.annotations.values():
        payload = _edge_payload(ann)
        adjacency[ann.start][0].append((payload, ann.end))
        adjacency[ann.end][1].append((payload, ann.start))
    return adjacency


def _color_classes(ag, adjacency):
    """Anchor id -> small integer color, stable across isomorphic graphs."""
    labels = {a: _anchor_label(anchor) for a, anchor in ag.anchors.items()}
    palette = {}
    for label in sorted(set(labels.values())):
        palette[label] = len(palette)
    colors = {a: palette[labels[a]] for a in labels}
    for _ in range(_ROUNDS):
        terms = {}
        for anchor_id in colors:
            outgoing = sorted((payload, colors[o]) for payload, o in adjacency[anchor_id][0])
            incoming = sorted((payload, colors[o]) for payload, o in adjacency[anchor_id][1])
            terms[anchor_id] = (colors[anchor_id], tuple(outgoing), tuple(incoming))
        palette = {}
        for term in sorted(set(terms.values()), key=repr):
            palette[term] = len(palette)
        colors = {a: palette[terms[a]] for a in terms}
    return colors


def graphs_equal(ag_a, ag_b):
    """Renaming-tolerant equality of two core AG objects."""
    if len(ag_a.anchors) != len(ag_b.anchors):
        return False
    if len(ag_a.annotations) != len(ag_b.annotations):
        return False
    if ag_a.metadata != ag_b.metadata:
        return False
    if Counter(map(_anchor_label, ag_a.anchors.values())) != Counter(
        map(_anchor_label, ag_b.anchors.values())
    ):
        return False
    if Counter(map(_edge_payload, ag_a.annotations.values())) != Counter(
        map(_edge_payload, ag_b.annotations.values())
    ):
        return False

    adj_a = _adjacency(ag_a)
    adj_b = _adjacency(ag_b)
    colors_a = _color_classes(ag_a, adj_a)
    colors_b = _color_classes(ag_b, adj_b)
    groups_b = {}
    for anchor_id, color in colors_b.items():
        groups_b.setdefault(color, []).append(anchor_id)
    counts_a = Counter(colors_a.values())
    if counts_a != Counter({c: len(g) for c, g in groups_b.items()}):
        return False

    edges_a = Counter((ann.start, ann.end, _edge_payload(ann)) for ann in ag_a.annotations.values())
    edges_b = Counter((ann.start, ann.end, _edge_payload(ann)) for ann in ag_b.annotations.values())

    # Most groups are singletons; backtracking only bites inside ties.
    order = sorted(colors_a, key=lambda a: (counts_a[colors_a[a]], colors_a[a], a))
    mapping = {}
    used = set()

    def consistent(a, b):
        for payload, other in adj_a[a][0]:
            if other in mapping and edges_b[(b, mapping[other], payload)] == 0:
                return False
        for payload, other in adj_a[a][1]:
            if other in mapping and edges_b[(mapping[other], b, payload)] == 0:
                return False
        return True

    def assign(pos):
        if pos == len(order):
            mapped = Counter(
                (mapping[s], mapping[e], payload)
                for (s, e, payload), n in edges_a.items()
                for _ in range(n)
            )
            return mapped == edges_b
        a = order[pos]
        for b in groups_b[colors_a[a]]:
            if b in used or not consistent(a, b):
                continue
            mapping[a] = b
            used.add(b)
            if assign(pos + 1):
                return True
            del mapping[a]
            used.discard(b)
        return False

    return assign(0)


def agsets_equal(registry_a, agset_id_a, registry_b, agset_id_b):
    """Renaming-tolerant equality of two AGSets.

    Timelines, signals and graphs are paired in creation order; signal
    descriptions must match field-for-field, graphs must be isomorphic,
    and paired graphs must point at paired timelines.
    """
    set_a = registry_a.agsets[agset_id_a]
    set_b = registry_b.agsets[agset_id_b]
    if set_a.metadata != set_b.metadata:
        return False
    if len(set_a.timelines) != len(set_b.timelines) or len(set_a.ags) != len(set_b.ags):
        return False
    for tl_a, tl_b in zip(set_a.timelines.values(), set_b.timelines.values()):
        if tl_a.metadata != tl_b.metadata:
            return False
        if len(tl_a.signals) != len(tl_b.signals):
            return False
        for sig_a, sig_b in zip(tl_a.signals.values(), tl_b.signals.values()):
            same = (
                sig_a.uri == sig_b.uri
                and sig_a.mime_class == sig_b.mime_class
                and sig_a.mime_type == sig_b.mime_type
                and sig_a.encoding == sig_b.encoding
                and sig_a.unit == sig_b.unit
                and sig_a.track == sig_b.track
                and sig_a.metadata == sig_b.metadata
            )
            if not same:
                return False
    timeline_pairing = dict(zip(set_a.timelines, set_b.timelines))
    for ag_a, ag_b in zip(set_a.ags.values(), set_b.ags.values()):
        linked_a = timeline_pairing.get(ag_a.timeline_id) if ag_a.timeline_id else None
        if linked_a != ag_b.timeline_id:
            return False
        if not graphs_equal(ag_a, ag_b):
            return False
    return True
