"""
Building an annotation graph and asking it questions
====================================================

An annotation graph is a directed acyclic graph: anchors are nodes that
may carry a time offset, annotations are labeled edges between anchors.
Everything is addressed through fully-qualified string identifiers, so a
session is just a sequence of string-in/string-out calls.
"""

from agraph.api import AnnotationGraphAPI

api = AnnotationGraphAPI()

# A corpus-level container, a timeline with one recording, and a graph.
corpus = api.create_agset("Demo")
timeline = api.create_timeline(corpus)
api.create_signal(timeline, "file:dialog.wav", "audio", "wav", "pcm", "16kHz", "1")
graph = api.create_ag(corpus, timeline)
print("graph id:", graph)

# Lay out words on the time axis.  Each word shares its boundary anchor
# with the next, exactly like beads on a string.
words = [("she", 0.0, 0.39), ("had", 0.39, 0.59), ("your", 0.59, 0.79),
         ("dark", 0.79, 1.11), ("suit", 1.11, 1.41)]
previous = None
for text, begin, end in words:
    start = previous if previous else api.create_anchor(graph)
    if previous is None:
        api.set_anchor_offset(start, begin)
    stop = api.create_anchor(graph)
    api.set_anchor_offset(stop, end)
    word = api.create_annotation(graph, start, stop, "word")
    api.set_feature(word, "text", text)
    previous = stop

# A phrase-level annotation can span the same anchors.
anchors = api.get_anchor_set(graph)
phrase = api.create_annotation(graph, anchors[0], anchors[-1], "phrase")
api.set_feature(phrase, "text", "she had your dark suit")

# Which annotations overlap the instant 0.7s?  (closed intervals)
print("\noverlapping 0.7s:")
for ann_id in api.get_annotation_set_by_offset(graph, "0.7"):
    ann = api.registry.resolve(ann_id).obj
    print("  %-8s %s" % (ann.type, ann.features["text"]))

# Anchors near 0.6s, within 50 ms either side (inclusive).
print("\nanchors within [0.55, 0.65]:")
for anchor_id in api.get_anchor_set_by_offset(graph, "0.6", "0.05"):
    print("  %s @ %s" % (anchor_id, api.get_anchor_offset(anchor_id)))

# The nearest anchored point to an arbitrary instant; ties all count.
print("\nnearest to 0.5s:", api.get_anchor_set_nearest_offset(graph, "0.5"))

# Every annotation starting in [0.3, 1.0], ordered by (start, end, id).
print("\nstarting inside [0.3, 1.0]:")
for ann_id in api.get_annotation_seq_by_offset(graph, "0.3", "1.0"):
    print(" ", ann_id)

# Fan-in and fan-out at a shared anchor.
middle = anchors[3]
print("\nat anchor %s:" % middle)
print("  incoming:", api.get_incoming_annotation_set(middle))
print("  outgoing:", api.get_outgoing_annotation_set(middle))

# The whole state serializes canonically: same state, same bytes.
print("\ncanonical XML, first 5 lines:")
print("\n".join(api.to_xml(corpus).splitlines()[:5]))
