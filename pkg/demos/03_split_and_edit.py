"""
Editing annotations: copy, split, n-way split
=============================================

Splitting is the editing move behind "place a cursor inside a region and
press Return": the annotation keeps its start, a fresh anchor appears at
the midpoint, and a second annotation with the same label data covers the
rest.
"""

from agraph.api import AnnotationGraphAPI


def show(api, ann_id, indent="  "):
    found = api.registry.resolve(ann_id)
    ann, ag = found.obj, found.parent
    print("%s%-22s [%s, %s] %r %s" % (
        indent, ann_id.split(":")[-1],
        ag.anchors[ann.start].offset, ag.anchors[ann.end].offset,
        ann.type, ann.features,
    ))


api = AnnotationGraphAPI()
api.create_agset("Edit")
graph = api.create_ag("Edit")
a, b = api.create_anchor(graph), api.create_anchor(graph)
api.set_anchor_offset(a, 0)
api.set_anchor_offset(b, 1)
utterance = api.create_annotation(graph, a, b, "utterance")
api.set_feature(utterance, "speaker", "A")

print("before:")
show(api, utterance)

# A copy shares the anchors but owns its feature map.
duplicate = api.copy_annotation(utterance)
api.set_feature(duplicate, "speaker", "B")
print("\nafter copying and relabeling the copy:")
show(api, utterance)
show(api, duplicate)

# Split at the midpoint; both halves carry the original label data.
left, right = api.split_annotation(utterance)
print("\nafter splitting the original:")
show(api, left)
show(api, right)

# Four-way split of the copy: three fresh anchors at equal subdivisions.
pieces = api.nsplit_annotation(duplicate, 4)
print("\nafter a 4-way split of the copy:")
for piece in pieces:
    show(api, piece)

# The boundary anchors tile the original interval exactly.
spans = []
for piece in pieces:
    found = api.registry.resolve(piece)
    spans.append((found.parent.anchors[found.obj.start].offset,
                  found.parent.anchors[found.obj.end].offset))
assert spans[0][0] == 0 and spans[-1][1] == 1
assert all(left_span[1] == right_span[0] for left_span, right_span in zip(spans, spans[1:]))
print("\npieces tile [0, 1] exactly:", spans)
