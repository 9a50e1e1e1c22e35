"""
The flat scripting surface
==========================

The ``ag`` module (installed from binding/) exposes the whole API as flat
functions over strings: ids in, ids out, id lists as space-separated
strings.  This is the layer a scripting host or embedded interpreter
talks to; nothing but strings, numbers and booleans ever crosses it.
"""

try:
    import ag
except ImportError:
    raise SystemExit("install the binding first:  pip install -e ./binding")

if ag.Exists("Session"):
    ag.Delete("Session")

agSetId = ag.CreateAGSet('Session')
timelineId = ag.CreateTimeline(agSetId)
agId = ag.CreateAG(agSetId, timelineId)
anc1 = ag.CreateAnchor(agId)
anc2 = ag.CreateAnchor(agId)
ag.SetAnchorOffset(anc1, 0.25)
ag.SetAnchorOffset(anc2, 1.75)
ann1 = ag.CreateAnnotation(agId, anc1, anc2, "Word")
ag.SetFeature(ann1, "English", "cat")
ag.SetFeature(ann1, "Japanese", "neko")

print("anchors:       ", ag.GetAnchorSet(agId))          # space-joined ids
print("offset of anc1:", ag.GetAnchorOffset(anc1))       # canonical string
print("has English?   ", ag.ExistsFeature(ann1, "English"))
print("split returns: ", ag.SplitAnnotation(ann1))

print("\nthe XML for the whole session:")
print(ag.toXML(agSetId), end="")
