"""
Reading and writing corpus file formats
=======================================

Codecs turn concrete files into annotation graphs and back.  Loads build
graphs purely through the public API; stores emit canonical bytes, so
storing, reloading and storing again reproduces the file exactly.
"""

import io

from agraph import codecs
from agraph.api import AnnotationGraphAPI
from agraph.compare import graphs_equal

print("supported formats:")
for name, capability in codecs.list_formats():
    print("  %-8s %s" % (name, capability))

# --- sample-counted label lines (one word per line, 16 kHz) ----------------

wrd = b"""0 6160 she
6160 9360 had
9360 12640 your
12640 17720 dark
17720 22560 suit
"""
api = AnnotationGraphAPI()
(timit_ag,) = codecs.load(api, "TIMIT", wrd, target_agset_id="Timit")
print("\nTIMIT gave graph %s:" % timit_ag)
for ann_id in api.get_annotation_seq_by_offset(timit_ag):
    ann = api.registry.resolve(ann_id).obj
    ag = api.registry.resolve(timit_ag).parent.ags[timit_ag]
    lo = ag.anchors[ann.start].offset
    hi = ag.anchors[ann.end].offset
    print("  %-6s [%s, %s]s" % (ann.features["label"], lo, hi))

# Sample counts come back exactly: offset * rate is the original integer.
ag = api.registry.resolve(timit_ag).obj
assert all((a.offset * 16000) % 1 == 0 for a in ag.anchors.values())

# --- the XML interchange form ------------------------------------------------

aif_bytes = io.BytesIO()
codecs.store(api, "AIF", "Timit", aif_bytes)
print("\nas XML (first 3 lines):")
print("\n".join(aif_bytes.getvalue().decode().splitlines()[:3]))

# --- bracketed constituency parses -------------------------------------------

tree = b"(S (NP (DT the) (NN dog)) (VP (VBD ran)))"
api2 = AnnotationGraphAPI()
(tb_ag,) = codecs.load(api2, "TreeBank", tree)
out = io.BytesIO()
codecs.store(api2, "TreeBank", tb_ag, out)
print("\nTreeBank round trip:", out.getvalue().decode().strip())

# --- the tabular format is canonical ------------------------------------------
# TF rows carry id, type, offsets and features (anchor units are not part
# of the row grammar), so time-anchored graphs like the TIMIT one above
# survive a full round trip.

table = io.BytesIO()
codecs.store(api, "TF", timit_ag, table)
api3 = AnnotationGraphAPI()
(reloaded,) = codecs.load(api3, "TF", table.getvalue())
again = io.BytesIO()
codecs.store(api3, "TF", reloaded, again)
assert again.getvalue() == table.getvalue()
assert graphs_equal(
    api.registry.resolve(timit_ag).obj, api3.registry.resolve(reloaded).obj
)
print("\nTF store -> load -> store reproduced %d bytes exactly" % len(table.getvalue()))
