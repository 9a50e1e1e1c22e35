"""
Component events, traffic logging, and deterministic replay
===========================================================

Annotation tools are loose federations of components (a table view, a
waveform view, a main program) that talk in named events with string
parameters.  The hub logs every event before delivering it, so a whole
session can be replayed later: same log, same final graph, byte for byte.
"""

import io

from agraph import events
from agraph.api import AnnotationGraphAPI
from agraph.events import EventMessage

# A "main program" component wired over one fresh graph.
api = AnnotationGraphAPI()
hub, editor = events.standard_session(api, clock=events.counting_clock())

# A table view that remembers what the main program answers.
answers = []
hub.register_component("table", answers.append, {"SetCurrentAnnotation", "Error"})

# The user creates a region annotation from the table...
hub.dispatch(EventMessage("CreateAnnotation", {"start": "0.5", "end": "1.25"}, source="table"))
created = answers[-1].params["AnnotationId"]
print("main answered with:", created)

# ...types into the current row...
hub.dispatch(EventMessage("SetFeature", {"feature": "text", "value": "hello"}, source="table"))

# ...and drags a new region in the waveform view, which re-anchors the
# current annotation (two offset updates) and forwards the region onward.
hub.dispatch(EventMessage("SetRegion", {"start": "0.6", "end": "1.5"},
                          source="waveform", target="main"))

# A mistake comes back as an Error event instead of blowing up the tool.
hub.dispatch(EventMessage("CreateAnnotation", {"start": "9", "end": "3"}, source="table"))
print("error answer:", answers[-1].params["error"])

print("\nthe session log:")
for line in hub.log_lines():
    print(" ", line.replace("\t", "  "))

# Replay the log twice over fresh graphs; the results agree exactly.
log = io.BytesIO()
hub.save_log(log)
renditions = []
for _ in range(2):
    fresh = AnnotationGraphAPI()
    fresh_hub, fresh_editor = events.standard_session(fresh)
    events.replay(events.read_log(log.getvalue()), fresh_hub)
    renditions.append(fresh.to_xml("AGSet1"))
assert renditions[0] == renditions[1] == api.to_xml("AGSet1")
print("\nreplayed twice: outputs byte-identical (%d bytes)" % len(renditions[0]))
