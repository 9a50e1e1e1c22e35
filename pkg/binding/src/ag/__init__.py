"""Flat, string-only scripting surface for annotation graphs.

Every function takes and returns plain strings, numbers or booleans; no
object handle ever crosses this boundary, so the same call sequences can
be driven from any host that can pass strings around.  Functions whose
result is a set or sequence of identifiers return them as one string
with the ids separated by spaces.

The module keeps no state of its own: all graphs live in the underlying
library's process-wide store, so reloading this module changes nothing.
Errors are the library's own exceptions; the exception class name is the
error name (NoSuchObject, DuplicateId, OrderViolation, ...).

Typical use::

    import ag

    agSetId = ag.CreateAGSet('Test')
    timelineId = ag.CreateTimeline(agSetId)
    agId = ag.CreateAG(agSetId, timelineId)
    anc1 = ag.CreateAnchor(agId)
    anc2 = ag.CreateAnchor(agId)
    ann1 = ag.CreateAnnotation(agId, anc1, anc2, "Word")
    ag.SetFeature(ann1, "English", "cat")
    print(ag.toXML(agId))
"""

from agraph import offsets as _offsets
from agraph.api import default_api as _default_api
from agraph.errors import BadArgument as _BadArgument
from agraph.ids import Kind as _Kind

__all__ = [
    "CreateAGSet", "CreateTimeline", "CreateSignal", "GetSignals", "CreateAG",
    "CreateAnchor", "SetAnchorOffset", "GetAnchorOffset", "CreateAnnotation",
    "CopyAnnotation", "SplitAnnotation", "NSplitAnnotation",
    "SetFeature", "GetFeature", "ExistsFeature", "DeleteFeature",
    "GetAnchorSet", "GetAnchorSetByOffset", "GetAnchorSetNearestOffset",
    "GetIncomingAnnotationSet", "GetOutgoingAnnotationSet",
    "GetAnnotationSetByOffset", "GetAnnotationSeqByOffset", "toXML",
    "Exists", "Delete",
    "ExistsAGSet", "ExistsTimeline", "ExistsSignal", "ExistsAG",
    "ExistsAnchor", "ExistsAnnotation",
    "DeleteAGSet", "DeleteTimeline", "DeleteSignal", "DeleteAG",
    "DeleteAnchor", "DeleteAnnotation",
]


def _ids(id_list):
    return " ".join(id_list)


# -- creation ---------------------------------------------------------------


def CreateAGSet(agSetId):
    return _default_api().create_agset(agSetId)


def CreateTimeline(id):
    return _default_api().create_timeline(id)


def CreateSignal(id, uri, mimeClass, mimeType, encoding, unit, track):
    return _default_api().create_signal(id, uri, mimeClass, mimeType, encoding, unit, track)


def GetSignals(timelineId):
    return _ids(_default_api().get_signals(timelineId))


def CreateAG(id, timelineId=None):
    return _default_api().create_ag(id, timelineId)


def CreateAnchor(id):
    return _default_api().create_anchor(id)


def SetAnchorOffset(anchorId, offset):
    _default_api().set_anchor_offset(anchorId, offset)


def GetAnchorOffset(anchorId):
    offset = _default_api().get_anchor_offset(anchorId)
    return "" if offset is None else _offsets.fmt(offset)


def CreateAnnotation(id, start, end, annotationType):
    return _default_api().create_annotation(id, start, end, annotationType)


def CopyAnnotation(annotationId):
    return _default_api().copy_annotation(annotationId)


def SplitAnnotation(annotationId):
    return _ids(_default_api().split_annotation(annotationId))


def NSplitAnnotation(annotationId, N):
    try:
        pieces = int(N)
    except (TypeError, ValueError):
        raise _BadArgument("N must be an integer, got %r" % (N,)) from None
    return _ids(_default_api().nsplit_annotation(annotationId, pieces))


# -- features -----------------------------------------------------------------


def SetFeature(id, featureName, featureValue):
    _default_api().set_feature(id, featureName, featureValue)


def GetFeature(id, featureName):
    return _default_api().get_feature(id, featureName)


def ExistsFeature(id, featureName):
    return _default_api().exists_feature(id, featureName)


def DeleteFeature(id, featureName):
    _default_api().delete_feature(id, featureName)


# -- queries --------------------------------------------------------------------


def GetAnchorSet(agId):
    return _ids(_default_api().get_anchor_set(agId))


def GetAnchorSetByOffset(agId, offset, epsilon=0):
    return _ids(_default_api().get_anchor_set_by_offset(agId, offset, epsilon))


def GetAnchorSetNearestOffset(agId, offset):
    return _ids(_default_api().get_anchor_set_nearest_offset(agId, offset))


def GetIncomingAnnotationSet(anchorId):
    return _ids(_default_api().get_incoming_annotation_set(anchorId))


def GetOutgoingAnnotationSet(anchorId):
    return _ids(_default_api().get_outgoing_annotation_set(anchorId))


def GetAnnotationSetByOffset(agId, offset):
    return _ids(_default_api().get_annotation_set_by_offset(agId, offset))


def GetAnnotationSeqByOffset(agId, begin=None, end=None):
    return _ids(_default_api().get_annotation_seq_by_offset(agId, begin, end))


def toXML(id):
    return _default_api().to_xml(id)


# -- existence and deletion, generic and per kind ---------------------------------


def Exists(id):
    return _default_api().exists(id)


def Delete(id):
    _default_api().delete(id)


def _exists_kind(id, kind):
    api = _default_api()
    with api.registry.lock:
        found = api.registry.try_resolve(id)
        return found is not None and found.kind is kind


def _delete_kind(id, kind):
    api = _default_api()
    with api.registry.lock:
        api.registry.expect(id, kind)
        api.delete(id)


def ExistsAGSet(agSetId):
    return _exists_kind(agSetId, _Kind.AGSET)


def ExistsTimeline(timelineId):
    return _exists_kind(timelineId, _Kind.TIMELINE)


def ExistsSignal(signalId):
    return _exists_kind(signalId, _Kind.SIGNAL)


def ExistsAG(agId):
    return _exists_kind(agId, _Kind.AG)


def ExistsAnchor(anchorId):
    return _exists_kind(anchorId, _Kind.ANCHOR)


def ExistsAnnotation(annotationId):
    return _exists_kind(annotationId, _Kind.ANNOTATION)


def DeleteAGSet(agSetId):
    _delete_kind(agSetId, _Kind.AGSET)


def DeleteTimeline(timelineId):
    _delete_kind(timelineId, _Kind.TIMELINE)


def DeleteSignal(signalId):
    _delete_kind(signalId, _Kind.SIGNAL)


def DeleteAG(agId):
    _delete_kind(agId, _Kind.AG)


def DeleteAnchor(anchorId):
    _delete_kind(anchorId, _Kind.ANCHOR)


def DeleteAnnotation(annotationId):
    _delete_kind(annotationId, _Kind.ANNOTATION)
