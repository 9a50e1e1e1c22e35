"""Annotation graph library.

Annotation graphs model linguistic annotation as labeled directed acyclic
graphs whose nodes (anchors) optionally carry time offsets.  The package
provides the identifier-keyed object API, file-format codecs with a
canonical XML interchange form, an event hub with deterministic replay,
and a command line front end (``agraph``).
"""

from . import errors
from .api import AnnotationGraphAPI, default_api
from .codecs import list_formats, load, store
from .compare import agsets_equal, graphs_equal
from .errors import AGError
from .events import EventMessage, Hub, decode_event, encode_event, replay, standard_session

__version__ = "0.1.0"

__all__ = [
    "AGError",
    "AnnotationGraphAPI",
    "EventMessage",
    "Hub",
    "agsets_equal",
    "decode_event",
    "default_api",
    "encode_event",
    "errors",
    "graphs_equal",
    "list_formats",
    "load",
    "replay",
    "standard_session",
    "store",
]
