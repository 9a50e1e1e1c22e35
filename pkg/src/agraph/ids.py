"""Fully-qualified string identifiers.

Every object is named by a colon-separated path: the first segment names
an AGSet, two segments name a Timeline or AG, three segments name a
Signal, Anchor or Annotation.  Because the path embeds the whole ancestry,
the ids of all ancestors fall out of the text alone, with no registry
lookup: ``"Timit:AG1:Anchor2"`` belongs to graph ``"Timit:AG1"`` inside
AGSet ``"Timit"``.
"""

import enum
import re
from dataclasses import dataclass

from .errors import MalformedId

# Segments stay safe inside XML attributes and tab-separated event logs.
_SEGMENT_RE = re.compile(r"[A-Za-z0-9_.\-]+\Z")

MAX_DEPTH = 3


class Kind(enum.Enum):
    """Object kinds, with the label used when generating child ids."""

    AGSET = "AGSet"
    TIMELINE = "Timeline"
    SIGNAL = "Signal"
    AG = "AG"
    ANCHOR = "Anchor"
    ANNOTATION = "Annotation"

    @property
    def label(self):
        return self.value


@dataclass(frozen=True)
class ParsedId:
    """Structural decomposition of an identifier string."""

    text: str
    segments: tuple
    ancestors: tuple

    @property
    def depth(self):
        return len(self.segments)

    @property
    def parent(self):
        return self.ancestors[-1] if self.ancestors else None


def parse_identifier(text):
    """Split identifier text into segments and ancestor prefixes.

    Pure function: performs no registry access.  Raises MalformedId for
    empty segments, embedded whitespace or other characters outside
    ``[A-Za-z0-9_.-]``, and for paths deeper than three segments.
    """
    if not isinstance(text, str) or text == "":
        raise MalformedId("identifier must be a non-empty string")
    segments = text.split(":")
    if len(segments) > MAX_DEPTH:
        raise MalformedId("identifier %r has more than %d segments" % (text, MAX_DEPTH))
    for seg in segments:
        if not _SEGMENT_RE.match(seg):
            raise MalformedId("identifier %r has an invalid segment %r" % (text, seg))
    ancestors = tuple(":".join(segments[:k]) for k in range(1, len(segments)))
    return ParsedId(text=text, segments=tuple(segments), ancestors=ancestors)


def is_well_formed(text):
    try:
        parse_identifier(text)
    except MalformedId:
        return False
    return True


def child_id(parent_text, segment):
    return segment if parent_text is None else parent_text + ":" + segment
