"""Inter-component event protocol with logging and deterministic replay.

Components exchange named events whose payload is an ordered map of
string parameters.  A hub routes events synchronously: an event targeted
at ``"hub"`` goes to every subscribed component except its source, in
registration order; an event targeted at a component name goes to that
component alone.  Every dispatched event is appended to the hub's log
first, so the log is a complete, ordered record of the session and can
be replayed later against freshly registered components.

Log records are single lines::

    seq TAB timestamp TAB source TAB target TAB name TAB k1=v1 TAB k2=v2 ...

with ``%``, tab, newline, carriage return and ``=`` percent-escaped
(%25 %09 %0A %0D %3D) inside every string field, so decoding inverts
encoding exactly.
"""

import time
from dataclasses import dataclass, field, replace
from decimal import Decimal, InvalidOperation

from . import offsets
from .api import AnnotationGraphAPI
from .errors import (
    AGError,
    BadArgument,
    DecodeError,
    DuplicateComponent,
    SchemaError,
)
from .ids import Kind

HUB_TARGET = "hub"

#: Core event vocabulary and the parameters each event must carry.
CORE_EVENTS = {
    "CreateAnnotation": ("start", "end"),
    "DeleteAnnotation": ("AnnotationId",),
    "SetFeature": ("feature", "value"),
    "SetRegion": ("start", "end"),
    "GetRegion": (),
    "SetCurrentAnnotation": ("AnnotationId",),
    "Play": ("start", "end"),
    "Stop": (),
}


@dataclass
class EventMessage:
    name: str
    params: dict = field(default_factory=dict)
    source: str = ""
    target: str = HUB_TARGET
    seq: int | None = None
    timestamp: Decimal | None = None


_ESCAPES = [("%", "%25"), ("\t", "%09"), ("\n", "%0A"), ("\r", "%0D"), ("=", "%3D")]


def _escape(value):
    for raw, escaped in _ESCAPES:
        value = value.replace(raw, escaped)
    return value


def _unescape(value):
    out = []
    i = 0
    while i < len(value):
        ch = value[i]
        if ch != "%":
            out.append(ch)
            i += 1
            continue
        code = value[i + 1 : i + 3]
        for raw, escaped in _ESCAPES:
            if escaped[1:] == code:
                out.append(raw)
                break
        else:
            raise DecodeError("bad escape %%%s" % code)
        i += 3
    return "".join(out)


def encode_event(event):
    """One log line (without newline) for a stamped event."""
    if event.seq is None or event.timestamp is None:
        raise BadArgument("event must carry seq and timestamp to be encoded")
    cells = [
        str(event.seq),
        offsets.fmt(event.timestamp),
        _escape(event.source),
        _escape(event.target),
        _escape(event.name),
    ]
    for name, value in event.params.items():
        cells.append("%s=%s" % (_escape(name), _escape(value)))
    return "\t".join(cells)


def decode_event(line, schema=None):
    """Parse one log line back into an EventMessage.

    ``schema`` maps known event names to their required parameters and
    defaults to the core vocabulary; unknown names and missing required
    parameters raise SchemaError, structural problems raise DecodeError.
    """
    line = line.rstrip("\n")
    if "\n" in line:
        raise DecodeError("a record is a single line")
    cells = line.split("\t")
    if len(cells) < 5:
        raise DecodeError("record needs seq, timestamp, source, target and name")
    try:
        seq = int(cells[0])
    except ValueError:
        raise DecodeError("bad sequence number %r" % cells[0]) from None
    try:
        timestamp = Decimal(cells[1])
    except InvalidOperation:
        raise DecodeError("bad timestamp %r" % cells[1]) from None
    if not timestamp.is_finite():
        raise DecodeError("bad timestamp %r" % cells[1])
    source = _unescape(cells[2])
    target = _unescape(cells[3])
    name = _unescape(cells[4])
    params = {}
    for cell in cells[5:]:
        key, sep, value = cell.partition("=")
        if not sep:
            raise DecodeError("parameter cell %r has no '='" % cell)
        name_text = _unescape(key)
        if name_text in params:
            raise DecodeError("duplicate parameter %r" % name_text)
        params[name_text] = _unescape(value)
    event = EventMessage(
        name=name, params=params, source=source, target=target, seq=seq, timestamp=timestamp
    )
    _check_schema(event, schema if schema is not None else CORE_EVENTS)
    return event


def _check_schema(event, schema):
    required = schema.get(event.name)
    if required is None:
        raise SchemaError("unknown event name %r" % event.name)
    for param in required:
        if param not in event.params:
            raise SchemaError("event %s is missing required parameter %r" % (event.name, param))


def wall_clock():
    return offsets.quantize(Decimal(repr(time.time())))


def counting_clock(step="0.001"):
    """Deterministic clock for reproducible logs: 0, step, 2*step, ..."""
    tick = Decimal(step)
    state = {"now": Decimal(0)}

    def clock():
        now = state["now"]
        state["now"] = now + tick
        return now

    return clock


class Hub:
    """Sequential event router with an append-only traffic log.

    A hub is single-threaded by contract: all dispatches on one hub are
    totally ordered, which is what makes replay deterministic.
    """

    def __init__(self, clock=None):
        self._clock = clock if clock is not None else wall_clock
        self._components = {}  # name -> (handler, subscriptions), registration order
        self.schema = dict(CORE_EVENTS)
        self.log = []
        self._next_seq = 1

    def register_component(self, name, handler, subscriptions=()):
        if not name or name == HUB_TARGET:
            raise BadArgument("component name must be non-empty and not %r" % HUB_TARGET)
        if name in self._components:
            raise DuplicateComponent("component %r is already registered" % name)
        self._components[name] = (handler, frozenset(subscriptions))

    def register_event(self, name, required_params=()):
        """Admit an extension event name into this hub's vocabulary."""
        if not name:
            raise BadArgument("event name must be non-empty")
        self.schema[name] = tuple(required_params)

    def dispatch(self, event):
        """Log the event, deliver it synchronously, return the delivery count.

        Hub-targeted events go to each subscribed component except the
        source, in registration order; component-targeted events go to
        that component alone (never back to the source).
        """
        _check_schema(event, self.schema)
        stamped = replace(event, seq=self._next_seq, timestamp=self._clock())
        self._next_seq += 1
        self.log.append(stamped)
        delivered = 0
        if stamped.target == HUB_TARGET:
            for name, (handler, subscriptions) in list(self._components.items()):
                if name != stamped.source and stamped.name in subscriptions:
                    handler(stamped)
                    delivered += 1
        else:
            entry = self._components.get(stamped.target)
            if entry is not None and stamped.target != stamped.source:
                entry[0](stamped)
                delivered += 1
        return delivered

    def log_lines(self):
        return [encode_event(event) for event in self.log]

    def save_log(self, sink):
        text = "".join(line + "\n" for line in self.log_lines())
        sink.write(text.encode("utf-8"))


def read_log(source):
    """Log lines from bytes or a binary stream, newline-terminated records."""
    data = source if isinstance(source, bytes) else source.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DecodeError("log is not valid UTF-8: %s" % exc) from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def replay(lines, hub):
    """Re-dispatch recorded events through a hub, in recorded order.

    Records must carry strictly increasing sequence numbers.  Each event
    is re-dispatched with its recorded payload and freshly stamped by the
    hub, so with deterministic handlers the final state is identical on
    every replay.  Returns the number of events replayed.
    """
    last_seq = 0
    count = 0
    for line in lines:
        event = decode_event(line, hub.schema)
        if event.seq <= last_seq:
            raise DecodeError(
                "sequence number %d after %d is not increasing" % (event.seq, last_seq)
            )
        last_seq = event.seq
        hub.dispatch(
            EventMessage(
                name=event.name,
                params=dict(event.params),
                source=event.source,
                target=event.target,
            )
        )
        count += 1
    return count


class EditorComponent:
    """Headless stand-in for an annotation tool's main program.

    Holds the current region and current annotation, applies editing
    events to one annotation graph through the string API, and answers
    with events: a successful CreateAnnotation is acknowledged with a
    SetCurrentAnnotation carrying the fresh id back to the requesting
    component, errors come back as ``Error`` events instead of raising,
    so a replayed session never aborts halfway.
    """

    def __init__(self, api, ag_id, name="main"):
        self.api = api
        self.ag_id = ag_id
        self.name = name
        self.hub = None
        self.current_annotation = None
        self.region = (Decimal(0), Decimal(0))

    def attach(self, hub):
        hub.register_component(self.name, self.handle, set(CORE_EVENTS))
        hub.register_event("Error", ("error", "message"))
        self.hub = hub

    # -- event entry point ---------------------------------------------

    def handle(self, event):
        try:
            handler = getattr(self, "_on_" + _snake(event.name), None)
            if handler is not None:
                handler(event)
        except AGError as exc:
            self._respond(
                event,
                "Error",
                {
                    "error": type(exc).__name__,
                    "message": str(exc),
                    "request": event.name,
                },
            )

    def _respond(self, event, name, params):
        message = EventMessage(name=name, params=params, source=self.name, target=event.source)
        if self.hub is not None:
            self.hub.dispatch(message)
        return message

    # -- handlers ---------------------------------------------------------

    def handle_create_annotation(self, event):
        """The annotation-creation callback flow.

        Creates the two anchors, sets their offsets, creates the
        annotation, and returns (and dispatches) the acknowledgement
        event carrying the new id and its offsets.
        """
        start = offsets.to_decimal(event.params["start"], nonnegative=True, what="start")
        end = offsets.to_decimal(event.params["end"], nonnegative=True, what="end")
        a_start = self.api.create_anchor(self.ag_id)
        try:
            self.api.set_anchor_offset(a_start, start)
            a_end = self.api.create_anchor(self.ag_id)
            try:
                self.api.set_anchor_offset(a_end, end)
                ann_id = self.api.create_annotation(
                    self.ag_id, a_start, a_end, event.params.get("type", "Word")
                )
            except AGError:
                self.api.delete(a_end)
                raise
        except AGError:
            self.api.delete(a_start)
            raise
        self.current_annotation = ann_id
        return self._respond(
            event,
            "SetCurrentAnnotation",
            {"AnnotationId": ann_id, "start": offsets.fmt(start), "end": offsets.fmt(end)},
        )

    _on_create_annotation = handle_create_annotation

    def _on_delete_annotation(self, event):
        ann_id = event.params["AnnotationId"]
        self.api.delete(ann_id)
        if self.current_annotation == ann_id:
            self.current_annotation = None

    def _on_set_feature(self, event):
        if self.current_annotation is None:
            raise BadArgument("no current annotation to set a feature on")
        self.api.set_feature(
            self.current_annotation, event.params["feature"], event.params["value"]
        )

    def _on_set_region(self, event):
        start = offsets.to_decimal(event.params["start"], nonnegative=True, what="start")
        end = offsets.to_decimal(event.params["end"], nonnegative=True, what="end")
        if start > end:
            raise BadArgument("region start %s is after its end %s" % (start, end))
        self.region = (start, end)
        if self.current_annotation is not None and self.api.exists(self.current_annotation):
            ann = self.api.registry.expect(self.current_annotation, Kind.ANNOTATION).obj
            old_start = self.api.get_anchor_offset(ann.start)
            # Order the two updates so the interval never inverts midway.
            if old_start is None or end >= old_start:
                self.api.set_anchor_offset(ann.end, end)
                self.api.set_anchor_offset(ann.start, start)
            else:
                self.api.set_anchor_offset(ann.start, start)
                self.api.set_anchor_offset(ann.end, end)
        if self.hub is not None:
            self.hub.dispatch(
                EventMessage(
                    name="SetRegion",
                    params={"start": offsets.fmt(start), "end": offsets.fmt(end)},
                    source=self.name,
                    target=HUB_TARGET,
                )
            )

    def _on_get_region(self, event):
        self._respond(
            event,
            "SetRegion",
            {"start": offsets.fmt(self.region[0]), "end": offsets.fmt(self.region[1])},
        )

    def _on_set_current_annotation(self, event):
        ann_id = event.params["AnnotationId"]
        if not self.api.exists(ann_id):
            raise BadArgument("no annotation %r to select" % ann_id)
        self.current_annotation = ann_id

    # Play and Stop are routed and logged but have no registry effect.


def _snake(name):
    out = []
    for i, ch in enumerate(name):
        if ch.isupper() and i > 0:
            out.append("_")
        out.append(ch.lower())
    return "".join(out)


def standard_session(api=None, agset_id="AGSet1", clock=None):
    """A hub wired to a fresh editor over one graph; returns (hub, editor).

    Builds AGSet ``agset_id`` (if missing) with one generated graph, which
    is what the command-line replay drives.
    """
    if api is None:
        api = AnnotationGraphAPI()
    if not api.exists(agset_id):
        api.create_agset(agset_id)
    ag_id = api.create_ag(agset_id)
    hub = Hub(clock)
    editor = EditorComponent(api, ag_id)
    editor.attach(hub)
    return hub, editor
