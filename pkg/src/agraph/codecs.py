"""File-format codecs.

Each codec converts between one concrete file format and annotation
graphs, building graphs exclusively through the public API.  Formats and
their directions:

======== ============ ====================================================
name     capabilities notes
======== ============ ====================================================
AIF      load/store   the XML interchange format (see :mod:`agraph.aif`)
LCF      load/store   ``start end speaker: text`` utterance lines
TF       load/store   tab-separated table, one row per annotation
TIMIT    load         ``begin end label`` sample-counted lines
TreeBank load/store   bracketed constituency parses
xlabel   load         ``time color label`` lines after a ``#`` header
======== ============ ====================================================

Every loader parses the whole input before touching the registry, so a
ParseError never leaves a partially loaded AGSet behind; when
materialization itself fails, everything the load created is deleted
again before the error propagates.

Text-format profiles (normative for this library):

* TF starts with the header line ``#AGTK-TF 1``.  Rows are
  ``annotation TAB type TAB start TAB end TAB name=value...`` where
  ``annotation`` is the final id segment and ``-`` marks an unanchored
  endpoint.  ``%``, tab, newline, carriage return and ``=`` inside
  fields are percent-escaped (%25 %09 %0A %0D %3D).
* LCF lines carry decimal seconds; the speaker becomes feature
  ``speaker``, the remainder feature ``text``, annotations get type
  ``utterance``.  Endpoints at equal offsets share one anchor.
* TIMIT lines carry integer sample counts converted through the
  ``sampleRate`` option (default 16000); labels become feature
  ``label`` on annotations typed by the ``type`` option (default
  ``word``).  Consecutive lines sharing a boundary sample share the
  anchor.
* xlabel labels end at their own time and start at the previous line's
  time (0 for the first); fields become features ``color`` and
  ``label`` on annotations of type ``label``.
* TreeBank anchors sit at token indices with unit ``tokens``;
  constituents become type ``syntax`` with feature ``tag``, terminals
  type ``word`` with feature ``text``.
"""

from decimal import Decimal, InvalidOperation

from . import aif, offsets
from .errors import BadArgument, CapabilityError, ParseError, UnknownFormat
from .ids import Kind

TIMIT_DEFAULT_SAMPLE_RATE = 16000


def _read_text(source, what):
    if isinstance(source, bytes):
        data = source
    else:
        data = source.read()
        if isinstance(data, str):
            data = data.encode("utf-8")
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError("%s is not valid UTF-8: %s" % (what, exc)) from None


def _write_text(sink, text):
    sink.write(text.encode("utf-8"))


class Codec:
    """Base class: declares the load/store interface for one format."""

    name = ""
    can_load = False
    can_store = False

    def load(self, api, source, target_agset_id=None, options=None):
        raise CapabilityError("format %s cannot load" % self.name)

    def store(self, api, obj_id, sink, options=None):
        raise CapabilityError("format %s cannot store" % self.name)


class _LoadContext:
    """Target AGSet handling plus rollback for failed materialization."""

    def __init__(self, api, target_agset_id):
        self.api = api
        if target_agset_id is None:
            with api.registry.lock:
                self.agset_id = api.registry.generate_id(None, Kind.AGSET)
                api.create_agset(self.agset_id)
            self.created_agset = True
        elif api.exists(target_agset_id):
            self.agset_id = target_agset_id
            self.created_agset = False
        else:
            api.create_agset(target_agset_id)
            self.agset_id = target_agset_id
            self.created_agset = True
        self.ag_ids = []

    def new_ag(self):
        ag_id = self.api.create_ag(self.agset_id)
        self.ag_ids.append(ag_id)
        return ag_id

    def rollback(self):
        for ag_id in reversed(self.ag_ids):
            if self.api.exists(ag_id):
                self.api.delete(ag_id)
        if self.created_agset and self.api.exists(self.agset_id):
            self.api.delete(self.agset_id)


def _run_load(api, target_agset_id, build):
    context = _LoadContext(api, target_agset_id)
    try:
        build(context)
    except Exception:
        context.rollback()
        raise
    return context.ag_ids


class _AnchorPool:
    """Offset-keyed anchor sharing within one graph being loaded.

    A zero-width annotation gets a private end anchor (self-loops are
    not representable), which is also left out of the pool so the
    procedure stays deterministic in line order.
    """

    def __init__(self, api, ag_id, unit=None):
        self.api = api
        self.ag_id = ag_id
        self.unit = unit
        self.by_offset = {}

    def shared(self, offset):
        anchor_id = self.by_offset.get(offset)
        if anchor_id is None:
            anchor_id = self.fresh(offset)
            self.by_offset[offset] = anchor_id
        return anchor_id

    def fresh(self, offset=None):
        anchor_id = self.api.create_anchor(self.ag_id, unit=self.unit)
        if offset is not None:
            self.api.set_anchor_offset(anchor_id, offset)
        return anchor_id

    def endpoints(self, start_offset, end_offset):
        start = self.shared(start_offset)
        if end_offset == start_offset:
            return start, self.fresh(end_offset)
        return start, self.shared(end_offset)


def _annotation_rows(api, ag_id):
    """Annotations of one AG in canonical (start, end, id) order."""
    found = api.registry.expect(ag_id, Kind.AG)
    ag = found.obj
    return ag, sorted(ag.annotations.values(), key=lambda a: aif._annotation_sort_key(ag, a))


def _decimal_field(text, what, line_no):
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise ParseError("%s %r is not a decimal number" % (what, text), line_no) from None
    if not value.is_finite():
        raise ParseError("%s %r is not finite" % (what, text), line_no)
    return offsets.quantize(value)


# ---------------------------------------------------------------------------
# AIF
# ---------------------------------------------------------------------------


class AifCodec(Codec):
    name = "AIF"
    can_load = True
    can_store = True

    def load(self, api, source, target_agset_id=None, options=None):
        doc = aif.parse_document(_read_text(source, "AIF input"))
        return aif.materialize(api, doc, target_agset_id)

    def store(self, api, obj_id, sink, options=None):
        _write_text(sink, api.to_xml(obj_id))


# ---------------------------------------------------------------------------
# TF (table format)
# ---------------------------------------------------------------------------

TF_HEADER = "#AGTK-TF 1"

_TF_ESCAPES = [("%", "%25"), ("\t", "%09"), ("\n", "%0A"), ("\r", "%0D"), ("=", "%3D")]


def _tf_escape(value):
    for raw, escaped in _TF_ESCAPES:
        value = value.replace(raw, escaped)
    return value


def _tf_unescape(value, line_no):
    out = []
    i = 0
    while i < len(value):
        ch = value[i]
        if ch != "%":
            out.append(ch)
            i += 1
            continue
        code = value[i + 1 : i + 3]
        for raw, escaped in _TF_ESCAPES:
            if escaped[1:] == code:
                out.append(raw)
                break
        else:
            raise ParseError("bad escape %%%s" % code, line_no)
        i += 3
    return "".join(out)


class TfCodec(Codec):
    name = "TF"
    can_load = True
    can_store = True

    def load(self, api, source, target_agset_id=None, options=None):
        text = _read_text(source, "TF input")
        lines = text.split("\n")
        if not lines or lines[0].rstrip("\r") != TF_HEADER:
            raise ParseError("missing TF header line %r" % TF_HEADER, 1)
        rows = []
        for line_no, line in enumerate(lines[1:], start=2):
            line = line.rstrip("\r")
            if line == "":
                continue
            cells = line.split("\t")
            if len(cells) < 4:
                raise ParseError("TF row needs at least 4 columns", line_no)
            local = _tf_unescape(cells[0], line_no)
            ann_type = _tf_unescape(cells[1], line_no)
            start = None if cells[2] == "-" else _decimal_field(cells[2], "start", line_no)
            end = None if cells[3] == "-" else _decimal_field(cells[3], "end", line_no)
            features = []
            for cell in cells[4:]:
                name, sep, value = cell.partition("=")
                if not sep:
                    raise ParseError("feature column without '='", line_no)
                features.append((_tf_unescape(name, line_no), _tf_unescape(value, line_no)))
            rows.append((local, ann_type, start, end, features))

        def build(context):
            ag_id = context.new_ag()
            pool = _AnchorPool(api, ag_id)
            for local, ann_type, start, end, features in rows:
                if start is not None and end is not None:
                    a_start, a_end = pool.endpoints(start, end)
                else:
                    a_start = pool.fresh(start) if start is not None else pool.fresh()
                    a_end = pool.fresh(end) if end is not None else pool.fresh()
                local_segment = local.rpartition(":")[2]
                ann_id = api.create_annotation(
                    ag_id + ":" + local_segment, a_start, a_end, ann_type
                )
                for name, value in features:
                    api.set_feature(ann_id, name, value)

        return _run_load(api, target_agset_id, build)

    def store(self, api, obj_id, sink, options=None):
        with api.registry.lock:
            ag, rows = _annotation_rows(api, obj_id)
            lines = [TF_HEADER]
            for ann in rows:
                start = ag.anchors[ann.start].offset
                end = ag.anchors[ann.end].offset
                cells = [
                    _tf_escape(ann.id.rpartition(":")[2]),
                    _tf_escape(ann.type),
                    offsets.fmt(start) if start is not None else "-",
                    offsets.fmt(end) if end is not None else "-",
                ]
                for name in sorted(ann.features):
                    cells.append("%s=%s" % (_tf_escape(name), _tf_escape(ann.features[name])))
                lines.append("\t".join(cells))
        _write_text(sink, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# LCF (utterance lines)
# ---------------------------------------------------------------------------


class LcfCodec(Codec):
    name = "LCF"
    can_load = True
    can_store = True

    def load(self, api, source, target_agset_id=None, options=None):
        text = _read_text(source, "LCF input")
        rows = []
        for line_no, line in enumerate(text.split("\n"), start=1):
            line = line.rstrip("\r")
            if line.strip() == "":
                continue
            pieces = line.split(None, 2)
            if len(pieces) < 3:
                raise ParseError("utterance line needs start, end and 'speaker: text'", line_no)
            start = _decimal_field(pieces[0], "start", line_no)
            end = _decimal_field(pieces[1], "end", line_no)
            if start > end:
                raise ParseError("start %s is after end %s" % (start, end), line_no)
            speaker, sep, spoken = pieces[2].partition(":")
            if not sep:
                raise ParseError("missing ':' after the speaker field", line_no)
            if spoken.startswith(" "):
                spoken = spoken[1:]
            rows.append((start, end, speaker, spoken))

        def build(context):
            ag_id = context.new_ag()
            pool = _AnchorPool(api, ag_id)
            for start, end, speaker, spoken in rows:
                a_start, a_end = pool.endpoints(start, end)
                ann_id = api.create_annotation(ag_id, a_start, a_end, "utterance")
                api.set_feature(ann_id, "speaker", speaker)
                api.set_feature(ann_id, "text", spoken)

        return _run_load(api, target_agset_id, build)

    def store(self, api, obj_id, sink, options=None):
        with api.registry.lock:
            ag, rows = _annotation_rows(api, obj_id)
            lines = []
            for ann in rows:
                start = ag.anchors[ann.start].offset
                end = ag.anchors[ann.end].offset
                if start is None or end is None:
                    raise BadArgument(
                        "annotation %r has an unanchored endpoint; not representable" % ann.id
                    )
                speaker = ann.features.get("speaker", "")
                spoken = ann.features.get("text", "")
                for value in (speaker, spoken):
                    if "\n" in value or "\r" in value:
                        raise BadArgument("annotation %r has multi-line text" % ann.id)
                if ":" in speaker:
                    raise BadArgument("annotation %r has ':' in its speaker" % ann.id)
                lines.append(
                    "%s %s %s: %s" % (offsets.fmt(start), offsets.fmt(end), speaker, spoken)
                )
        _write_text(sink, "\n".join(lines) + ("\n" if lines else ""))


# ---------------------------------------------------------------------------
# TIMIT (sample-counted label lines)
# ---------------------------------------------------------------------------


class TimitCodec(Codec):
    name = "TIMIT"
    can_load = True

    def load(self, api, source, target_agset_id=None, options=None):
        options = options or {}
        rate = options.get("sampleRate", TIMIT_DEFAULT_SAMPLE_RATE)
        try:
            rate = int(rate)
        except (TypeError, ValueError):
            raise BadArgument("sampleRate must be an integer, got %r" % (rate,)) from None
        if rate <= 0:
            raise BadArgument("sampleRate must be positive, got %r" % (rate,))
        ann_type = options.get("type", "word")
        text = _read_text(source, "TIMIT input")
        rows = []
        for line_no, line in enumerate(text.split("\n"), start=1):
            line = line.rstrip("\r").strip()
            if line == "":
                continue
            pieces = line.split(None, 2)
            if len(pieces) < 3:
                raise ParseError("label line needs begin, end and a label", line_no)
            if not pieces[0].isdigit() or not pieces[1].isdigit():
                raise ParseError("sample counts must be non-negative integers", line_no)
            begin, end = int(pieces[0]), int(pieces[1])
            if begin > end:
                raise ParseError("begin sample %d is after end sample %d" % (begin, end), line_no)
            rows.append((begin, end, pieces[2]))

        divisor = Decimal(rate)

        def build(context):
            ag_id = context.new_ag()
            prev_anchor = None
            prev_sample = None
            for begin, end, label in rows:
                if prev_anchor is not None and prev_sample == begin:
                    a_start = prev_anchor
                else:
                    a_start = api.create_anchor(ag_id)
                    api.set_anchor_offset(a_start, offsets.quantize(Decimal(begin) / divisor))
                a_end = api.create_anchor(ag_id)
                api.set_anchor_offset(a_end, offsets.quantize(Decimal(end) / divisor))
                ann_id = api.create_annotation(ag_id, a_start, a_end, ann_type)
                api.set_feature(ann_id, "label", label)
                prev_anchor = a_end
                prev_sample = end

        return _run_load(api, target_agset_id, build)


# ---------------------------------------------------------------------------
# xlabel
# ---------------------------------------------------------------------------


class XlabelCodec(Codec):
    name = "xlabel"
    can_load = True

    def load(self, api, source, target_agset_id=None, options=None):
        text = _read_text(source, "xlabel input")
        lines = text.split("\n")
        body_start = None
        for line_no, line in enumerate(lines, start=1):
            if line.rstrip("\r").strip() == "#":
                body_start = line_no
                break
        if body_start is None:
            raise ParseError("missing '#' header separator line")
        rows = []
        previous = Decimal(0)
        for line_no, line in enumerate(lines[body_start:], start=body_start + 1):
            line = line.rstrip("\r").strip()
            if line == "":
                continue
            pieces = line.split(None, 2)
            if len(pieces) < 2:
                raise ParseError("label line needs a time and a color field", line_no)
            time = _decimal_field(pieces[0], "time", line_no)
            if time < 0:
                raise ParseError("time %s is negative" % time, line_no)
            if time < previous:
                raise ParseError("time %s goes backwards" % time, line_no)
            previous = time
            rows.append((time, pieces[1], pieces[2] if len(pieces) > 2 else ""))

        def build(context):
            ag_id = context.new_ag()
            prev_anchor = api.create_anchor(ag_id)
            api.set_anchor_offset(prev_anchor, 0)
            for time, color, label in rows:
                a_end = api.create_anchor(ag_id)
                api.set_anchor_offset(a_end, time)
                ann_id = api.create_annotation(ag_id, prev_anchor, a_end, "label")
                api.set_feature(ann_id, "color", color)
                api.set_feature(ann_id, "label", label)
                prev_anchor = a_end

        return _run_load(api, target_agset_id, build)


# ---------------------------------------------------------------------------
# TreeBank (bracketed parses)
# ---------------------------------------------------------------------------


class _TreeNode:
    __slots__ = ("label", "children", "start", "end")

    def __init__(self, label):
        self.label = label
        self.children = []  # _TreeNode or (token string, index placeholder)
        self.start = None
        self.end = None


def _tokenize_sexpr(text):
    tokens = []
    line = 1
    column = 1
    atom = []
    atom_pos = None
    for ch in text:
        if ch in "()" or ch.isspace():
            if atom:
                tokens.append(("".join(atom), atom_pos))
                atom = []
            if ch in "()":
                tokens.append((ch, (line, column)))
        else:
            if not atom:
                atom_pos = (line, column)
            atom.append(ch)
        if ch == "\n":
            line += 1
            column = 1
        else:
            column += 1
    if atom:
        tokens.append(("".join(atom), atom_pos))
    return tokens


def _parse_trees(text):
    tokens = _tokenize_sexpr(text)
    pos = 0

    def need(what):
        raise ParseError(
            "unexpected end of input, expected %s" % what,
            *(tokens[-1][1] if tokens else (0, 0)),
        )

    def parse_node(top_level):
        nonlocal pos
        open_tok, open_at = tokens[pos]
        pos += 1
        if pos >= len(tokens):
            need("a label or '('")
        label = None
        if tokens[pos][0] not in ("(", ")"):
            label = tokens[pos][0]
            pos += 1
        node = _TreeNode(label)
        while pos < len(tokens) and tokens[pos][0] != ")":
            tok, at = tokens[pos]
            if tok == "(":
                node.children.append(parse_node(False))
            else:
                node.children.append(tok)
                pos += 1
        if pos >= len(tokens):
            raise ParseError("unbalanced '('", *open_at)
        pos += 1  # consume ')'
        if not node.children:
            raise ParseError("constituent with no children", *open_at)
        if label is None:
            if top_level and all(isinstance(c, _TreeNode) for c in node.children):
                return node.children  # transparent wrapper around whole parses
            raise ParseError("constituent without a label", *open_at)
        return node

    trees = []
    while pos < len(tokens):
        tok, at = tokens[pos]
        if tok != "(":
            raise ParseError("expected '(', got %r" % tok, *at)
        parsed = parse_node(True)
        if isinstance(parsed, list):
            trees.extend(parsed)
        else:
            trees.append(parsed)
    return trees


def _index_tree(node, counter):
    node.start = counter[0]
    for i, child in enumerate(node.children):
        if isinstance(child, _TreeNode):
            _index_tree(child, counter)
        else:
            counter[0] += 1
    node.end = counter[0]


class TreebankCodec(Codec):
    name = "TreeBank"
    can_load = True
    can_store = True

    def load(self, api, source, target_agset_id=None, options=None):
        trees = _parse_trees(_read_text(source, "TreeBank input"))
        if not trees:
            raise ParseError("no parse trees in input")

        def build(context):
            for tree in trees:
                counter = [0]
                _index_tree(tree, counter)
                ag_id = context.new_ag()
                anchors = {}
                for index in range(counter[0] + 1):
                    anchor_id = api.create_anchor(ag_id, unit="tokens")
                    api.set_anchor_offset(anchor_id, index)
                    anchors[index] = anchor_id
                words = []

                def emit(node):
                    ann_id = api.create_annotation(
                        ag_id, anchors[node.start], anchors[node.end], "syntax"
                    )
                    api.set_feature(ann_id, "tag", node.label)
                    token_index = node.start
                    for child in node.children:
                        if isinstance(child, _TreeNode):
                            emit(child)
                            token_index = child.end
                        else:
                            words.append((token_index, child))
                            token_index += 1

                emit(tree)
                for index, token in words:
                    ann_id = api.create_annotation(
                        ag_id, anchors[index], anchors[index + 1], "word"
                    )
                    api.set_feature(ann_id, "text", token)

        return _run_load(api, target_agset_id, build)

    def store(self, api, obj_id, sink, options=None):
        with api.registry.lock:
            text = self._linearize_ag(api, obj_id)
        _write_text(sink, text)

    def _linearize_ag(self, api, ag_id):
        found = api.registry.expect(ag_id, Kind.AG)
        ag = found.obj
        syntax = []
        words = {}
        for ann in ag.annotations.values():
            start = self._token_index(ag, ann.start, ann.id)
            end = self._token_index(ag, ann.end, ann.id)
            if ann.type == "syntax":
                syntax.append((start, -end, _suffix_number(ann.id), ann.id, ann))
            elif ann.type == "word":
                if end != start + 1:
                    raise BadArgument("word %r must span exactly one token" % ann.id)
                if start in words:
                    raise BadArgument("token %d is covered twice" % start)
                words[start] = ann.features.get("text", "")
            else:
                raise BadArgument("annotation %r has type %r; expected syntax or word" % (ann.id, ann.type))
        if not syntax:
            raise BadArgument("graph %r has no syntax annotations" % ag_id)
        syntax.sort()
        roots = []
        stack = []
        for start, neg_end, _suffix, _ann_id, ann in syntax:
            node = _TreeNode(ann.features.get("tag", ""))
            node.start, node.end = start, -neg_end
            while stack and not (stack[-1].start <= node.start and node.end <= stack[-1].end):
                stack.pop()
            if stack:
                stack[-1].children.append(node)
            else:
                roots.append(node)
            stack.append(node)
        for index in sorted(words):
            home = None
            for root in roots:
                if root.start <= index and index + 1 <= root.end:
                    home = root
                    break
            if home is None:
                raise BadArgument("token %d is outside every constituent" % index)
            descended = True
            while descended:
                descended = False
                for child in home.children:
                    if isinstance(child, _TreeNode) and child.start <= index < child.end:
                        home = child
                        descended = True
                        break
            home.children.append((index, words[index]))
        lines = [self._render(root, words) for root in sorted(roots, key=lambda r: r.start)]
        return "\n".join(lines) + "\n"

    def _render(self, node, words):
        parts = []
        ordered = sorted(
            node.children,
            key=lambda c: c.start if isinstance(c, _TreeNode) else c[0],
        )
        for child in ordered:
            if isinstance(child, _TreeNode):
                parts.append(self._render(child, words))
            else:
                parts.append(child[1])
        if not parts:
            raise BadArgument("constituent %r covers no tokens" % node.label)
        return "(%s %s)" % (node.label, " ".join(parts))

    @staticmethod
    def _token_index(ag, anchor_id, ann_id):
        offset = ag.anchors[anchor_id].offset
        if offset is None or offset != offset.to_integral_value():
            raise BadArgument(
                "annotation %r endpoints must sit on integer token offsets" % ann_id
            )
        return int(offset)


def _suffix_number(ann_id):
    """Numeric tail of the final id segment; orders same-span constituents."""
    segment = ann_id.rpartition(":")[2]
    digits = ""
    while segment and segment[-1].isdigit():
        digits = segment[-1] + digits
        segment = segment[:-1]
    return int(digits) if digits else 1 << 62


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

_CODECS = {
    codec.name.lower(): codec
    for codec in (AifCodec(), LcfCodec(), TfCodec(), TimitCodec(), TreebankCodec(), XlabelCodec())
}


def get_codec(name):
    """Codec by case-insensitive format name."""
    if not isinstance(name, str):
        raise UnknownFormat("format name must be a string, got %r" % (name,))
    codec = _CODECS.get(name.lower())
    if codec is None:
        raise UnknownFormat("no format named %r" % (name,))
    return codec


def list_formats():
    """(canonical name, capability) pairs, alphabetical and stable."""
    out = []
    for key in sorted(_CODECS):
        codec = _CODECS[key]
        if codec.can_load and codec.can_store:
            capability = "input/output"
        elif codec.can_load:
            capability = "input"
        else:
            capability = "output"
        out.append((codec.name, capability))
    return out


def load(api, format_name, source, target_agset_id=None, options=None):
    """Load a byte stream (or bytes) through a named codec; returns AG ids."""
    codec = get_codec(format_name)
    if not codec.can_load:
        raise CapabilityError("format %s cannot load" % codec.name)
    return codec.load(api, source, target_agset_id, options)


def store(api, format_name, obj_id, sink, options=None):
    """Store an AGSet or AG to a binary sink through a named codec."""
    codec = get_codec(format_name)
    if not codec.can_store:
        raise CapabilityError("format %s cannot store" % codec.name)
    codec.store(api, obj_id, sink, options)
