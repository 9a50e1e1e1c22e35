"""Command line front end.

Subcommands: ``convert``, ``query``, ``validate``, ``info``, ``formats``
and ``events-replay``.  Exit codes are uniform across commands:

* 0 success
* 1 usage problems (bad flags, unreadable input)
* 2 parse errors in an input file or event log
* 3 semantic errors (capability, missing objects, bad bounds, violations)

Results go to stdout, one item per line; messages go to stderr.
"""

import argparse
import os
import sys
from decimal import Decimal, InvalidOperation

from . import aif, codecs, events
from .api import AnnotationGraphAPI
from .core import AGIndex
from .errors import AGError, DecodeError, ParseError, SchemaError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_SEMANTIC = 3

SAMPLE_RATE_ENV = "AGTK_SAMPLERATE"


def _decimal_arg(text):
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError("%r is not a decimal number" % text) from None
    if not value.is_finite():
        raise argparse.ArgumentTypeError("%r is not finite" % text)
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="agraph", description="Annotation graph conversion, querying and validation."
    )
    commands = parser.add_subparsers(dest="command", required=True)

    convert = commands.add_parser("convert", help="convert between annotation file formats")
    convert.add_argument("--from", dest="from_format", required=True, metavar="FORMAT")
    convert.add_argument("--to", dest="to_format", required=True, metavar="FORMAT")
    convert.add_argument("--input", required=True, metavar="PATH")
    convert.add_argument("--output", required=True, metavar="PATH")
    convert.add_argument("--agset", metavar="ID", help="load into this AGSet id")
    convert.add_argument("--samplerate", type=int, metavar="N", help="sample rate for TIMIT input")

    query = commands.add_parser("query", help="run an offset query against an AIF file")
    query.add_argument("operation", choices=["overlap", "seq", "anchors-near"])
    query.add_argument("--aif", required=True, metavar="PATH")
    query.add_argument("--ag", metavar="ID", help="graph to query (default: the file's only graph)")
    query.add_argument("--offset", type=_decimal_arg, metavar="T")
    query.add_argument("--epsilon", type=_decimal_arg, default=Decimal(0), metavar="E")
    query.add_argument("--begin", type=_decimal_arg, metavar="T")
    query.add_argument("--end", type=_decimal_arg, metavar="T")

    validate = commands.add_parser("validate", help="check the invariants of an AIF file")
    validate.add_argument("--aif", required=True, metavar="PATH")

    info = commands.add_parser("info", help="print object counts for an AIF file")
    info.add_argument("--aif", required=True, metavar="PATH")

    commands.add_parser("formats", help="list supported formats")

    replay = commands.add_parser("events-replay", help="replay an event log and write AIF")
    replay.add_argument("--log", required=True, metavar="PATH")
    replay.add_argument("--out", required=True, metavar="PATH")
    replay.add_argument("--agset", default="AGSet1", metavar="ID")

    return parser


def _readable(path):
    return os.path.isfile(path) and os.access(path, os.R_OK)


def _load_aif_file(path):
    with open(path, "rb") as handle:
        return aif.parse_document(handle.read())


def cmd_convert(args):
    options = {}
    if args.samplerate is not None:
        options["sampleRate"] = args.samplerate
    elif os.environ.get(SAMPLE_RATE_ENV):
        options["sampleRate"] = os.environ[SAMPLE_RATE_ENV]
    api = AnnotationGraphAPI()
    with open(args.input, "rb") as source:
        ag_ids = codecs.load(api, args.from_format, source, args.agset, options)
    to_codec = codecs.get_codec(args.to_format)
    if isinstance(to_codec, codecs.AifCodec):
        if args.agset:
            store_id = args.agset
        elif ag_ids:
            store_id = ag_ids[0].split(":")[0]
        else:
            store_id = next(iter(api.registry.agsets))
    else:
        if len(ag_ids) != 1:
            print(
                "input holds %d graphs; %s stores exactly one" % (len(ag_ids), to_codec.name),
                file=sys.stderr,
            )
            return EXIT_SEMANTIC
        store_id = ag_ids[0]
    with open(args.output, "wb") as sink:
        codecs.store(api, args.to_format, store_id, sink)
    for ag_id in ag_ids:
        print(ag_id)
    return EXIT_OK


def _pick_ag(api, ag_ids, wanted):
    if wanted is not None:
        if not api.exists(wanted):
            print("no graph %r in this file" % wanted, file=sys.stderr)
            return None
        return wanted
    if len(ag_ids) != 1:
        print("file holds %d graphs; choose one with --ag" % len(ag_ids), file=sys.stderr)
        return None
    return ag_ids[0]


def cmd_query(args, parser):
    if args.operation in ("overlap", "anchors-near") and args.offset is None:
        parser.error("%s requires --offset" % args.operation)
    api = AnnotationGraphAPI()
    with open(args.aif, "rb") as source:
        ag_ids = codecs.load(api, "AIF", source)
    ag_id = _pick_ag(api, ag_ids, args.ag)
    if ag_id is None:
        return EXIT_SEMANTIC
    if args.operation == "overlap":
        result = api.get_annotation_set_by_offset(ag_id, args.offset)
    elif args.operation == "anchors-near":
        result = api.get_anchor_set_nearest_offset(ag_id, args.offset)
    else:
        result = api.get_annotation_seq_by_offset(ag_id, args.begin, args.end)
    for item in result:
        print(item)
    return EXIT_OK


def cmd_validate(args):
    with open(args.aif, "rb") as handle:
        doc = aif.parse_document(handle.read())
    problems = aif.validate_document(doc)
    if not problems:
        # Structurally clean: materialize and confirm the live indexes
        # match a from-scratch rebuild.
        api = AnnotationGraphAPI()
        aif.materialize(api, doc, "ValidationScratch")
        registry = api.registry
        for ag in registry.agsets["ValidationScratch"].ags.values():
            if registry.index_of(ag) != AGIndex.rebuilt(ag):
                problems.append("AG %r: live index differs from rebuild" % ag.id)
    if problems:
        for line in problems:
            print(line)
        return EXIT_SEMANTIC
    return EXIT_OK


def cmd_info(args):
    with open(args.aif, "rb") as handle:
        doc = aif.parse_document(handle.read())
    anchors = sum(len(ag.anchors) for ag in doc.ags)
    annotations = sum(len(ag.annotations) for ag in doc.ags)
    features = len(doc.metadata)
    for timeline in doc.timelines:
        features += len(timeline.metadata)
        features += sum(len(signal.metadata) for signal in timeline.signals)
    for ag in doc.ags:
        features += len(ag.metadata)
        features += sum(len(ann.features) for ann in ag.annotations)
    print("ags %d" % len(doc.ags))
    print("anchors %d" % anchors)
    print("annotations %d" % annotations)
    print("features %d" % features)
    return EXIT_OK


def cmd_formats():
    for name, capability in codecs.list_formats():
        print("%s %s" % (name, capability))
    return EXIT_OK


def cmd_events_replay(args):
    with open(args.log, "rb") as handle:
        lines = events.read_log(handle)
    hub, editor = events.standard_session(agset_id=args.agset)
    events.replay(lines, hub)
    with open(args.out, "wb") as sink:
        sink.write(editor.api.to_xml(args.agset).encode("utf-8"))
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return EXIT_OK if exit_.code in (0, None) else EXIT_USAGE
    for attr in ("input", "aif", "log"):
        path = getattr(args, attr, None)
        if path is not None and not _readable(path):
            print("cannot read %r" % path, file=sys.stderr)
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
    try:
        if args.command == "convert":
            return cmd_convert(args)
        if args.command == "query":
            try:
                return cmd_query(args, parser)
            except SystemExit as exit_:
                return EXIT_OK if exit_.code in (0, None) else EXIT_USAGE
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "info":
            return cmd_info(args)
        if args.command == "formats":
            return cmd_formats()
        return cmd_events_replay(args)
    except (ParseError, DecodeError, SchemaError) as exc:
        print("parse error: %s" % exc, file=sys.stderr)
        return EXIT_PARSE
    except AGError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_SEMANTIC
    except OSError as exc:
        print("i/o error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
