"""Operator command line: create questionnaires, issue tokens, import demos,
export static reports and run the service.

Every command is a thin composition of module operations; no business
logic lives here. Errors are one line on stderr ("error: <message>") with
a nonzero exit code. Raw tokens are printed exactly once, by `tokens`;
they are never recoverable afterwards because only digests are stored.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import defaults, qformat, survey
from .report import ReportEngine, filter_by_role, serialize_report
from .service import ServiceConfig, serve
from .store import Store
from .survey import DefinitionError, TokenError


class CliError(Exception):
    pass


def _store(args) -> Store:
    return Store(Path(args.store))


def cmd_create(args) -> int:
    path = Path(args.definition)
    if not path.exists():
        raise CliError(f"no such file: {path}")
    try:
        q = qformat.create_questionnaire(path.read_text(encoding="utf-8"))
    except DefinitionError as exc:
        raise CliError(str(exc)) from exc
    store = _store(args)
    store.store_questionnaire(q, overwrite=args.overwrite)
    print(q.id)
    return 0


def cmd_tokens(args) -> int:
    store = _store(args)
    store.load_questionnaire(args.questionnaire)  # fail fast on unknown id
    try:
        raws, records = survey.issue_tokens(args.count, args.level)
    except TokenError as exc:
        raise CliError(str(exc)) from exc
    store.record_tokens(args.questionnaire, records)
    for raw in raws:
        print(raw)
    return 0


def cmd_import_default(args) -> int:
    store = _store(args)
    created = defaults.import_default(store, args.example, overwrite=args.overwrite)
    for kind, obj_id in created:
        print(f"{kind} {obj_id}")
    return 0


def cmd_export_report(args) -> int:
    store = _store(args)
    engine = ReportEngine(store)
    report = filter_by_role(engine.compose_at(args.spec), args.level)
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory: {exc}") from exc
    report_path = out_dir / "report.json"
    report_path.write_text(serialize_report(report), encoding="utf-8")
    charts_dir = out_dir / "charts"
    charts_dir.mkdir(exist_ok=True)
    for i, block in enumerate(report.blocks):
        for name, svg in block["charts"].items():
            (charts_dir / f"block{i:02d}_{block['kind']}_{name}.svg").write_text(
                svg, encoding="utf-8"
            )
    print(report_path)
    return 0


def cmd_serve(args) -> int:
    # config file supplies base values; explicit flags override
    base: dict = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise CliError(f"no such file: {path}")
        base = json.loads(path.read_text(encoding="utf-8"))

    def pick(flag, key, default):
        if flag is not None:
            return flag
        return base.get(key, default)

    static = pick(args.static, "static_path", None)
    config = ServiceConfig(
        store_root=Path(pick(None, "store_root", args.store)),
        host=pick(args.host, "host", "127.0.0.1"),
        port=int(pick(args.port, "port", 8080)),
        static_path=Path(static) if static else None,
        transport=pick(args.transport, "transport", "disabled"),
        gateway_url=pick(args.gateway_url, "gateway_url", None),
        session_ttl=float(pick(args.session_ttl, "session_ttl", 7200.0)),
        admin_min_level=int(pick(args.admin_level, "admin_min_level", 3)),
    )
    serve(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="statboard",
        description="Survey collection with live statistical reports.",
    )
    parser.add_argument("--store", default="./statboard-data",
                        help="store root directory (default: ./statboard-data)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("create", help="create a questionnaire from a definition file")
    p.add_argument("definition", help="path to the definition file")
    p.add_argument("--overwrite", action="store_true",
                   help="replace an existing questionnaire (bumps its version)")
    p.set_defaults(func=cmd_create)

    p = sub.add_parser("tokens", help="issue access tokens (raw tokens printed once)")
    p.add_argument("questionnaire", help="questionnaire id")
    p.add_argument("-n", "--count", type=int, required=True, help="number of tokens")
    p.add_argument("--level", type=int, default=0,
                   help="hierarchy level (0=respondent, >=1 viewer; default 0)")
    p.set_defaults(func=cmd_tokens)

    p = sub.add_parser("import-default", help="install a demo example")
    p.add_argument("example", choices=defaults.EXAMPLES)
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=cmd_import_default)

    p = sub.add_parser("export-report", help="export a report as static files")
    p.add_argument("spec", help="report spec id")
    p.add_argument("--level", type=int, default=0, help="viewer hierarchy level")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_export_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", default=None,
                   help="JSON config file; explicit flags override its values")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--static", default=None, help="directory of static UI files")
    p.add_argument("--transport", choices=["disabled", "capture", "gateway"],
                   default=None, help="confirmation notification transport")
    p.add_argument("--gateway-url", default=None,
                   help="endpoint for the gateway transport")
    p.add_argument("--session-ttl", type=float, default=None)
    p.add_argument("--admin-level", type=int, default=None,
                   help="minimum hierarchy level for dataset upload")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # uniform one-line failure contract
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
