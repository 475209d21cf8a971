"""Command line front end.

Every workbench operation is reachable headlessly: checking a model,
streaming instances, differencing two model versions into the four
categories, nearest-instance search, completion, a scripted session
driver (used by the liveness tests), and the HTTP server.

Exit codes: 0 success, 1 model diagnostics or unsatisfiable request,
2 internal error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Optional

from .. import corpus
from ..complete import render_relation, render_type
from ..diagnostics import has_errors
from ..errors import WorkbenchError
from ..finder import Scope, enumerate_instances, categorize, universe_for
from ..instance import from_text, to_text
from ..proximity import closest, default_goal, instance_distance
from ..typecheck import TypedModel, analyze
from .session import CATEGORIES, Session, SessionConfig

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_INTERNAL = 2


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_OK
    try:
        return args.func(args)
    except WorkbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    except BrokenPipeError:
        return EXIT_OK
    except Exception as exc:  # noqa: BLE001 - last-resort guard for exit code 2
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relwb", description="relational modeling workbench"
    )
    sub = parser.add_subparsers(dest="command")
    parser.set_defaults(command=None)

    p = sub.add_parser("check", help="parse and typecheck a model file")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("enumerate", help="stream instances of the run goal")
    p.add_argument("file")
    _scope_args(p)
    p.add_argument("--limit", type=int, default=10)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser(
        "categorize", help="diff two model versions into the four categories"
    )
    p.add_argument("old_file")
    p.add_argument("new_file")
    _scope_args(p)
    p.add_argument("--limit", type=int, default=3)
    p.set_defaults(func=cmd_categorize)

    p = sub.add_parser("closest", help="nearest valid or invalid instance")
    p.add_argument("file")
    p.add_argument("--target", required=True, help="instance text file")
    p.add_argument("--polarity", choices=["valid", "invalid"], default="valid")
    _scope_args(p)
    p.set_defaults(func=cmd_closest)

    p = sub.add_parser("suggest", help="completions at a byte offset")
    p.add_argument("file")
    p.add_argument("--offset", type=int)
    p.add_argument("--after", help="place the cursor just after this substring")
    _scope_args(p)
    p.set_defaults(func=cmd_suggest)

    p = sub.add_parser("fixture", help="print a built-in example model")
    p.add_argument("name", choices=sorted(corpus.MODELS))
    p.set_defaults(func=cmd_fixture)

    p = sub.add_parser("script", help="drive a headless session from a JSON script")
    p.add_argument("file", help="JSON script file, or - for stdin")
    p.set_defaults(func=cmd_script)

    p = sub.add_parser("serve", help="run the HTTP/WebSocket server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.set_defaults(func=cmd_serve)

    return parser


def _scope_args(p: argparse.ArgumentParser):
    p.add_argument("--scope", type=int, default=3, help="default atoms per top sig")
    p.add_argument(
        "--per-sig",
        action="append",
        default=[],
        metavar="SIG=N",
        help="override the bound of one sig (repeatable)",
    )


def _scope_of(args) -> Scope:
    per_sig = {}
    for item in args.per_sig:
        name, _, value = item.partition("=")
        per_sig[name] = int(value)
    return Scope(default_bound=args.scope, per_sig=per_sig)


def _load(path: str) -> tuple[Optional[TypedModel], list]:
    with open(path, encoding="utf-8") as fh:
        return analyze(fh.read())


def _print_diags(diags):
    for d in diags:
        print(f"{d.severity} {d.code} @{d.span[0]}-{d.span[1]}: {d.message}")


def cmd_check(args) -> int:
    tm, diags = _load(args.file)
    _print_diags(diags)
    if tm is None or has_errors(diags):
        return EXIT_DIAGNOSTICS
    print(
        f"ok: {len(tm.sigs)} sigs, {len(tm.fields)} fields, "
        f"{len(tm.model.facts)} facts, {len(tm.preds)} preds"
    )
    return EXIT_OK


def cmd_enumerate(args) -> int:
    tm, diags = _load(args.file)
    if tm is None:
        _print_diags(diags)
        return EXIT_DIAGNOSTICS
    cursor = enumerate_instances(tm, default_goal(tm), scope=_scope_of(args))
    count = 0
    while count < args.limit:
        inst = cursor.next()
        if inst is None:
            break
        count += 1
        if args.json:
            from ..instance import to_json

            print(json.dumps(to_json(tm, inst)))
        else:
            print(f"--- instance {count}")
            print(to_text(tm, inst), end="")
    if count == 0:
        print("no instances")
        return EXIT_DIAGNOSTICS
    return EXIT_OK


def cmd_categorize(args) -> int:
    old_tm, old_diags = _load(args.old_file)
    new_tm, new_diags = _load(args.new_file)
    if old_tm is None or new_tm is None:
        _print_diags(old_diags if old_tm is None else new_diags)
        return EXIT_DIAGNOSTICS
    streams = categorize(
        new_tm, default_goal(old_tm), default_goal(new_tm), scope=_scope_of(args)
    )
    for key in CATEGORIES:
        shown = streams.cursor(key).take(args.limit)
        print(f"== {key}")
        if not shown:
            print("(none)")
            continue
        for i, inst in enumerate(shown):
            print(f"--- instance {i + 1}")
            print(to_text(new_tm, inst), end="")
    return EXIT_OK


def cmd_closest(args) -> int:
    tm, diags = _load(args.file)
    if tm is None:
        _print_diags(diags)
        return EXIT_DIAGNOSTICS
    universe = universe_for(tm, _scope_of(args))
    with open(args.target, encoding="utf-8") as fh:
        target = from_text(tm, universe, fh.read())
    result = closest(tm, target, args.polarity)
    if result is None:
        print("no instance satisfies the constraints at this scope")
        return EXIT_DIAGNOSTICS
    print(to_text(tm, result), end="")
    print(f"distance: {instance_distance(tm, result, target)}")
    return EXIT_OK


def cmd_suggest(args) -> int:
    with open(args.file, encoding="utf-8") as fh:
        text = fh.read()
    if args.offset is None and args.after is None:
        print("error: --offset or --after is required", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    offset = args.offset
    if offset is None:
        at = text.find(args.after)
        if at < 0:
            print("error: --after text not found", file=sys.stderr)
            return EXIT_DIAGNOSTICS
        offset = at + len(args.after)
    session = Session(text, SessionConfig(scope=_scope_of(args), debounce_s=0.0))
    try:
        session.wait_idle()
        result = session.get_suggestions(offset)
        universe = session.universe()
        for s in result.suggestions:
            wire = s.to_wire(universe)
            value = wire["value"] if wire["value"] is not None else ""
            print(f"{wire['text']}\t{wire['type']}\t{value}")
        if result.truncated:
            print("(truncated)")
        return EXIT_OK
    finally:
        session.close()


def cmd_fixture(args) -> int:
    print(corpus.MODELS[args.name], end="")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def cmd_script(args) -> int:
    if args.file == "-":
        steps = json.load(sys.stdin)
    else:
        with open(args.file, encoding="utf-8") as fh:
            steps = json.load(fh)
    outputs = []
    session: Optional[Session] = None
    try:
        for step in steps:
            op = step["op"]
            if op == "open":
                text = _script_model_text(step)
                session = Session(text, SessionConfig.from_wire(step))
                outputs.append({"op": op, "session": session.id,
                                "generation": session.generation})
            elif session is None:
                raise WorkbenchError("script must start with an 'open' step")
            elif op == "edit":
                g, diags = session.apply_edit(step["text"])
                outputs.append({"op": op, "generation": g,
                                "errors": sum(d.severity == "error" for d in diags)})
            elif op == "editReplace":
                new_text = session.model_text.replace(
                    step["find"], step["replace"]
                )
                g, diags = session.apply_edit(new_text)
                outputs.append({"op": op, "generation": g,
                                "errors": sum(d.severity == "error" for d in diags)})
            elif op == "sleep":
                time.sleep(float(step["ms"]) / 1000)
                outputs.append({"op": op})
            elif op == "wait":
                idle = session.wait_idle(float(step.get("timeoutMs", 30000)) / 1000)
                outputs.append({"op": op, "idle": idle})
            elif op == "view":
                outputs.append({"op": op,
                                "view": session.get_category_view(step["category"])})
            elif op == "advance":
                outputs.append({"op": op,
                                "view": session.advance_category(step["category"])})
            elif op == "pin":
                universe = session.universe()
                assert session.last_good is not None and universe is not None
                inst = from_text(session.last_good, universe, step["instanceText"])
                entries = session.pin_focus(inst, step["expected"])
                outputs.append({"op": op, "entries": entries})
            elif op == "focus":
                outputs.append({"op": op, "entries": session.get_focus()})
            elif op == "suggest":
                offset = step.get("offset")
                if offset is None:
                    offset = session.model_text.index(step["after"]) + len(
                        step["after"]
                    )
                result = session.get_suggestions(offset, step.get("source"))
                universe = session.universe()
                outputs.append({
                    "op": op,
                    "suggestions": [s.to_wire(universe) for s in result.suggestions],
                    "truncated": result.truncated,
                })
            else:
                raise WorkbenchError(f"unknown script op '{op}'")
    finally:
        events = session.events if session is not None else []
        print(json.dumps({"outputs": outputs, "events": events}, indent=2))
        if session is not None:
            session.close()
    return EXIT_OK


def _script_model_text(step: dict) -> str:
    if "model" in step:
        return corpus.MODELS[step["model"]]
    if "file" in step:
        with open(step["file"], encoding="utf-8") as fh:
            return fh.read()
    return step.get("text", "")


if __name__ == "__main__":
    sys.exit(main())
