"""Command line interface: ``montiweb check | generate | run``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .classviews import ViewModifier
from .diagnostics import MWError, render_diagnostics
from .linker import FieldElement, LinkedModel, Role, TextElement
from .project import LoadedProject, ProjectError, load_project
from .runtime.flow import (FlowError, FlowSession, FlowStatus, StepInput, load_script, run_script,
                           serialize_trace, start_session, step_session, waits_for_input)

EXIT_OK = 0
EXIT_MODEL = 1
EXIT_USAGE = 2
EXIT_FLOW = 3


class _UsageError(Exception):
    pass


def _use_color(stream) -> bool:
    return "MW_NO_COLOR" not in os.environ and hasattr(stream, "isatty") and stream.isatty()


def _report(project: LoadedProject, model: LinkedModel, out, deny_warnings: bool = False) -> bool:
    """Print diagnostics and a summary; return True when the model is usable."""
    diags = model.diagnostics
    if diags:
        out.write(render_diagnostics(diags, project.sources, color=_use_color(out)))
    n_err, n_warn = len(model.errors), len(model.warnings)
    failed = n_err > 0 or (deny_warnings and n_warn > 0)
    if diags or failed:
        out.write(f"{n_err} error(s), {n_warn} warning(s)\n")
    return not failed


def cmd_check(project: LoadedProject, args) -> int:
    model = project.check()
    ok = _report(project, model, sys.stdout, args.deny_warnings)
    if ok and not model.diagnostics:
        print("ok")
    return EXIT_OK if ok else EXIT_MODEL


def cmd_generate(project: LoadedProject, args) -> int:
    from .codegen.site import generate_site

    model = project.check()
    if not _report(project, model, sys.stderr):
        return EXIT_MODEL
    out = Path(args.out) if args.out else project.manifest.out
    try:
        site = generate_site(model, out)
    except MWError as exc:
        print(f"error[{exc.code}]: {exc.message}", file=sys.stderr)
        return EXIT_USAGE if exc.code == "MW602" else EXIT_MODEL
    sys.stdout.write(site.manifest_text())
    return EXIT_OK


def _pick_activity(project: LoadedProject, model: LinkedModel, name: str | None) -> str:
    if name is None:
        name = project.manifest.default_activity
    if name is None:
        if len(model.activities) != 1:
            raise _UsageError("no activity given and the project does not define exactly one")
        name = next(iter(model.activities))
    if name not in model.activities:
        raise _UsageError(f"unknown activity {name!r}")
    return name


def cmd_run(project: LoadedProject, args) -> int:
    model = project.check()
    if not _report(project, model, sys.stderr):
        return EXIT_MODEL
    name = _pick_activity(project, model, args.activity)
    if args.interactive:
        return _interactive(model, name, args.seed)
    try:
        script = load_script(Path(args.script).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, ValueError) as exc:
        raise _UsageError(f"cannot read script {args.script}: {exc}") from exc
    code = EXIT_OK
    try:
        trace = run_script(model, name, script, args.seed).trace
    except FlowError as exc:
        print(f"error[{exc.code}]: {exc.message}", file=sys.stderr)
        trace, code = exc.trace, EXIT_FLOW
    text = serialize_trace(trace)
    if args.trace_out:
        try:
            Path(args.trace_out).write_text(text, encoding="utf-8", newline="\n")
        except OSError as exc:
            raise _UsageError(f"cannot write trace: {exc}") from exc
    else:
        sys.stdout.write(text)
    return code


# -- interactive mode -----------------------------------------------------------

def _show(session: FlowSession):
    action = session.activity.actions[session.current]
    view = action.view
    obj = None
    if action.call.argument is not None:
        oid = session.bindings.get(action.call.argument)
        if oid is not None and oid in session.store:
            obj = session.store.get(oid)
    print(f"== {view.qualified_name} ==")
    for el in view.elements:
        if isinstance(el, TextElement):
            print(("! " if el.is_warning else "") + el.text)
            continue
        value = None if obj is None else obj.fields.get(el.name)
        if el.annotation("AsImage") is not None:
            shown = "[shown as image]"
        elif isinstance(value, list):
            shown = ", ".join(session.store.label(v) for v in value)
        elif value is None:
            shown = ""
        else:
            shown = str(value) if not hasattr(value, "serial") else session.store.label(value)
        print(f"{el.name}: {shown}")


def _ask(prompt: str) -> str:
    return input(prompt)


def _prompt_input(session: FlowSession) -> StepInput:
    action = session.activity.actions[session.current]
    view = action.view
    inp = StepInput()
    print(f"== {view.qualified_name} ==")
    seen = set()
    for el in view.elements:
        if isinstance(el, TextElement):
            print(el.text)
            continue
        if not isinstance(el, FieldElement) or el.modifier is not ViewModifier.EDITOR \
                or el.name in seen:
            continue
        seen.add(el.name)
        b = el.binding
        if isinstance(b, Role) and b.is_composition:
            count = _ask(f"how many {el.name}? ").strip() or "0"
            n = int(count) if count.isdigit() else 0
            target = session.store.class_symbol(b.target)
            items = []
            for i in range(n):
                items.append({a: _ask(f"{el.name}[{i}].{a}: ")
                              for a, t in target.attributes.items() if t.kind != "class"})
            inp.children[el.name] = items
        elif isinstance(b, Role):
            raw = _ask(f"{el.name} (labels, comma separated): ")
            inp.links[el.name] = [x.strip() for x in raw.split(",") if x.strip()]
        else:
            inp.fields[el.name] = _ask(f"{el.name}: ")
    if view.has_captcha:
        print(f"captcha challenge: {session.captcha_challenge}")
        inp.fields["captcha"] = _ask("captcha: ")
    return inp


def _interactive(model: LinkedModel, name: str, seed: int) -> int:
    try:
        session = start_session(model, name, seed)
        while session.status is FlowStatus.RUNNING:
            if waits_for_input(session):
                before = len(session.trace)
                step_session(session, _prompt_input(session))
                for ev in session.trace[before:]:
                    if ev.kind == "ValidationRejected":
                        for v in ev.data["violations"]:
                            print(f"  {v['attribute']}: {v['message']}")
            else:
                _show(session)
                step_session(session)
    except FlowError as exc:
        print(f"error[{exc.code}]: {exc.message}", file=sys.stderr)
        return EXIT_FLOW
    except EOFError:
        print("input ended", file=sys.stderr)
        return EXIT_FLOW
    print("flow completed")
    return EXIT_OK


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="montiweb",
                                     description="Check, generate and run web application models.")
    parser.add_argument("-p", "--project", default=".",
                        help="project directory or montiweb.json manifest (default: .)")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="parse and link the project, print diagnostics")
    check.add_argument("--deny-warnings", action="store_true", help="treat warnings as errors")
    check.set_defaults(func=cmd_check)

    gen = sub.add_parser("generate", help="write HTML pages and descriptors")
    gen.add_argument("--out", help="output directory (default from manifest, else out/)")
    gen.set_defaults(func=cmd_generate)

    run = sub.add_parser("run", help="execute an activity")
    run.add_argument("activity", nargs="?", help="activity name (default from manifest)")
    mode = run.add_mutually_exclusive_group(required=True)
    mode.add_argument("--script", help="JSON file with the inputs for each action")
    mode.add_argument("--interactive", action="store_true", help="prompt on the terminal")
    run.add_argument("--trace-out", help="write the trace here instead of stdout")
    run.add_argument("--seed", type=int, default=0, help="captcha session seed (default: 0)")
    run.set_defaults(func=cmd_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "trace_out", None) and args.interactive:
        parser.error("--trace-out needs --script")
    try:
        project = load_project(args.project)
        return args.func(project, args)
    except (ProjectError, _UsageError) as exc:
        print(f"montiweb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
