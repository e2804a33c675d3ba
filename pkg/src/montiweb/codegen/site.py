"""Descriptors and whole-site generation."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..activity import print_guard
from ..classviews import ViewModifier
from ..diagnostics import MWError
from ..linker import LinkedModel, ResolvedActivity, SymbolTable, dump_data_model
from .html import STYLESHEET, render_view_page


def _dump(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def emit_schema_descriptor(table: SymbolTable) -> str:
    return dump_data_model(table)


def _activity_entry(act: ResolvedActivity) -> dict:
    actions = []
    for a in act.definition.actions:
        call = act.actions[a.name].call
        actions.append({
            "name": a.name,
            "in": [{"name": p.name, "type": p.type_name} for p in a.inputs],
            "out": [{"name": p.name, "type": p.type_name} for p in a.outputs],
            "view": call.qualified_name if call else None,
            "argument": call.argument if call else None,
            "assign": call.assign_to if call else None,
            "code": call is None,
        })
    transitions = [{
        "sources": [str(s) for s in stmt.sources],
        "alternatives": [{"guard": None if alt.guard is None else print_guard(alt.guard),
                          "target": str(alt.target)} for alt in stmt.alternatives],
    } for stmt in act.definition.transitions]
    return {"name": act.name, "actions": actions, "transitions": transitions}


def emit_flow_descriptor(activities) -> str:
    acts = sorted(activities.values() if isinstance(activities, dict) else activities,
                  key=lambda a: a.name)
    return _dump({"activities": [_activity_entry(a) for a in acts]})


@dataclass
class GeneratedSite:
    files: dict[str, bytes] = field(default_factory=dict)
    pages: dict[str, str] = field(default_factory=dict)

    @property
    def manifest(self) -> list[tuple[str, str]]:
        return [(p, hashlib.sha256(b).hexdigest()) for p, b in sorted(self.files.items())
                if p != "manifest.json"]

    def manifest_text(self) -> str:
        return _dump({"files": [{"path": p, "sha256": h} for p, h in self.manifest]})


def build_site(model: LinkedModel) -> GeneratedSite:
    """Render every output file in memory."""
    if not model.ok:
        raise MWError("MW601", f"model has {len(model.errors)} error(s); nothing generated")
    table = model.table
    site = GeneratedSite()
    for (owner, name), view in sorted(table.views.items()):
        if view.modifier is ViewModifier.FIELD:
            continue
        html = render_view_page(view, table)
        site.pages[view.qualified_name] = html
        site.files[f"pages/{view.qualified_name}.html"] = html.encode("utf-8")
    site.files["schema.json"] = emit_schema_descriptor(table).encode("utf-8")
    site.files["flow.json"] = emit_flow_descriptor(table.activities).encode("utf-8")
    site.files["static/mw.css"] = STYLESHEET.encode("utf-8")
    site.files["manifest.json"] = site.manifest_text().encode("utf-8")
    return site


def generate_site(model: LinkedModel, out_dir: str | os.PathLike) -> GeneratedSite:
    """Write the site below ``out_dir``; MW601 if the model has errors, MW602 on I/O failure."""
    site = build_site(model)
    out = Path(out_dir)
    try:
        for rel, data in site.files.items():
            path = out / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(data)
    except OSError as exc:
        raise MWError("MW602", f"cannot write to {out}: {exc}") from exc
    return site
