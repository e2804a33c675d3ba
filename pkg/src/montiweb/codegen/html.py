"""HTML fragments and pages for resolved views."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from html import escape
from typing import Mapping

from ..classviews import ViewModifier
from ..linker import (BaseType, EnumRef, FieldElement, Role, SymbolTable, TextElement,
                      ViewSymbol)
from ..runtime.validation import Constraints, constraints_of
from .textimage import text_to_svg

SUBFORM_DEPTH = 3


class WidgetKind(str, enum.Enum):
    TEXT_INPUT = "TextInput"
    NUMBER_INPUT = "NumberInput"
    DATE_INPUT = "DateInput"
    EMAIL_IMAGE = "EmailImage"
    ENUM_SELECT = "EnumSelect"
    SUB_FORM = "SubForm"
    REF_PICKER = "RefPicker"
    STATIC_TEXT = "StaticTextBlock"
    CAPTCHA_BOX = "CaptchaBox"
    READ_ONLY = "ReadOnlyText"


@dataclass(frozen=True)
class FieldWidget:
    attribute: str | None
    kind: WidgetKind
    constraints: Constraints = Constraints()


@dataclass
class PageData:
    """Optional object data shown on a page.

    ``fields`` holds JSON-encoded values keyed by attribute or role name,
    ``labels`` maps object ids to display labels and ``choices`` lists
    ``(id, label)`` pairs per class for association pickers.
    """

    fields: Mapping[str, object] = field(default_factory=dict)
    labels: Mapping[str, str] = field(default_factory=dict)
    choices: Mapping[str, list[tuple[str, str]]] = field(default_factory=dict)


def _attrs(pairs) -> str:
    out = []
    for key, value in pairs:
        if value is None or value is False:
            continue
        if value is True:
            out.append(f" {key}")
        else:
            out.append(f' {key}="{escape(str(value), quote=True)}"')
    return "".join(out)


def _constraint_attrs(c: Constraints) -> list[tuple[str, object]]:
    return [("required", c.required), ("minlength", c.min_length), ("maxlength", c.max_length)]


def _constraint_json(c: Constraints) -> str | None:
    if not c.required and c.min_length is None and c.max_length is None:
        return None
    return json.dumps(c.to_dict(), sort_keys=True, separators=(",", ":"))


def _input_for(binding, name: str, html_id: str, c: Constraints, value) -> tuple[WidgetKind, str]:
    if isinstance(binding, EnumRef):
        opts = ['<option value=""></option>'] + [
            f"<option{_attrs([('value', lit), ('selected', value == f'{binding.name}.{lit}')])}>"
            f"{escape(lit)}</option>" for lit in binding.literals]
        tag = f"<select{_attrs([('id', html_id), ('name', name), ('required', c.required)])}>"
        return WidgetKind.ENUM_SELECT, tag + "".join(opts) + "</select>"
    kind, typ, extra = {
        "Number": (WidgetKind.NUMBER_INPUT, "number", [("step", 1)]),
        "MWDate": (WidgetKind.DATE_INPUT, "date", []),
        "Email": (WidgetKind.TEXT_INPUT, "email", []),
    }.get(binding.name, (WidgetKind.TEXT_INPUT, "text", []))
    pairs = [("type", typ), ("id", html_id), ("name", name), *extra, *_constraint_attrs(c),
             ("value", value)]
    return kind, f"<input{_attrs(pairs)}>"


def _subform(role: Role, table: SymbolTable, prefix: str, depth: int) -> str:
    cls = table.classes[role.target]
    card = role.cardinality
    head = _attrs([("class", "mw-subform"), ("data-mw-role", role.name),
                   ("data-mw-class", role.target), ("data-mw-min", card.min),
                   ("data-mw-max", "unbounded" if card.max is None else card.max)])
    lines = [f"<fieldset{head}>", f"<legend>{escape(role.name)}</legend>",
             '<template class="mw-subform-item">', '<div class="mw-subform-entry">']
    for attr, t in cls.attributes.items():
        if isinstance(t, (BaseType, EnumRef)):
            name = f"{prefix}[].{attr}"
            _, widget = _input_for(t, name, None, Constraints(), None)
            lines.append(f'<label class="mw-field">{escape(attr)} {widget}</label>')
    for child in cls.compositions:
        if depth < SUBFORM_DEPTH:
            lines.append(_subform(child, table, f"{prefix}[].{child.name}", depth + 1))
    lines += ['<button type="button" data-mw-remove>Remove</button>', "</div>", "</template>",
              f'<button type="button" data-mw-add="{escape(role.name)}">Add</button>', "</fieldset>"]
    return "\n".join(lines)


def _display_value(value, data: PageData) -> str:
    if value is None:
        return ""
    if isinstance(value, list):
        return ", ".join(data.labels.get(v, v) for v in value)
    return str(data.labels.get(value, value)) if isinstance(value, str) and value.startswith("#") \
        else str(value)


def render_field_fragment(element: FieldElement | TextElement, mode: ViewModifier,
                          table: SymbolTable, data: PageData | None = None,
                          html_id: str | None = None) -> tuple[FieldWidget, str]:
    """Return the widget description and HTML for one view element."""
    data = data or PageData()
    if isinstance(element, TextElement):
        warn = element.is_warning
        cls = "mw-text mw-warning" if warn else "mw-text"
        role = ' role="alert"' if warn else ""
        return (FieldWidget(None, WidgetKind.STATIC_TEXT),
                f'<div class="{cls}"{role}>{escape(element.text)}</div>')

    name = element.name
    html_id = html_id or f"mw-{name}"
    c = constraints_of(element.annotations)
    value = data.fields.get(name)
    binding = element.binding
    label = f'<label for="{escape(html_id)}">{escape(name)}</label>'

    if mode is ViewModifier.EDITOR:
        if isinstance(binding, Role) and binding.is_composition:
            kind, inner, label = WidgetKind.SUB_FORM, _subform(binding, table, name, 1), ""
        elif isinstance(binding, Role):
            many = binding.cardinality.max != 1
            opts = [f"<option{_attrs([('value', oid), ('selected', _selected(oid, value))])}>"
                    f"{escape(text)}</option>" for oid, text in data.choices.get(binding.target, [])]
            tag = _attrs([("id", html_id), ("name", name), ("multiple", many),
                          ("data-mw-class", binding.target), ("required", binding.cardinality.min > 0)])
            kind, inner = WidgetKind.REF_PICKER, f"<select{tag}>{''.join(opts)}</select>"
        else:
            shown = value if isinstance(value, (str, int)) and not isinstance(value, bool) else None
            kind, inner = _input_for(binding, name, html_id, c, shown)
    elif element.annotation("AsImage") is not None:
        alt = element.annotation("AsImage").get("alt")
        text = "" if value is None else str(value)
        kind = WidgetKind.EMAIL_IMAGE
        inner = text_to_svg(text, None if alt is False else f"{name} shown as an image")
        label = f"<span class=\"mw-label\">{escape(name)}</span>"
    else:
        kind = WidgetKind.READ_ONLY
        inner = f'<output id="{escape(html_id)}">{escape(_display_value(value, data))}</output>'

    pairs = [("class", "mw-field"), ("data-mw-field", name), ("data-mw-widget", kind.value),
             ("data-mw-constraints", _constraint_json(c))]
    if element.via:
        pairs.append(("data-mw-via", ".".join(element.via)))
    body = "\n".join(x for x in (label, inner) if x)
    return FieldWidget(name, kind, c), f"<div{_attrs(pairs)}>\n{body}\n</div>"


def _selected(oid: str, value) -> bool:
    return oid == value or (isinstance(value, list) and oid in value)


def captcha_fragment() -> tuple[FieldWidget, str]:
    return (FieldWidget("captcha", WidgetKind.CAPTCHA_BOX),
            '<div class="mw-field mw-captcha" data-mw-widget="CaptchaBox">\n'
            '<label for="mw-captcha">captcha</label>\n'
            '<output class="mw-captcha-challenge" data-mw-challenge></output>\n'
            '<input type="text" id="mw-captcha" name="captcha" required autocomplete="off">\n'
            '</div>')


def view_widgets(view: ViewSymbol, table: SymbolTable,
                 data: PageData | None = None) -> list[tuple[FieldWidget, str]]:
    """Fragments of a view in declaration order, captcha box last."""
    out = []
    for i, el in enumerate(view.elements):
        mode = el.modifier if isinstance(el, FieldElement) else view.modifier
        out.append(render_field_fragment(el, mode, table, data,
                                         f"mw-{i}-{getattr(el, 'name', 'text')}"))
    if view.modifier is ViewModifier.EDITOR and view.has_captcha:
        out.append(captcha_fragment())
    return out


def render_view_page(view: ViewSymbol, table: SymbolTable, data: PageData | None = None) -> str:
    """A complete HTML page for a named editor or display view."""
    qn = view.qualified_name
    body = [f for _, f in view_widgets(view, table, data)]
    mode = view.modifier.value
    lines = ["<!DOCTYPE html>", '<html lang="en">', "<head>", '<meta charset="utf-8">',
             f"<title>{escape(qn)}</title>",
             '<link rel="stylesheet" href="../static/mw.css">', "</head>", "<body>",
             f'<main{_attrs([("class", f"mw-view mw-{mode}"), ("data-mw-view", qn)])}>',
             f"<h1>{escape(view.name)}</h1>"]
    if view.modifier is ViewModifier.EDITOR:
        lines.append(f'<form method="post"{_attrs([("data-mw-class", view.owner)])}>')
        lines += body
        lines += ['<button type="submit">Submit</button>', "</form>"]
    else:
        lines.append('<div class="mw-display">')
        lines += body
        lines.append("</div>")
    lines += ["</main>", "</body>", "</html>", ""]
    return "\n".join(lines)


STYLESHEET = """\
.mw-view { font-family: sans-serif; max-width: 40em; margin: 1em auto; }
.mw-field { display: block; margin: 0.5em 0; }
.mw-field label, .mw-field .mw-label { display: inline-block; min-width: 8em; }
.mw-text { margin: 0.5em 0; }
.mw-warning { color: #8a1c1c; background: #fdecea; border: 1px solid #f5c2c0; padding: 0.5em; }
.mw-captcha { border-top: 1px dashed #999; padding-top: 0.5em; }
.mw-subform { border: 1px solid #ccc; padding: 0.5em; }
.mw-asimage { vertical-align: middle; }
"""
