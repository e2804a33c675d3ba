"""Annotation-driven validation of raw form input."""

from __future__ import annotations

import datetime as dt
import enum
import re
from dataclasses import dataclass
from typing import Iterable

from ..annotations import Annotation
from ..linker import BaseType, EnumRef
from .values import EnumVal, Value

INT64_MIN = -(2 ** 63)
INT64_MAX = 2 ** 63 - 1

NUMBER_RE = re.compile(r"[+-]?[0-9]+")
DATE_RE = re.compile(r"[0-9]{4}-[0-9]{2}-[0-9]{2}")
EMAIL_RE = re.compile(r"[^\s@]+@[^\s@.]+(\.[^\s@.]+)+")


class Rule(str, enum.Enum):
    REQUIRED = "Required"
    LENGTH = "Length"
    EMAIL_FORMAT = "EmailFormat"
    NUMBER_FORMAT = "NumberFormat"
    DATE_FORMAT = "DateFormat"
    ENUM_LITERAL = "EnumLiteral"
    CARDINALITY = "Cardinality"
    CAPTCHA = "Captcha"


@dataclass(frozen=True)
class ValidationViolation:
    attribute: str
    rule: Rule
    message: str
    raw: str
    params: tuple[tuple[str, object], ...] = ()

    def to_dict(self) -> dict:
        return {"attribute": self.attribute, "rule": self.rule.value, "message": self.message,
                "raw": self.raw, "params": {k: v for k, v in self.params}}


@dataclass(frozen=True)
class Constraints:
    """The merged effect of @Required and @Length on one field."""

    required: bool = False
    min_length: int | None = None
    max_length: int | None = None

    def to_dict(self) -> dict:
        out: dict = {"required": self.required}
        if self.min_length is not None:
            out["minlength"] = self.min_length
        if self.max_length is not None:
            out["maxlength"] = self.max_length
        return out


def constraints_of(annotations: Iterable[Annotation]) -> Constraints:
    required = False
    lo: int | None = None
    hi: int | None = None
    for ann in annotations:
        if ann.name == "Required":
            required = True
        elif ann.name == "Length":
            if ann.get("min") is not None:
                lo = ann.get("min") if lo is None else max(lo, ann.get("min"))
            if ann.get("max") is not None:
                hi = ann.get("max") if hi is None else min(hi, ann.get("max"))
    return Constraints(required, lo, hi)


def _length_violation(name, raw, c: Constraints) -> ValidationViolation | None:
    n = len(raw)
    if (c.min_length is not None and n < c.min_length) or \
            (c.max_length is not None and n > c.max_length):
        lo = c.min_length if c.min_length is not None else 0
        bound = f"{lo} to {c.max_length}" if c.max_length is not None else f"at least {lo}"
        params = tuple((k, v) for k, v in (("min", c.min_length), ("max", c.max_length))
                       if v is not None)
        return ValidationViolation(name, Rule.LENGTH,
                                   f"{name} must have {bound} characters, got {n}", raw, params)
    return None


def validate_field(field_type: BaseType | EnumRef, annotations: Iterable[Annotation], raw: str,
                   attribute: str = "value") -> tuple[Value, list[ValidationViolation]]:
    """Check one raw input against its type and annotations.

    Returns ``(value, [])`` on success and ``(None, violations)`` otherwise.
    An empty input for a field without @Required is accepted as absent.
    """
    c = constraints_of(annotations)
    if not raw.strip():
        if c.required:
            return None, [ValidationViolation(attribute, Rule.REQUIRED,
                                              f"{attribute} is required", raw)]
        return None, []

    violations = []
    if isinstance(field_type, EnumRef):
        if raw in field_type.literals:
            return EnumVal(field_type.name, raw), []
        return None, [ValidationViolation(
            attribute, Rule.ENUM_LITERAL,
            f"{attribute} must be one of {', '.join(field_type.literals)}", raw)]

    kind = field_type.name
    value: Value = raw
    if kind in ("MWString", "Email"):
        v = _length_violation(attribute, raw, c)
        if v:
            violations.append(v)
        if kind == "Email" and not EMAIL_RE.fullmatch(raw):
            violations.append(ValidationViolation(
                attribute, Rule.EMAIL_FORMAT, f"{attribute} must look like name@domain.tld", raw))
    elif kind == "Number":
        if NUMBER_RE.fullmatch(raw) and INT64_MIN <= int(raw) <= INT64_MAX:
            value = int(raw)
        else:
            violations.append(ValidationViolation(
                attribute, Rule.NUMBER_FORMAT, f"{attribute} must be a whole number", raw))
    elif kind == "MWDate":
        try:
            if not DATE_RE.fullmatch(raw):
                raise ValueError(raw)
            value = dt.date.fromisoformat(raw)
        except ValueError:
            violations.append(ValidationViolation(
                attribute, Rule.DATE_FORMAT, f"{attribute} must be a date YYYY-MM-DD", raw))
    else:
        raise ValueError(f"cannot validate values of type {kind}")
    if violations:
        return None, violations
    return value, []
