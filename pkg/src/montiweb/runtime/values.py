"""Runtime value representation.

Strings (MWString, Email) are ``str``, Number is ``int``, MWDate is
``datetime.date``, enum values are :class:`EnumVal`, references are
:class:`ObjectId` or lists of them, and ``None`` marks an absent value.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True, order=True)
class ObjectId:
    serial: int

    def __str__(self):
        return f"#{self.serial}"


@dataclass(frozen=True)
class EnumVal:
    enum: str
    literal: str

    def __str__(self):
        return f"{self.enum}.{self.literal}"


Value = Union[str, int, dt.date, EnumVal, ObjectId, list, None]


def encode_value(value: Value):
    """JSON-ready form used in traces and snapshots."""
    if isinstance(value, list):
        return [str(v) for v in value]
    if isinstance(value, (ObjectId, EnumVal, dt.date)):
        return str(value)
    return value
