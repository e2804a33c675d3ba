"""Typed in-memory object store with composition ownership."""

from __future__ import annotations

import datetime as dt
from collections import deque
from dataclasses import dataclass, field

from ..diagnostics import MWError
from ..linker import BaseType, ClassRef, ClassSymbol, EnumRef, Role, SymbolTable
from .values import EnumVal, ObjectId, Value, encode_value


class StoreError(MWError):
    pass


@dataclass
class StoredObject:
    id: ObjectId
    class_name: str
    fields: dict[str, Value]


@dataclass
class ChildSpec:
    """Values for a composition child, plus its own composition children."""

    values: dict[str, Value] = field(default_factory=dict)
    children: dict[str, list[ChildSpec]] = field(default_factory=dict)


def _many(role: Role) -> bool:
    return role.cardinality.max != 1


class ObjectStore:
    def __init__(self, table: SymbolTable):
        self.table = table
        self.objects: dict[ObjectId, StoredObject] = {}
        # child -> (parent, role)
        self.owners: dict[ObjectId, tuple[ObjectId, str]] = {}
        self._serial = 0

    # -- lookup -----------------------------------------------------------

    def get(self, oid: ObjectId) -> StoredObject:
        obj = self.objects.get(oid)
        if obj is None:
            raise StoreError("MW502", f"no object {oid}")
        return obj

    def __contains__(self, oid) -> bool:
        return oid in self.objects

    def __len__(self):
        return len(self.objects)

    def class_symbol(self, name: str) -> ClassSymbol:
        sym = self.table.classes.get(name)
        if sym is None:
            raise StoreError("MW502", f"unknown class {name!r}")
        return sym

    def children_of(self, oid: ObjectId) -> list[ObjectId]:
        return sorted(c for c, (p, _) in self.owners.items() if p == oid)

    def descendants(self, oid: ObjectId) -> list[ObjectId]:
        found = []
        queue = deque(self.children_of(oid))
        while queue:
            c = queue.popleft()
            found.append(c)
            queue.extend(self.children_of(c))
        return found

    def label(self, oid: ObjectId) -> str:
        """First non-empty MWString attribute, else the object id."""
        obj = self.get(oid)
        sym = self.class_symbol(obj.class_name)
        for name, t in sym.attributes.items():
            if t == BaseType("MWString") and obj.fields.get(name):
                return obj.fields[name]
        return str(oid)

    def find(self, class_name: str, label: str) -> ObjectId:
        matches = [oid for oid, obj in sorted(self.objects.items())
                   if obj.class_name == class_name and label in (str(oid), self.label(oid))]
        if len(matches) != 1:
            what = "no" if not matches else "more than one"
            raise StoreError("MW502", f"{what} {class_name} object labelled {label!r}")
        return matches[0]

    def snapshot(self, oid: ObjectId) -> dict:
        obj = self.get(oid)
        return {"id": str(oid), "class": obj.class_name,
                "fields": {k: encode_value(v) for k, v in obj.fields.items()}}

    # -- creation ---------------------------------------------------------

    def _check_value(self, sym: ClassSymbol, name: str, value: Value):
        t = sym.attributes.get(name)
        if t is None or isinstance(t, ClassRef):
            raise StoreError("MW502", f"class {sym.name!r} has no settable attribute {name!r}")
        if value is None:
            return
        if isinstance(t, EnumRef):
            ok = isinstance(value, EnumVal) and value.enum == t.name and value.literal in t.literals
        elif t.name == "Number":
            ok = isinstance(value, int) and not isinstance(value, bool)
        elif t.name == "MWDate":
            ok = isinstance(value, dt.date)
        else:
            ok = isinstance(value, str)
        if not ok:
            raise StoreError("MW502", f"value {value!r} does not fit {sym.name}.{name} ({t.name})")

    def _check_spec(self, class_name: str, values: dict, children: dict, depth: int = 0):
        sym = self.class_symbol(class_name)
        for name, value in values.items():
            self._check_value(sym, name, value)
        for role_name in children:
            role = sym.roles.get(role_name)
            if role is None or not role.is_composition:
                raise StoreError("MW502", f"{class_name!r} has no composition role {role_name!r}")
        for role in sym.compositions:
            specs = children.get(role.name, [])
            if not role.cardinality.allows(len(specs)):
                raise StoreError("MW501", f"{class_name}.{role.name} needs "
                                 f"[{role.cardinality}] children, got {len(specs)}")
            if depth > 64:
                raise StoreError("MW501", "composition nesting is too deep")
            for spec in specs:
                self._check_spec(role.target, spec.values, spec.children, depth + 1)

    def _insert(self, class_name: str, values: dict, children: dict) -> ObjectId:
        sym = self.table.classes[class_name]
        self._serial += 1
        oid = ObjectId(self._serial)
        fields: dict[str, Value] = {}
        for name, t in sym.attributes.items():
            if not isinstance(t, ClassRef):
                fields[name] = values.get(name)
        for role in sym.roles.values():
            fields[role.name] = [] if _many(role) else None
        obj = StoredObject(oid, class_name, fields)
        self.objects[oid] = obj
        for role in sym.compositions:
            for spec in children.get(role.name, []):
                child = self._insert(role.target, spec.values, spec.children)
                self.owners[child] = (oid, role.name)
                if _many(role):
                    fields[role.name].append(child)
                else:
                    fields[role.name] = child
        return oid

    def create_object(self, class_name: str, values: dict[str, Value] | None = None,
                      children: dict[str, list[ChildSpec]] | None = None) -> ObjectId:
        """Create an object together with its composition children.

        Every composition role of the class (and of each child) is checked
        against its cardinality before anything is inserted.
        """
        values = values or {}
        children = children or {}
        self._check_spec(class_name, values, children)
        return self._insert(class_name, values, children)

    def update_object(self, oid: ObjectId, values: dict[str, Value]):
        obj = self.get(oid)
        sym = self.class_symbol(obj.class_name)
        for name, value in values.items():
            self._check_value(sym, name, value)
        obj.fields.update(values)

    def replace_children(self, oid: ObjectId, role_name: str, specs: list[ChildSpec]):
        obj = self.get(oid)
        role = self.class_symbol(obj.class_name).roles.get(role_name)
        if role is None or not role.is_composition:
            raise StoreError("MW502", f"{obj.class_name!r} has no composition role {role_name!r}")
        if not role.cardinality.allows(len(specs)):
            raise StoreError("MW501", f"{obj.class_name}.{role_name} needs [{role.cardinality}] "
                             f"children, got {len(specs)}")
        for spec in specs:
            self._check_spec(role.target, spec.values, spec.children)
        for child in [c for c, (p, r) in self.owners.items() if p == oid and r == role_name]:
            self.delete_object(child)
        for spec in specs:
            child = self._insert(role.target, spec.values, spec.children)
            self.owners[child] = (oid, role_name)
            if _many(role):
                obj.fields[role_name].append(child)
            else:
                obj.fields[role_name] = child

    # -- deletion and links -----------------------------------------------

    def delete_object(self, oid: ObjectId) -> set[ObjectId]:
        """Delete ``oid`` and everything it transitively contains.

        References from surviving objects into the deleted set are cleared.
        """
        self.get(oid)
        doomed = {oid, *self.descendants(oid)}
        for d in doomed:
            del self.objects[d]
            self.owners.pop(d, None)
        for obj in self.objects.values():
            for name, value in obj.fields.items():
                if isinstance(value, ObjectId) and value in doomed:
                    obj.fields[name] = None
                elif isinstance(value, list) and any(v in doomed for v in value):
                    obj.fields[name] = [v for v in value if v not in doomed]
        return doomed

    def link_objects(self, source: ObjectId, role_name: str, target: ObjectId):
        src = self.get(source)
        tgt = self.get(target)
        role = self.class_symbol(src.class_name).roles.get(role_name)
        if role is None:
            raise StoreError("MW502", f"{src.class_name!r} has no role {role_name!r}")
        if role.is_composition:
            raise StoreError("MW502", f"{src.class_name}.{role_name} is a composition; "
                             "its children are created with the parent")
        if tgt.class_name != role.target:
            raise StoreError("MW502", f"{src.class_name}.{role_name} expects a {role.target}, "
                             f"got a {tgt.class_name}")
        if not _many(role):
            src.fields[role_name] = target
            return
        current = src.fields[role_name]
        if target in current:
            return
        if role.cardinality.max is not None and len(current) >= role.cardinality.max:
            raise StoreError("MW501", f"{src.class_name}.{role_name} allows at most "
                             f"{role.cardinality.max} links")
        current.append(target)

    def set_links(self, source: ObjectId, role_name: str, targets: list[ObjectId]):
        """Replace all links of an association role."""
        src = self.get(source)
        role = self.class_symbol(src.class_name).roles.get(role_name)
        if role is not None and not role.is_composition:
            src.fields[role_name] = [] if _many(role) else None
        for t in targets:
            self.link_objects(source, role_name, t)

    # -- invariants -------------------------------------------------------

    def integrity_problems(self) -> list[str]:
        problems = []
        for oid, obj in self.objects.items():
            for name, value in obj.fields.items():
                refs = value if isinstance(value, list) else [value]
                if isinstance(value, list) and len(set(value)) != len(value):
                    problems.append(f"{oid}.{name} has duplicate references")
                for r in refs:
                    if isinstance(r, ObjectId) and r not in self.objects:
                        problems.append(f"{oid}.{name} points at missing {r}")
        for child, (parent, role_name) in self.owners.items():
            if child not in self.objects or parent not in self.objects:
                problems.append(f"ownership {child} <- {parent} refers to a missing object")
                continue
            pobj = self.objects[parent]
            role = self.table.classes[pobj.class_name].roles.get(role_name)
            held = pobj.fields.get(role_name)
            held = held if isinstance(held, list) else [held]
            if role is None or not role.is_composition or child not in held:
                problems.append(f"{child} is not held by its owner {parent}.{role_name}")
            elif self.objects[child].class_name != role.target:
                problems.append(f"{child} has class {self.objects[child].class_name}, "
                                f"expected {role.target}")
        return problems
