"""Runtime schema metadata: classes, members, associations, aliases, constants.

The schema is loaded from a JSON definition file and validated on load.  Everything
else in the package (parser, planner, engine, loader, oracle) resolves names through
this module rather than hard-coding the data model.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import IndexOutOfRange, NotALink, UnknownClass, UnknownMember

VALUE_TYPES = {"int32", "int64", "float32", "float64", "string", "bitfield64"}
INT_TYPES = {"int32", "int64", "bitfield64"}
FLOAT_TYPES = {"float32", "float64"}


@dataclass(frozen=True)
class MemberDescriptor:
    name: str
    kind: str                      # basic | array | function | association-link
    value_type: str
    array_length: int | None = None
    io_format: str = "%s"
    expr: str | None = None        # function members: SXQL expression over stored members
    flux_band: int | None = None   # position in the ugriz band order, if flux-indexed
    owner: str = ""                # class that declared the member

    def __post_init__(self):
        if self.kind == "array" and not self.array_length:
            raise ValueError(f"array member {self.name} needs array_length")
        if self.kind != "array" and self.array_length is not None:
            raise ValueError(f"non-array member {self.name} must not set array_length")


@dataclass(frozen=True)
class AssociationDescriptor:
    name: str
    target_class: str
    arity: str                     # to-one | to-many
    owner: str = ""

    @property
    def to_many(self) -> bool:
        return self.arity == "to-many"


@dataclass
class SchemaClass:
    name: str
    parent: str | None = None
    members: list[MemberDescriptor] = field(default_factory=list)
    associations: list[AssociationDescriptor] = field(default_factory=list)
    aliases: list[str] = field(default_factory=list)
    has_containers: bool = False
    object_type: int | None = None   # tag leaf classes: their objType code
    view_of: str | None = None       # filtered view over another class
    view_filter: str | None = None   # SXQL predicate implied by the view
    identity: str | None = None      # natural-key member used by bench comparisons
    _schema: "Schema" = None         # back reference, set on load

    def member_map(self) -> dict[str, MemberDescriptor]:
        """Own plus inherited members (and the view base's, for view classes)."""
        out: dict[str, MemberDescriptor] = {}
        base = self._schema.classes.get(self.view_of) if self.view_of else None
        chain = []
        cls = base if base is not None else self
        while cls is not None:
            chain.append(cls)
            cls = self._schema.classes.get(cls.parent) if cls.parent else None
        for cls in reversed(chain):
            for m in cls.members:
                out[m.name] = m
        if base is not None:
            for m in self.members:
                out[m.name] = m
        return out

    def association_map(self) -> dict[str, AssociationDescriptor]:
        out: dict[str, AssociationDescriptor] = {}
        base = self._schema.classes.get(self.view_of) if self.view_of else None
        cls = base if base is not None else self
        while cls is not None:
            for a in cls.associations:
                out.setdefault(a.name, a)
            cls = self._schema.classes.get(cls.parent) if cls.parent else None
        return out

    def storage_class(self) -> "SchemaClass":
        """The class whose containers a scan of this class touches."""
        return self._schema.classes[self.view_of] if self.view_of else self

    def leaf_classes(self) -> list["SchemaClass"]:
        """Container-holding classes in this class's subtree (or the view base's)."""
        root = self.storage_class()
        out = []
        stack = [root]
        while stack:
            cls = stack.pop()
            if cls.has_containers:
                out.append(cls)
            stack.extend(c for c in self._schema.classes.values() if c.parent == cls.name)
        return sorted(out, key=lambda c: c.name)

    def is_subclass_of(self, other: "SchemaClass") -> bool:
        cls = self
        while cls is not None:
            if cls.name == other.name:
                return True
            cls = self._schema.classes.get(cls.parent) if cls.parent else None
        return False


class Schema:
    def __init__(self, doc: dict):
        self.doc = doc
        self.classes: dict[str, SchemaClass] = {}
        self.constants: dict[str, int] = {k: int(v) for k, v in doc.get("constants", {}).items()}
        self.macros: dict[str, str] = dict(doc.get("macros", {}))
        self.indexed_remap: dict[str, str] = dict(doc.get("indexed_remap", {}))
        self.band_order: list[str] = list(doc.get("band_order", []))
        self.tag_class: str = doc.get("tag_class", "")
        self._aliases: dict[str, str] = {}
        for name, cdoc in doc["classes"].items():
            members = [
                MemberDescriptor(
                    name=m["name"],
                    kind=m.get("kind", "basic"),
                    value_type=m["type"],
                    array_length=m.get("length"),
                    io_format=m.get("format", "%s"),
                    expr=m.get("expr"),
                    flux_band=m.get("flux_band"),
                    owner=name,
                )
                for m in cdoc.get("members", [])
            ]
            assocs = [
                AssociationDescriptor(a["name"], a["target"], a["arity"], owner=name)
                for a in cdoc.get("associations", [])
            ]
            cls = SchemaClass(
                name=name,
                parent=cdoc.get("parent"),
                members=members,
                associations=assocs,
                aliases=list(cdoc.get("aliases", [])),
                has_containers=bool(cdoc.get("containers", False)),
                object_type=cdoc.get("object_type"),
                view_of=cdoc.get("view_of"),
                view_filter=cdoc.get("filter"),
                identity=cdoc.get("identity"),
            )
            cls._schema = self
            self.classes[name] = cls
            for alias in cls.aliases:
                self._aliases[alias] = name
        self._validate()

    # -- loading ---------------------------------------------------------------

    @classmethod
    def from_file(cls, path: str | Path) -> "Schema":
        with open(path, "r", encoding="utf-8") as f:
            return cls(json.load(f))

    @classmethod
    def default(cls) -> "Schema":
        text = resources.files("skyql.data").joinpath("schema.json").read_text("utf-8")
        return cls(json.loads(text))

    def schema_hash(self) -> str:
        blob = json.dumps(self.doc, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def _validate(self):
        for cls in self.classes.values():
            # subclass graph is a tree: walk to a root without revisiting
            seen = set()
            cur = cls
            while cur.parent:
                if cur.parent in seen or cur.parent not in self.classes:
                    raise ValueError(f"bad parent chain at class {cls.name}")
                seen.add(cur.parent)
                cur = self.classes[cur.parent]
            names = [m.name for m in cls.member_map().values()]
            if len(names) != len(set(names)):
                raise ValueError(f"duplicate member names in class {cls.name}")
            for a in cls.associations:
                if a.target_class not in self.classes:
                    raise ValueError(f"association {cls.name}.{a.name} targets unknown class")
            if cls.view_of and cls.view_of not in self.classes:
                raise ValueError(f"view class {cls.name} over unknown base")
            for m in cls.members:
                if m.value_type not in VALUE_TYPES:
                    raise ValueError(f"bad value type {m.value_type} on {cls.name}.{m.name}")

    # -- the Abstract's resolution operations -----------------------------------

    def resolve_class(self, name_or_alias: str) -> SchemaClass:
        """Case-sensitive class lookup through names and aliases."""
        if name_or_alias in self.classes:
            return self.classes[name_or_alias]
        if name_or_alias in self._aliases:
            return self.classes[self._aliases[name_or_alias]]
        raise UnknownClass(name_or_alias)

    def describe_member(self, cls: SchemaClass, path: str) -> MemberDescriptor:
        """Descriptor of the terminal segment of a dot-separated member path.

        Intermediate segments must be association links; the terminal segment may be a
        member or a link (returned as an association-link descriptor).
        """
        segments = path.split(".")
        cur = cls
        for i, seg in enumerate(segments):
            name, index = seg, None
            if "[" in seg:
                name, rest = seg.split("[", 1)
                index = int(rest.rstrip("]"))
            members = cur.member_map()
            assocs = cur.association_map()
            terminal = i == len(segments) - 1
            if not terminal:
                if name in assocs:
                    cur = self.classes[assocs[name].target_class]
                    continue
                if name in members:
                    raise NotALink(f"{cur.name}.{name} is not an association link")
                raise UnknownMember(f"{cur.name}.{name}")
            if name in members:
                m = members[name]
                if index is not None:
                    if m.kind != "array":
                        raise IndexOutOfRange(f"{cur.name}.{name} is not an array")
                    if not 0 <= index < (m.array_length or 0):
                        raise IndexOutOfRange(f"{cur.name}.{name}[{index}]")
                return m
            if name in assocs:
                a = assocs[name]
                return MemberDescriptor(
                    name=a.name, kind="association-link", value_type="string", owner=cur.name
                )
            raise UnknownMember(f"{cur.name}.{name}")
        raise UnknownMember(path)

    def stored_members(self, cls: SchemaClass) -> list[MemberDescriptor]:
        """Members with storage (basic and array), in canonical schema order."""
        return [m for m in cls.member_map().values() if m.kind in ("basic", "array")]

    def identity_member(self, cls: SchemaClass) -> str:
        """Natural-key member name, inherited through parents and views."""
        cur = cls.storage_class()
        while cur is not None:
            if cur.identity:
                return cur.identity
            cur = self.classes.get(cur.parent) if cur.parent else None
        raise UnknownMember(f"class {cls.name} has no identity member")

    def container_class_for_object_type(self, object_type: int) -> SchemaClass:
        for cls in self.classes.values():
            if cls.object_type == object_type and cls.has_containers:
                return cls
        raise UnknownClass(f"no tag subclass for objType {object_type}")
