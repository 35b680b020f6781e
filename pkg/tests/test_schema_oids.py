"""Schema resolution (the Abstract) and object-id packing."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skyql import oids
from skyql.errors import IndexOutOfRange, NotALink, UnknownClass, UnknownMember
from skyql.schema import Schema


@pytest.fixture(scope="module")
def schema():
    return Schema.default()


def test_resolve_class_and_aliases(schema):
    assert schema.resolve_class("Galaxy").parent == "Tag"
    assert schema.resolve_class("Primary").name == "PhotoPrimary"
    assert schema.resolve_class("PhotoTag").name == "Tag"
    assert schema.resolve_class("field").name == "Field"
    with pytest.raises(UnknownClass):
        schema.resolve_class("Galaxie")
    with pytest.raises(UnknownClass):
        schema.resolve_class("galaxy")  # case-sensitive


def test_describe_member(schema):
    g = schema.resolve_class("Galaxy")
    m = schema.describe_member(g, "reddening")
    assert m.kind == "array" and m.value_type == "float32" and m.array_length == 5
    m2 = schema.describe_member(g, "field.psfWidth")
    assert m2.kind == "array" and m2.owner == "Field"
    link = schema.describe_member(g, "parent")
    assert link.kind == "association-link"
    with pytest.raises(UnknownMember):
        schema.describe_member(g, "nonesuch")
    with pytest.raises(NotALink):
        schema.describe_member(g, "ra.something")
    with pytest.raises(IndexOutOfRange):
        schema.describe_member(g, "petroMag[7]")


def test_describe_member_stable_under_alias(schema):
    via_alias = schema.describe_member(schema.resolve_class("Primary"), "modelMag")
    via_name = schema.describe_member(schema.resolve_class("PhotoPrimary"), "modelMag")
    assert via_alias == via_name


def test_view_class_and_subclasses(schema):
    pp = schema.resolve_class("PhotoPrimary")
    assert pp.view_of == "Tag"
    assert pp.storage_class().name == "Tag"
    leaves = {c.name for c in pp.leaf_classes()}
    assert leaves == {"Galaxy", "Star", "Sky", "Unknown"}
    assert schema.identity_member(pp) == "objID"
    assert schema.identity_member(schema.resolve_class("SpecObj")) == "spec_ID"
    assert schema.identity_member(schema.resolve_class("Galaxy")) == "objID"


def test_object_type_mapping(schema):
    assert schema.container_class_for_object_type(3).name == "Galaxy"
    assert schema.container_class_for_object_type(6).name == "Star"


def test_function_members_have_expressions(schema):
    tag = schema.resolve_class("Tag")
    u = tag.member_map()["u"]
    assert u.kind == "function" and u.expr == "modelMag[0]" and u.flux_band == 0


@settings(max_examples=300, deadline=None)
@given(db=st.integers(0, 0xFFFE), cont=st.integers(0, 0xFFFF),
       slot=st.integers(0, 0xFFFFFFFF))
def test_oid_roundtrip(db, cont, slot):
    packed = oids.encode(db, cont, slot)
    obj = oids.decode(packed)
    assert (obj.database, obj.container, obj.slot) == (db, cont, slot)
    assert obj.encode() == packed


def test_oid_bounds():
    with pytest.raises(ValueError):
        oids.ObjectId(0xFFFF, 0, 0)
    with pytest.raises(ValueError):
        oids.ObjectId(0, 0, 0x100000000)
