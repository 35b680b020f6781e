"""Object addresses: (database, container, slot) packed into one 64-bit value."""

from __future__ import annotations

from dataclasses import dataclass

NULL_OID = 0xFFFFFFFFFFFFFFFF  # absent to-one link


@dataclass(frozen=True, order=True)
class ObjectId:
    database: int
    container: int
    slot: int

    def __post_init__(self):
        if not 0 <= self.database < 0xFFFF:
            raise ValueError(f"database out of range: {self.database}")
        if not 0 <= self.container <= 0xFFFF:
            raise ValueError(f"container out of range: {self.container}")
        if not 0 <= self.slot <= 0xFFFFFFFF:
            raise ValueError(f"slot out of range: {self.slot}")

    def encode(self) -> int:
        return (self.database << 48) | (self.container << 32) | self.slot


def encode(database: int, container: int, slot: int) -> int:
    return (database << 48) | (container << 32) | slot


def decode(value: int) -> ObjectId:
    return ObjectId(value >> 48, (value >> 32) & 0xFFFF, value & 0xFFFFFFFF)
