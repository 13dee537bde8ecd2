"""
Object memory of the interpreter.

Every object (global, local, parameter, heap block) is a byte array with a
per-byte poison map. Addresses are (object, offset) pairs, so arithmetic that
leaves an object stays representable and is caught only when accessed. Each
object also gets a flat address so pointers can be compared, subtracted and
converted to integers.
"""
import bisect
from dataclasses import dataclass, field
from typing import Dict, List, Optional

LIVE = 'live'
FREED = 'freed'
DEAD = 'dead'

GLOBAL = 'global'
STACK = 'stack'
HEAP = 'heap'

_FLAT_START = 0x10000
_FLAT_GAP = 64


@dataclass(eq=False)
class Obj:
    oid: int
    size: int
    storage: str
    name: str
    flat: int
    data: bytearray
    poison: bytearray
    ptrs: Dict[int, 'Ptr'] = field(default_factory=dict)
    state: str = LIVE
    decl: Optional[int] = None

    def __repr__(self):
        return f"<Obj {self.oid} {self.name} {self.storage} {self.size}B {self.state}>"


@dataclass(frozen=True)
class Ptr:
    obj: Optional[Obj]
    offset: int = 0

    @property
    def is_null(self) -> bool:
        return self.obj is None and self.offset == 0

    @property
    def flat(self) -> int:
        return (self.obj.flat if self.obj is not None else 0) + self.offset

    def add(self, delta: int) -> 'Ptr':
        return Ptr(self.obj, self.offset + delta)

    def __eq__(self, other):
        return isinstance(other, Ptr) and self.flat == other.flat

    def __hash__(self):
        return hash(self.flat)


NULL = Ptr(None, 0)


class Uninit:
    """A value read from storage that was never written."""
    __slots__ = ('value',)

    def __init__(self, value):
        self.value = value

    def __repr__(self):
        return f"Uninit({self.value!r})"


@dataclass
class Blob:
    """Bytes of an aggregate value (struct copy, by-value argument or return)."""
    data: bytes
    poison: bytes
    ptrs: Dict[int, Ptr]


def strip(value):
    """(raw value, poisoned)."""
    if isinstance(value, Uninit):
        return value.value, True
    return value, False


class Memory:
    def __init__(self):
        self.objects: List[Obj] = []
        self._flats: List[int] = []
        self._next_flat = _FLAT_START

    def allocate(self, size: int, storage: str, name: str, poisoned: bool, decl=None) -> Obj:
        size = max(int(size), 0)
        flat = self._next_flat
        self._next_flat = (flat + max(size, 1) + _FLAT_GAP + 15) // 16 * 16
        obj = Obj(len(self.objects), size, storage, name, flat, bytearray(size),
                  bytearray([1 if poisoned else 0]) * size, decl=decl)
        self.objects.append(obj)
        self._flats.append(flat)
        return obj

    def from_flat(self, address: int) -> Ptr:
        if address == 0:
            return NULL
        i = bisect.bisect_right(self._flats, address) - 1
        if i >= 0:
            obj = self.objects[i]
            if address <= obj.flat + obj.size:
                return Ptr(obj, address - obj.flat)
        return Ptr(None, address)

    # raw access, bounds already checked by the caller ---------------------

    @staticmethod
    def in_bounds(ptr: Ptr, size: int) -> bool:
        return ptr.obj is not None and 0 <= ptr.offset and ptr.offset + size <= ptr.obj.size

    def _drop_ptrs(self, obj: Obj, start: int, end: int):
        for off in [o for o in obj.ptrs if o < end and o + 8 > start]:
            del obj.ptrs[off]

    def load_int(self, ptr: Ptr, size: int, signed: bool):
        obj, off = ptr.obj, ptr.offset
        value = int.from_bytes(obj.data[off:off + size], 'little', signed=signed)
        if any(obj.poison[off:off + size]):
            return Uninit(value)
        return value

    def store_int(self, ptr: Ptr, size: int, value: int):
        raw, poisoned = strip(value)
        if isinstance(raw, Ptr):
            raw = raw.flat
        obj, off = ptr.obj, ptr.offset
        obj.data[off:off + size] = (raw & ((1 << (8 * size)) - 1)).to_bytes(size, 'little')
        obj.poison[off:off + size] = bytes([1 if poisoned else 0]) * size
        self._drop_ptrs(obj, off, off + size)

    def load_ptr(self, ptr: Ptr):
        obj, off = ptr.obj, ptr.offset
        poisoned = any(obj.poison[off:off + 8])
        if off in obj.ptrs:
            value = obj.ptrs[off]
        else:
            value = self.from_flat(int.from_bytes(obj.data[off:off + 8], 'little'))
        return Uninit(value) if poisoned else value

    def store_ptr(self, ptr: Ptr, value):
        raw, poisoned = strip(value)
        if not isinstance(raw, Ptr):
            raw = self.from_flat(int(raw) & ((1 << 64) - 1))
        obj, off = ptr.obj, ptr.offset
        self._drop_ptrs(obj, off, off + 8)
        obj.data[off:off + 8] = (raw.flat & ((1 << 64) - 1)).to_bytes(8, 'little')
        obj.poison[off:off + 8] = bytes([1 if poisoned else 0]) * 8
        if raw.obj is not None:
            obj.ptrs[off] = raw

    def load_blob(self, ptr: Ptr, size: int) -> Blob:
        obj, off = ptr.obj, ptr.offset
        ptrs = {o - off: p for o, p in obj.ptrs.items() if off <= o < off + size}
        return Blob(bytes(obj.data[off:off + size]), bytes(obj.poison[off:off + size]), ptrs)

    def store_blob(self, ptr: Ptr, blob: Blob):
        obj, off = ptr.obj, ptr.offset
        size = len(blob.data)
        self._drop_ptrs(obj, off, off + size)
        obj.data[off:off + size] = blob.data
        obj.poison[off:off + size] = blob.poison
        for o, p in blob.ptrs.items():
            obj.ptrs[off + o] = p

    def fill_zero(self, obj: Obj):
        obj.data[:] = bytes(obj.size)
        obj.poison[:] = bytes(obj.size)
        obj.ptrs.clear()
