"""
Binary record format of the profile log.

Each record is 21 bytes, little-endian: a 1-byte tag, a 4-byte hook id and
two 8-byte signed payload words.

    RANGE   base, size       object allocated or entering scope
    VALUE   slot, value      operand value at a hook
    ACCESS  address, 0       address dereferenced at a hook
    FREE    address, 0       heap block released
    SCOPE   base, scope id   scope owning the object at base
"""
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List

from .exceptions import CorruptLog

RANGE = 1
VALUE = 2
ACCESS = 3
FREE = 4
SCOPE = 5

TAGS = {'RANGE': RANGE, 'VALUE': VALUE, 'ACCESS': ACCESS, 'FREE': FREE, 'SCOPE': SCOPE}
TAG_NAMES = {code: name for name, code in TAGS.items()}

_RECORD = struct.Struct('<Biqq')
RECORD_SIZE = _RECORD.size

_INT64 = 1 << 64


def _signed(value: int) -> int:
    value %= _INT64
    return value - _INT64 if value >= _INT64 >> 1 else value


@dataclass(frozen=True)
class Record:
    tag: int
    hook: int
    a: int
    b: int = 0

    @property
    def name(self) -> str:
        return TAG_NAMES[self.tag]


def encode_record(tag, hook: int, a: int, b: int = 0) -> bytes:
    if isinstance(tag, str):
        tag = TAGS[tag]
    return _RECORD.pack(tag, hook, _signed(a), _signed(b))


def iter_records(data: bytes) -> Iterator[Record]:
    if len(data) % RECORD_SIZE:
        raise CorruptLog(f"log length {len(data)} is not a multiple of {RECORD_SIZE}")
    for tag, hook, a, b in _RECORD.iter_unpack(data):
        if tag not in TAG_NAMES:
            raise CorruptLog(f"unknown record tag {tag}")
        yield Record(tag, hook, a, b)


def decode_records(data: bytes) -> List[Record]:
    return list(iter_records(data))


def read_records(path) -> List[Record]:
    path = Path(path)
    if not path.exists():
        return []
    return decode_records(path.read_bytes())


class RecordWriter:
    """Recorder callable for the interpreter: appends records to a log file."""

    def __init__(self, path):
        self.path = Path(path)
        self._out = open(self.path, 'wb')

    def __call__(self, tag, hook, a, b=0):
        self._out.write(encode_record(tag, hook, a, b))

    def close(self):
        if not self._out.closed:
            self._out.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
