"""
C types of the supported subset and the integer arithmetic rules over them.

Layout follows the LP64 ABI: char 1, short 2, int 4, long/long long/pointers 8.
"""
import re
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

from .exceptions import LangError


@dataclass(frozen=True)
class IntType:
    name: str
    width: int
    signed: bool

    @property
    def size(self) -> int:
        return self.width // 8

    @property
    def align(self) -> int:
        return self.size

    @property
    def min(self) -> int:
        return -(1 << (self.width - 1)) if self.signed else 0

    @property
    def max(self) -> int:
        return (1 << (self.width - 1)) - 1 if self.signed else (1 << self.width) - 1

    def wrap(self, value: int) -> int:
        """Two's complement truncation of value to this type."""
        value &= (1 << self.width) - 1
        if self.signed and value >= 1 << (self.width - 1):
            value -= 1 << self.width
        return value

    def contains(self, value: int) -> bool:
        return self.min <= value <= self.max

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class VoidType:
    size: int = 1
    align: int = 1

    def __str__(self):
        return 'void'


@dataclass(frozen=True)
class PointerType:
    target: 'CType'
    size: int = 8
    align: int = 8

    def __str__(self):
        return f"{self.target} *"


@dataclass(frozen=True)
class ArrayType:
    elem: 'CType'
    length: int

    @property
    def size(self) -> int:
        return self.elem.size * self.length

    @property
    def align(self) -> int:
        return self.elem.align

    def __str__(self):
        return f"{self.elem}[{self.length}]"


@dataclass(frozen=True)
class StructField:
    name: str
    type: 'CType'
    offset: int


@dataclass(eq=False)
class StructType:
    """A struct tag; fields are filled in once the definition is seen."""
    tag: str
    fields: Tuple[StructField, ...] = ()
    size: int = 0
    align: int = 1
    complete: bool = False

    def __eq__(self, other):
        return isinstance(other, StructType) and other.tag == self.tag

    def __hash__(self):
        return hash(('struct', self.tag))

    def layout(self, members):
        """Lay out (name, type) members with natural alignment."""
        offset = 0
        align = 1
        fields = []
        for name, ctype in members:
            offset = _round_up(offset, ctype.align)
            fields.append(StructField(name, ctype, offset))
            offset += ctype.size
            align = max(align, ctype.align)
        self.fields = tuple(fields)
        self.align = align
        self.size = max(_round_up(offset, align), 1)
        self.complete = True

    def field(self, name) -> StructField:
        for f in self.fields:
            if f.name == name:
                return f
        raise LangError(f"struct {self.tag} has no field {name}")

    def __str__(self):
        return f"struct {self.tag}"


@dataclass(frozen=True)
class FuncType:
    ret: 'CType'
    params: Tuple['CType', ...] = field(default_factory=tuple)
    variadic: bool = False
    size: int = 1
    align: int = 1

    def __str__(self):
        return f"{self.ret} (*)({', '.join(str(p) for p in self.params)})"


CType = Union[IntType, VoidType, PointerType, ArrayType, StructType, FuncType]


def _round_up(value, align):
    return (value + align - 1) // align * align


CHAR = IntType('char', 8, True)
SCHAR = IntType('signed char', 8, True)
UCHAR = IntType('unsigned char', 8, False)
SHORT = IntType('short', 16, True)
USHORT = IntType('unsigned short', 16, False)
INT = IntType('int', 32, True)
UINT = IntType('unsigned int', 32, False)
LONG = IntType('long', 64, True)
ULONG = IntType('unsigned long', 64, False)
LLONG = IntType('long long', 64, True)
ULLONG = IntType('unsigned long long', 64, False)
VOID = VoidType()

# Spellings accepted in declarations, keyed by the sorted specifier words.
_SPECIFIERS = {
    ('char',): CHAR,
    ('char', 'signed'): SCHAR,
    ('char', 'unsigned'): UCHAR,
    ('short',): SHORT,
    ('int', 'short'): SHORT,
    ('short', 'signed'): SHORT,
    ('int', 'short', 'signed'): SHORT,
    ('short', 'unsigned'): USHORT,
    ('int', 'short', 'unsigned'): USHORT,
    ('int',): INT,
    ('signed',): INT,
    ('int', 'signed'): INT,
    ('unsigned',): UINT,
    ('int', 'unsigned'): UINT,
    ('long',): LONG,
    ('int', 'long'): LONG,
    ('long', 'signed'): LONG,
    ('int', 'long', 'signed'): LONG,
    ('long', 'unsigned'): ULONG,
    ('int', 'long', 'unsigned'): ULONG,
    ('long', 'long'): LLONG,
    ('int', 'long', 'long'): LLONG,
    ('long', 'long', 'signed'): LLONG,
    ('int', 'long', 'long', 'signed'): LLONG,
    ('long', 'long', 'unsigned'): ULLONG,
    ('int', 'long', 'long', 'unsigned'): ULLONG,
    ('void',): VOID,
}

# Fixed-width typedefs supplied by the prelude.
TYPEDEFS = {
    'int8_t': IntType('int8_t', 8, True),
    'uint8_t': IntType('uint8_t', 8, False),
    'int16_t': IntType('int16_t', 16, True),
    'uint16_t': IntType('uint16_t', 16, False),
    'int32_t': IntType('int32_t', 32, True),
    'uint32_t': IntType('uint32_t', 32, False),
    'int64_t': IntType('int64_t', 64, True),
    'uint64_t': IntType('uint64_t', 64, False),
    'size_t': IntType('size_t', 64, False),
}

_TYPEDEF_SPELLING = {
    'int8_t': 'signed char',
    'uint8_t': 'unsigned char',
    'int16_t': 'short',
    'uint16_t': 'unsigned short',
    'int32_t': 'int',
    'uint32_t': 'unsigned int',
    'int64_t': 'long',
    'uint64_t': 'unsigned long',
    'size_t': 'unsigned long',
}


def typedef_prelude() -> str:
    return ''.join(f"typedef {spelling} {name};\n" for name, spelling in _TYPEDEF_SPELLING.items())


def scalar_from_names(names) -> Optional[CType]:
    """Map declaration specifier words (e.g. ['unsigned', 'long']) to a type."""
    if len(names) == 1 and names[0] in TYPEDEFS:
        return TYPEDEFS[names[0]]
    return _SPECIFIERS.get(tuple(sorted(names)))


def is_integer(ctype) -> bool:
    return isinstance(ctype, IntType)


def is_pointer(ctype) -> bool:
    return isinstance(ctype, PointerType)


def is_scalar(ctype) -> bool:
    return isinstance(ctype, (IntType, PointerType))


def decay(ctype):
    """Array-to-pointer and function-to-pointer decay."""
    if isinstance(ctype, ArrayType):
        return PointerType(ctype.elem)
    if isinstance(ctype, FuncType):
        return PointerType(ctype)
    return ctype


def promote(ctype: IntType) -> IntType:
    """Integer promotion."""
    if ctype.width < 32:
        return INT
    return ctype


def rank(ctype: IntType) -> int:
    return {8: 1, 16: 2, 32: 3, 64: 4}[ctype.width] * 2 + (1 if 'long long' in ctype.name else 0)


def usual_arithmetic(a: IntType, b: IntType) -> IntType:
    a, b = promote(canonical(a)), promote(canonical(b))
    if a == b:
        return a
    if a.signed == b.signed:
        return a if rank(a) >= rank(b) else b
    unsigned, signed = (a, b) if not a.signed else (b, a)
    if rank(unsigned) >= rank(signed):
        return unsigned
    if signed.width > unsigned.width:
        return signed
    return IntType('unsigned ' + signed.name, signed.width, False)


def canonical(ctype: IntType) -> IntType:
    """Plain C spelling of an integer type (typedef names map to their base type)."""
    if ctype.name in _TYPEDEF_SPELLING:
        return scalar_from_names(_TYPEDEF_SPELLING[ctype.name].split())
    return ctype


_INT_LITERAL = re.compile(r'^(0[xX][0-9a-fA-F]+|0[0-7]*|[1-9][0-9]*)([uUlL]*)$')

_ESCAPES = {'n': 10, 't': 9, 'r': 13, '0': 0, '\\': 92, "'": 39, '"': 34, 'a': 7, 'b': 8,
            'f': 12, 'v': 11, '?': 63}


def parse_int_literal(text: str) -> Tuple[int, IntType]:
    """Value and type of an integer constant, per the C rules for suffixes and bases."""
    m = _INT_LITERAL.match(text)
    if not m:
        raise LangError(f"bad integer literal {text!r}")
    digits, suffix = m.group(1), m.group(2).lower()
    if digits.startswith(('0x', '0X')):
        value = int(digits, 16)
    elif digits.startswith('0') and len(digits) > 1:
        value = int(digits, 8)
    else:
        value = int(digits)
    decimal = not digits.startswith('0') or digits == '0'
    unsigned = 'u' in suffix
    longs = suffix.count('l')
    if unsigned:
        candidates = [UINT, ULONG, ULLONG][min(longs, 2):]
    elif decimal:
        candidates = [INT, LONG, LLONG][min(longs, 2):]
    else:
        candidates = [INT, UINT, LONG, ULONG, LLONG, ULLONG][min(longs, 2) * 2:]
    for ctype in candidates:
        if ctype.contains(value):
            return value, ctype
    return value & ((1 << 64) - 1), ULLONG


def parse_char_literal(text: str) -> int:
    body = text[1:-1]
    if not body.startswith('\\'):
        if len(body) != 1:
            raise LangError(f"multi-character constant {text}")
        return CHAR.wrap(ord(body))
    esc = body[1:]
    if esc.startswith('x'):
        return CHAR.wrap(int(esc[1:], 16))
    if esc and esc[0] in '01234567' and len(esc) > 1:
        return CHAR.wrap(int(esc, 8))
    if esc in _ESCAPES:
        return _ESCAPES[esc]
    raise LangError(f"unknown escape in {text}")


def int_literal_text(value: int, ctype: IntType) -> Optional[str]:
    """Suffixed spelling of a non-negative value, or None if it needs an expression."""
    if value < 0:
        return None
    suffix = ''
    if not ctype.signed:
        suffix += 'U'
    if ctype.width == 64:
        suffix += 'LL' if 'long long' in ctype.name else 'L'
    return f"{value}{suffix}"
