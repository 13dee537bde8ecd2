from enum import Enum


class UbKind(str, Enum):
    """Undefined behaviours a generated program can carry."""

    BUF_OVERFLOW_ARRAY = 'BufOverflowArray'
    BUF_OVERFLOW_POINTER = 'BufOverflowPointer'
    USE_AFTER_FREE = 'UseAfterFree'
    USE_AFTER_SCOPE = 'UseAfterScope'
    NULL_PTR_DEREF = 'NullPtrDeref'
    INTEGER_OVERFLOW = 'IntegerOverflow'
    SHIFT_OVERFLOW = 'ShiftOverflow'
    DIVIDE_BY_ZERO = 'DivideByZero'
    USE_OF_UNINIT_MEMORY = 'UseOfUninitMemory'

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, text: str) -> 'UbKind':
        """Accepts the value ('DivideByZero'), the member name or a dashed form ('divide-by-zero')."""
        key = text.strip().replace('-', '').replace('_', '').lower()
        for kind in cls:
            if kind.value.lower() == key or kind.name.replace('_', '').lower() == key:
                return kind
        raise ValueError(f"unknown UB kind '{text}'")


KIND_CHOICES = [(kind.value, kind.value) for kind in UbKind]

# Construct forms each kind may match.
CONSTRUCTS = {
    UbKind.BUF_OVERFLOW_ARRAY: frozenset({'a[x]'}),
    UbKind.BUF_OVERFLOW_POINTER: frozenset({'*p'}),
    UbKind.USE_AFTER_FREE: frozenset({'*p'}),
    UbKind.USE_AFTER_SCOPE: frozenset({'*p'}),
    UbKind.NULL_PTR_DEREF: frozenset({'*p'}),
    UbKind.INTEGER_OVERFLOW: frozenset({'x op y', 'x op= y'}),
    UbKind.SHIFT_OVERFLOW: frozenset({'x<<y', 'x<<=y'}),
    UbKind.DIVIDE_BY_ZERO: frozenset({'x/y', 'x/=y'}),
    UbKind.USE_OF_UNINIT_MEMORY: frozenset({'if(x)', 'while(x)'}),
}
