import re

from .exceptions import UnsupportedConstruct
from .memory import Ptr, strip

_SPEC = re.compile(r'%(?P<flags>[-+ 0#]*)(?P<width>\d+)?(?:\.(?P<prec>\d+))?'
                   r'(?P<len>hh|h|ll|l|z)?(?P<conv>[diuxXcp%])')

_WIDTHS = {None: 32, 'hh': 8, 'h': 16, 'l': 64, 'll': 64, 'z': 64}

_SIMPLE_ESCAPES = {'n': '\n', 't': '\t', 'r': '\r', '\\': '\\', '"': '"', "'": "'",
                   'a': '\a', 'b': '\b', 'f': '\f', 'v': '\v', '?': '?', '0': '\0'}


def decode_string_literal(text: str) -> str:
    """Contents of a C string literal token (quotes included) with escapes resolved."""
    body = text[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch != '\\':
            out.append(ch)
            i += 1
            continue
        nxt = body[i + 1]
        if nxt == 'x':
            m = re.match(r'[0-9a-fA-F]+', body[i + 2:])
            out.append(chr(int(m.group(), 16) & 0xFF))
            i += 2 + len(m.group())
        elif nxt in '01234567':
            m = re.match(r'[0-7]{1,3}', body[i + 1:])
            out.append(chr(int(m.group(), 8) & 0xFF))
            i += 1 + len(m.group())
        else:
            out.append(_SIMPLE_ESCAPES.get(nxt, nxt))
            i += 2
    return ''.join(out)


def _reinterpret(value: int, width: int, signed: bool) -> int:
    value &= (1 << width) - 1
    if signed and value >= 1 << (width - 1):
        value -= 1 << width
    return value


def format_printf(fmt: str, args) -> str:
    """C printf restricted to integer conversions."""
    out = []
    pos = 0
    argi = 0
    for m in _SPEC.finditer(fmt):
        out.append(fmt[pos:m.start()])
        pos = m.end()
        conv = m.group('conv')
        if conv == '%':
            out.append('%')
            continue
        if argi >= len(args):
            raise UnsupportedConstruct("printf with fewer arguments than conversions")
        raw, _ = strip(args[argi])
        argi += 1
        spec = '%' + m.group('flags') + (m.group('width') or '') + (
            '.' + m.group('prec') if m.group('prec') else '')
        if conv == 'p':
            address = raw.flat if isinstance(raw, Ptr) else int(raw)
            out.append((spec + 's') % (hex(address) if address else '(nil)'))
            continue
        if isinstance(raw, Ptr):
            raw = raw.flat
        width = _WIDTHS[m.group('len')]
        if conv in 'di':
            out.append((spec + 'd') % _reinterpret(raw, width, True))
        elif conv == 'u':
            out.append((spec + 'd') % _reinterpret(raw, width, False))
        elif conv in 'xX':
            out.append((spec + conv) % _reinterpret(raw, width, False))
        else:
            out.append((spec + 'c') % chr(raw & 0xFF))
    out.append(fmt[pos:])
    return ''.join(out)
