"""
Built-in seed generator.

Programs are input free and keep every int below 1009 in magnitude between
statements, so products of three values still fit in 32 bits. Each program is
run on minivm before it is handed out; one that is not UB free is thrown away.
"""
import logging
import random
from typing import List, Optional

from django.conf import settings

from lang.exceptions import LangError
from lang.parser import parse_program
from minivm.exceptions import VmError
from minivm.interpreter import eval_program
from minivm.outcomes import Normal

from .exceptions import SeedSourceError

logger = logging.getLogger(__name__)

BOUND = 1009


class _SeedWriter:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.n = rng.choice([4, 8, 16])
        self.recs = rng.randint(2, 4)
        self.vars = [f"v{i}" for i in range(rng.randint(3, 6))]
        self.offset = rng.randint(0, self.n // 2)
        self.lines: List[str] = []
        self.depth = 1

    def emit(self, text: str):
        self.lines.append('  ' * self.depth + text)

    def var(self) -> str:
        return self.rng.choice(self.vars)

    def atom(self) -> str:
        r = self.rng.random()
        if r < 0.6:
            return self.var()
        if r < 0.8:
            return str(self.rng.randint(0, 99))
        return f"g_arr[{self.var()} & {self.n - 1}]"

    def expr(self) -> str:
        op = self.rng.choice(['+', '-', '*'])
        text = f"{self.atom()} {op} {self.atom()}"
        if self.rng.random() < 0.3:
            text = f"({text}) {self.rng.choice(['+', '-', '*'])} {self.atom()}"
        return text

    # statements --------------------------------------------------------------

    def assign(self):
        self.emit(f"{self.var()} = ({self.expr()}) % {BOUND};")

    def shift(self):
        self.emit(f"{self.var()} = (({self.var()} & 255) << {self.rng.randint(1, 8)}) % {BOUND};")

    def divide(self):
        op = self.rng.choice(['/', '%'])
        self.emit(f"{self.var()} = {self.var()} {op} (({self.var()} & {self.rng.choice([3, 7, 15])}) + 1);")

    def array(self):
        if self.rng.random() < 0.5:
            self.emit(f"g_arr[{self.var()} & {self.n - 1}] = ({self.var()} + {self.rng.randint(0, 50)}) % {BOUND};")
        else:
            x = self.var()
            self.emit(f"{x} = ({x} + g_arr[{self.var()} & {self.n - 1}]) % {BOUND};")

    def pointer(self):
        j = self.rng.randint(0, self.n - 1 - self.offset)
        x = self.var()
        if self.rng.random() < 0.5:
            self.emit(f"{x} = ({x} + *(p + {j})) % {BOUND};")
        else:
            self.emit(f"*(p + {j}) = {self.var()} % 100;")

    def heap(self):
        j = self.rng.randint(0, self.n - 1)
        x = self.var()
        if self.rng.random() < 0.5:
            self.emit(f"{x} = ({x} + *(h + {j})) % {BOUND};")
        else:
            self.emit(f"*(h + {j}) = ({x} * 3) % {BOUND};")

    def record(self):
        i = self.rng.randint(0, self.recs - 1)
        field = self.rng.choice(['a', 'b'])
        x = self.var()
        r = self.rng.random()
        if r < 0.4:
            self.emit(f"g_recs[{i}].{field} = {x};")
        elif r < 0.7:
            self.emit(f"{x} = ({x} + g_recs[{i}].{field}) % {BOUND};")
        else:
            self.emit(f"{x} = ({x} + (*(rp + {i})).{field}) % {BOUND};")

    def call(self):
        r = self.rng.random()
        if r < 0.4:
            self.emit(f"{self.var()} = mix({self.var()}, {self.var()});")
        elif r < 0.7:
            x = self.var()
            self.emit(f"{x} = ({x} + sum_buf(h, {self.n})) % {BOUND};")
        else:
            self.emit(f"fold({self.var()});")

    def loop(self):
        c = self.rng.randint(1, 9)
        x = self.var()
        self.emit(f"for (i = 0; i < {self.rng.randint(1, self.n)}; i++) {{")
        self.depth += 1
        if self.rng.random() < 0.5:
            self.emit(f"h[i] = (g_arr[i] * {c} + {x}) % {BOUND};")
        else:
            self.emit(f"if (g_arr[i] > {x}) {{")
            self.depth += 1
            self.emit(f"{x} = ({x} + g_arr[i]) % {BOUND};")
            self.depth -= 1
            self.emit("} else {")
            self.depth += 1
            self.emit(f"{x} = ({x} + {c}) % {BOUND};")
            self.depth -= 1
            self.emit("}")
        self.depth -= 1
        self.emit("}")

    def countdown(self):
        x = self.var()
        self.emit(f"k = {self.rng.randint(2, 6)};")
        self.emit("while (k > 0) {")
        self.depth += 1
        self.emit(f"{x} = ({x} * 3 + k) % {BOUND};")
        self.emit("k = k - 1;")
        self.depth -= 1
        self.emit("}")

    def branch(self):
        self.emit(f"if ({self.var()} > {self.var()}) {{")
        self.depth += 1
        self.simple()
        self.depth -= 1
        self.emit("} else {")
        self.depth += 1
        self.simple()
        self.depth -= 1
        self.emit("}")

    def block(self):
        y = self.var()
        self.emit("{")
        self.depth += 1
        self.emit(f"int t = {self.var()} + {self.rng.randint(1, 99)};")
        self.emit(f"{y} = ({y} + t) % {BOUND};")
        self.depth -= 1
        self.emit("}")

    def simple(self):
        self.rng.choice([self.assign, self.shift, self.divide, self.array, self.pointer, self.heap,
                         self.record])()

    def statement(self):
        self.rng.choice([self.assign, self.shift, self.divide, self.array, self.pointer, self.heap,
                         self.record, self.call, self.loop, self.countdown, self.branch, self.block])()

    # program -----------------------------------------------------------------

    def program(self) -> str:
        rng = self.rng
        n = self.n
        values = ', '.join(str(rng.randint(0, 99)) for _ in range(n))
        head = [
            "struct rec {",
            "  int a;",
            "  int b;",
            "};",
            f"int g_arr[{n}] = {{{values}}};",
            f"struct rec g_recs[{self.recs}];",
            "int checksum = 0;",
            "int mix(int x, int y) {",
            f"  int r = (x * {rng.randint(2, 9)} + y) % {BOUND};",
            "  if (r < 0) {",
            "    r = -r;",
            "  }",
            "  return r;",
            "}",
            "int sum_buf(int *q, int n) {",
            "  int s = 0;",
            "  int j;",
            "  for (j = 0; j < n; j++) {",
            f"    s = (s + *(q + j)) % {BOUND};",
            "  }",
            "  return s;",
            "}",
            "int fold(int v) {",
            "  checksum = (checksum * 31 + v) % 1000003;",
            "  return checksum;",
            "}",
            "int main() {",
        ]
        for name in self.vars:
            self.emit(f"int {name} = {rng.randint(-50, 99)};")
        self.emit("int i;")
        self.emit("int k;")
        self.emit(f"int *p = &g_arr[{self.offset}];")
        self.emit("struct rec *rp = g_recs;")
        self.emit(f"int *h = malloc({4 * n});")
        self.emit(f"for (i = 0; i < {n}; i++) {{")
        self.emit(f"  h[i] = i * {rng.randint(1, 9)};")
        self.emit("}")
        for _ in range(rng.randint(6, 14)):
            self.statement()
        for name in self.vars:
            self.emit(f"fold({name});")
        self.emit(f"fold(sum_buf(h, {n}));")
        self.emit(f"fold(sum_buf(g_arr, {n}));")
        self.emit("free(h);")
        self.emit('printf("checksum = %d\\n", checksum);')
        self.emit("return 0;")
        return '\n'.join(head + self.lines + ['}']) + '\n'


def is_ub_free(text: str, step_limit: Optional[int] = None) -> bool:
    try:
        outcome = eval_program(parse_program(text), step_limit)
    except (LangError, VmError) as exc:
        logger.debug(f"generated seed rejected: {exc}")
        return False
    return isinstance(outcome, Normal) and not outcome.suppressed


def generate_seed(rng: Optional[random.Random] = None, attempts: int = 20) -> str:
    """A random UB-free program of the subset."""
    rng = rng or random.Random()
    step_limit = getattr(settings, 'UBF_VM_STEP_LIMIT', None)
    for _ in range(attempts):
        text = _SeedWriter(rng).program()
        if is_ub_free(text, step_limit):
            return text
    raise SeedSourceError(f"no UB-free seed in {attempts} attempts")
