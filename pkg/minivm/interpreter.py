"""
Reference interpreter for the C subset.

Execution stops at the first undefined behaviour unless the violation policy
says otherwise. A policy that ignores or elides a violation makes the
interpreter carry on with well-defined fallbacks (wrapping arithmetic, zero
reads and dropped writes outside objects, a zero quotient), and every later
violation is then passed over silently.
"""
import logging
import sys
from typing import Callable, Optional

from django.conf import settings
from pycparser import c_ast

from lang import types as T
from lang.printer import statement_text
from lang.scopes import BUILTIN, GLOBAL_SCOPE
from lang.tree import Ast, SourceLoc
from match.kinds import UbKind
from oracle.traces import SiteTrace, Terminal

from . import memory as M
from .exceptions import CallDepthExceeded, InvalidFree, UnsupportedConstruct
from .outcomes import Decision, Normal, StepLimit, Ub, Violation
from .printf import decode_string_literal, format_printf

logger = logging.getLogger(__name__)

MAX_CALL_DEPTH = 256

# Offsets from a null pointer below this are null dereferences, not wild accesses.
_NULL_PAGE = 4096

# Python frames needed per C call, with room for nested expressions.
_RECURSION_LIMIT = MAX_CALL_DEPTH * 40

Policy = Callable[[Violation], Decision]
Recorder = Callable[[str, int, int, int], None]


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


class _Stop(Exception):
    def __init__(self, violation):
        self.violation = violation


class _OutOfSteps(Exception):
    pass


class _Frame:
    __slots__ = ('env', 'scopes', 'name')

    def __init__(self, name):
        self.name = name
        self.env = {}
        self.scopes = [[]]


def _report_all(violation: Violation) -> Decision:
    return Decision.REPORT


class Interpreter:
    def __init__(self, ast: Ast, step_limit: int, policy: Optional[Policy] = None,
                 recorder: Optional[Recorder] = None, trace: bool = False):
        self.ast = ast
        self.step_limit = step_limit
        self.policy = policy or _report_all
        self.recorder = recorder
        self.tracing = trace
        self.mem = M.Memory()
        self.globals = {}
        self.statics = {}
        self.frames = []
        self.out = []
        self.steps = 0
        self.sites = []
        self.suppressed = []
        self.elided = set()
        self.silenced = False
        self._eval = {
            c_ast.Constant: self._constant,
            c_ast.ID: self._id,
            c_ast.UnaryOp: self._unary,
            c_ast.BinaryOp: self._binary,
            c_ast.Assignment: self._assignment,
            c_ast.Cast: self._cast,
            c_ast.TernaryOp: self._ternary,
            c_ast.FuncCall: self._call,
            c_ast.ArrayRef: self._access,
            c_ast.StructRef: self._access,
        }

    # bookkeeping -------------------------------------------------------------

    def tick(self):
        self.steps += 1
        if self.steps > self.step_limit:
            raise _OutOfSteps()

    def loc(self, node) -> SourceLoc:
        return self.ast.locs[self.ast.nid(node)]

    def site(self, node):
        if self.tracing:
            self.sites.append(self.loc(node))

    def type_of(self, node):
        return self.ast.type_of(node)

    def violation(self, kind: UbKind, node, detail: str):
        """Consult the policy; returns only if execution continues past the violation."""
        if self.silenced:
            self.suppressed.append((Violation(kind, self.loc(node), detail), Decision.IGNORE))
            return
        found = Violation(kind, self.loc(node), detail, statement_text(self.ast, self.ast.nid(node)))
        decision = self.policy(found)
        if decision == Decision.REPORT:
            raise _Stop(found)
        logger.debug(f"continuing past {found} ({decision.value})")
        self.silenced = True
        self.suppressed.append((found, decision))
        if decision == Decision.ELIDE:
            self.elided.add(found.site)

    def record(self, tag, site, a, b=0):
        if self.recorder is not None:
            self.recorder(tag, site, a, b)

    # running -----------------------------------------------------------------

    def run(self):
        sys.setrecursionlimit(max(sys.getrecursionlimit(), _RECURSION_LIMIT))
        try:
            self._init_globals()
            main = self.ast.function('main')
            if main is None:
                raise UnsupportedConstruct("program without main")
            value = self._invoke(main, [])
            raw, _ = M.strip(value)
            if raw is None:
                raw = 0
            outcome = Normal(int(raw) & 0xFF, self.stdout, tuple(self.suppressed))
            terminal, truncated = Terminal.NORMAL_EXIT, False
        except _Stop as stop:
            v = stop.violation
            outcome = Ub(v.kind, v.site, v.detail, self.stdout)
            terminal, truncated = Terminal.CRASH, False
        except _OutOfSteps:
            outcome = StepLimit(self.stdout, self.steps)
            terminal, truncated = Terminal.TIMEOUT, True
        sites = [s for s in self.sites if s not in self.elided]
        return outcome, SiteTrace.build(sites, truncated, terminal)

    @property
    def stdout(self) -> str:
        return ''.join(self.out)

    def _init_globals(self):
        for decl in self.ast.globals:
            if decl.name is None:
                continue
            nid = self.ast.nid(decl)
            ctype = self.ast.decl_type(nid)
            if isinstance(ctype, T.FuncType) or 'extern' in (decl.storage or ()):
                continue
            obj = self.mem.allocate(ctype.size, M.GLOBAL, decl.name, poisoned=False, decl=nid)
            self.globals[nid] = obj
            if decl.init is not None:
                self._initialize(M.Ptr(obj, 0), ctype, decl.init)

    # memory access -----------------------------------------------------------

    def pointer(self, value) -> M.Ptr:
        raw, _ = M.strip(value)
        if isinstance(raw, M.Ptr):
            return raw
        return self.mem.from_flat(int(raw) & ((1 << 64) - 1))

    def memcheck(self, node, ptr: M.Ptr, size: int) -> bool:
        self.site(node)
        obj = ptr.obj
        if obj is None:
            if abs(ptr.offset) < _NULL_PAGE:
                self.violation(UbKind.NULL_PTR_DEREF, node, "null pointer dereference")
            else:
                self.violation(UbKind.BUF_OVERFLOW_POINTER, node, f"wild address {ptr.offset:#x}")
            return False
        if obj.state == M.FREED:
            self.violation(UbKind.USE_AFTER_FREE, node, f"access to freed {obj.name}")
            return False
        if obj.state == M.DEAD:
            self.violation(UbKind.USE_AFTER_SCOPE, node, f"access to out-of-scope {obj.name}")
            return False
        if not self.mem.in_bounds(ptr, size):
            self.violation(UbKind.BUF_OVERFLOW_POINTER, node,
                           f"{size}-byte access at offset {ptr.offset} of {obj.size}-byte {obj.name}")
            return False
        return True

    def read(self, ptr: M.Ptr, ctype):
        if isinstance(ctype, T.ArrayType):
            return ptr
        if not self.mem.in_bounds(ptr, ctype.size):
            return self._zero(ctype)
        if isinstance(ctype, T.IntType):
            return self.mem.load_int(ptr, ctype.size, ctype.signed)
        if isinstance(ctype, T.PointerType):
            return self.mem.load_ptr(ptr)
        if isinstance(ctype, T.StructType):
            return self.mem.load_blob(ptr, ctype.size)
        raise UnsupportedConstruct(f"load of {ctype}")

    def write(self, ptr: M.Ptr, ctype, value):
        if not self.mem.in_bounds(ptr, ctype.size):
            return
        if isinstance(ctype, T.IntType):
            self.mem.store_int(ptr, ctype.size, value)
        elif isinstance(ctype, T.PointerType):
            self.mem.store_ptr(ptr, value)
        elif isinstance(ctype, T.StructType):
            raw, _ = M.strip(value)
            self.mem.store_blob(ptr, raw)
        else:
            raise UnsupportedConstruct(f"store of {ctype}")

    def _zero(self, ctype):
        if isinstance(ctype, T.PointerType):
            return M.NULL
        if isinstance(ctype, T.StructType):
            return M.Blob(bytes(ctype.size), bytes(ctype.size), {})
        return 0

    def convert(self, value, ctype):
        raw, poisoned = M.strip(value)
        if isinstance(ctype, T.IntType):
            if isinstance(raw, M.Ptr):
                raw = raw.flat
            raw = ctype.wrap(int(raw))
        elif isinstance(ctype, T.PointerType):
            if not isinstance(raw, M.Ptr):
                raw = self.mem.from_flat(int(raw) & ((1 << 64) - 1))
        elif isinstance(ctype, T.VoidType):
            return None
        return M.Uninit(raw) if poisoned else raw

    def _kill(self, objects):
        for obj in objects:
            if obj.state == M.LIVE:
                obj.state = M.DEAD

    # lvalues -----------------------------------------------------------------

    def lookup(self, decl_nid: int) -> M.Obj:
        if decl_nid in self.statics:
            return self.statics[decl_nid]
        if self.ast.scopes.decl_scope.get(decl_nid) == GLOBAL_SCOPE:
            return self.globals[decl_nid]
        return self.frames[-1].env[decl_nid]

    def lvalue(self, n, check=True, one_past=False) -> M.Ptr:
        if isinstance(n, c_ast.ID):
            target = self.ast.scopes.resolution[self.ast.nid(n)]
            return M.Ptr(self.lookup(target), 0)
        if isinstance(n, c_ast.UnaryOp) and n.op == '*':
            ptr = self.pointer(self.eval(n.expr))
            ctype = self.type_of(n)
            if check and not isinstance(ctype, T.ArrayType):
                self.memcheck(n, ptr, ctype.size)
            return ptr
        if isinstance(n, c_ast.ArrayRef):
            return self._array_lvalue(n, check, one_past)
        if isinstance(n, c_ast.StructRef):
            if n.type == '->':
                base = self.pointer(self.eval(n.name))
                struct = T.decay(self.type_of(n.name)).target
            else:
                base = self.lvalue(n.name, check=False)
                struct = self.type_of(n.name)
            field = struct.field(n.field.name)
            ptr = base.add(field.offset)
            if check and not isinstance(field.type, T.ArrayType):
                self.memcheck(n, ptr, field.type.size)
            return ptr
        raise UnsupportedConstruct(f"{type(n).__name__} as lvalue", self.loc(n))

    def _array_lvalue(self, n, check, one_past):
        name, subscript = n.name, n.subscript
        flagged = False
        base_type = self.type_of(name)
        if T.is_integer(T.decay(base_type)):
            name, subscript = subscript, name
            base_type = self.type_of(name)
        if isinstance(base_type, T.ArrayType):
            base = self.lvalue(name, check=False)
            index, _ = M.strip(self.eval(subscript))
            elem = base_type.elem
            limit = base_type.length + (1 if one_past else 0)
            if not 0 <= index < limit:
                flagged = True
                self.site(n)
                self.violation(UbKind.BUF_OVERFLOW_ARRAY, n,
                               f"index {index} outside [0, {base_type.length})")
        else:
            base = self.pointer(self.eval(name))
            index, _ = M.strip(self.eval(subscript))
            elem = T.decay(base_type).target
        ptr = base.add(index * elem.size)
        if check and not flagged and not isinstance(elem, T.ArrayType):
            self.memcheck(n, ptr, elem.size)
        return ptr

    # expressions -------------------------------------------------------------

    def eval(self, n):
        self.tick()
        handler = self._eval.get(type(n))
        if handler is None:
            raise UnsupportedConstruct(type(n).__name__, self.loc(n))
        return handler(n)

    def _constant(self, n):
        if n.type == 'char':
            return T.parse_char_literal(n.value)
        if n.type == 'string':
            return decode_string_literal(n.value)
        return T.parse_int_literal(n.value)[0]

    def _id(self, n):
        nid = self.ast.nid(n)
        target = self.ast.scopes.resolution[nid]
        if target == BUILTIN:
            raise UnsupportedConstruct(f"function designator {n.name}", self.loc(n))
        ctype = self.ast.decl_type(target)
        if isinstance(ctype, T.FuncType):
            raise UnsupportedConstruct(f"function designator {n.name}", self.loc(n))
        return self.read(M.Ptr(self.lookup(target), 0), ctype)

    def _access(self, n):
        ctype = self.type_of(n)
        if isinstance(ctype, T.ArrayType):
            return self.lvalue(n, check=False)
        return self.read(self.lvalue(n), ctype)

    def _unary(self, n):
        op = n.op
        if op == 'sizeof':
            if isinstance(n.expr, c_ast.Typename):
                return self.ast.type_of_declarator(n.expr).size
            return self.type_of(n.expr).size
        if op == '&':
            return self.lvalue(n.expr, check=False, one_past=True)
        if op == '*':
            return self._access(n)
        if op in ('++', '--', 'p++', 'p--'):
            return self._increment(n)
        value = self.eval(n.expr)
        raw, poisoned = M.strip(value)
        if op == '!':
            result = int(not self._truth(raw))
        else:
            ctype = self.type_of(n)
            raw = ctype.wrap(raw.flat if isinstance(raw, M.Ptr) else raw)
            if op == '-':
                result = -raw
                if ctype.signed and not ctype.contains(result):
                    self.site(n)
                    self.violation(UbKind.INTEGER_OVERFLOW, n, f"-({raw}) overflows {ctype}")
                result = ctype.wrap(result)
            elif op == '+':
                result = raw
            elif op == '~':
                result = ctype.wrap(~raw)
            else:
                raise UnsupportedConstruct(f"unary {op}", self.loc(n))
        return M.Uninit(result) if poisoned else result

    def _increment(self, n):
        ctype = T.decay(self.type_of(n.expr))
        ptr = self.lvalue(n.expr)
        old = self.read(ptr, ctype)
        raw, poisoned = M.strip(old)
        delta = 1 if n.op in ('++', 'p++') else -1
        if isinstance(ctype, T.PointerType):
            new = self.pointer(raw).add(delta * ctype.target.size)
        else:
            wide = T.promote(T.canonical(ctype))
            new = raw + delta
            if wide.signed and not wide.contains(new):
                self.site(n)
                self.violation(UbKind.INTEGER_OVERFLOW, n, f"{raw} {'+' if delta > 0 else '-'} 1 overflows {wide}")
            new = ctype.wrap(new)
        if poisoned:
            new = M.Uninit(new)
        self.write(ptr, ctype, new)
        return old if n.op.startswith('p') else new

    def _truth(self, raw) -> bool:
        if isinstance(raw, M.Ptr):
            return raw.flat != 0
        return raw != 0

    def _binary(self, n):
        op = n.op
        if op in ('&&', '||'):
            left, lp = M.strip(self.eval(n.left))
            if self._truth(left) == (op == '||'):
                result, poisoned = int(op == '||'), lp
            else:
                right, rp = M.strip(self.eval(n.right))
                result, poisoned = int(self._truth(right)), lp or rp
            return M.Uninit(result) if poisoned else result
        left_value = self.eval(n.left)
        right_value = self.eval(n.right)
        left, lp = M.strip(left_value)
        right, rp = M.strip(right_value)
        ltype, rtype = T.decay(self.type_of(n.left)), T.decay(self.type_of(n.right))
        result = self._apply(n, op, left, right, ltype, rtype)
        return M.Uninit(result) if (lp or rp) else result

    def _apply(self, n, op, left, right, ltype, rtype):
        if isinstance(ltype, T.PointerType) or isinstance(rtype, T.PointerType):
            return self._pointer_op(n, op, left, right, ltype, rtype)
        if op in ('<', '>', '<=', '>=', '==', '!='):
            ctype = T.usual_arithmetic(ltype, rtype)
            return int(_compare(op, ctype.wrap(left), ctype.wrap(right)))
        if op in ('<<', '>>'):
            ctype = T.promote(T.canonical(ltype))
            count = T.promote(T.canonical(rtype)).wrap(right)
            return self.arith(n, op, ctype.wrap(left), count, ctype)
        ctype = T.usual_arithmetic(ltype, rtype)
        return self.arith(n, op, ctype.wrap(left), ctype.wrap(right), ctype)

    def _pointer_op(self, n, op, left, right, ltype, rtype):
        if op in ('<', '>', '<=', '>=', '==', '!='):
            a = left.flat if isinstance(left, M.Ptr) else left
            b = right.flat if isinstance(right, M.Ptr) else right
            return int(_compare(op, a, b))
        if op == '-' and isinstance(ltype, T.PointerType) and isinstance(rtype, T.PointerType):
            elem = max(ltype.target.size, 1)
            return _trunc_div(self.pointer(left).flat - self.pointer(right).flat, elem)
        if isinstance(ltype, T.PointerType):
            ptr, offset, elem = self.pointer(left), right, ltype.target.size
        else:
            ptr, offset, elem = self.pointer(right), left, rtype.target.size
        if op == '+':
            return ptr.add(offset * elem)
        if op == '-':
            return ptr.add(-offset * elem)
        raise UnsupportedConstruct(f"pointer operator {op}", self.loc(n))

    def arith(self, n, op, a, b, ctype: T.IntType):
        """Integer operator with the subset's undefined-behaviour checks."""
        if op in ('+', '-', '*'):
            result = a + b if op == '+' else a - b if op == '-' else a * b
            if ctype.signed:
                self.site(n)
                if not ctype.contains(result):
                    self.violation(UbKind.INTEGER_OVERFLOW, n, f"{a} {op} {b} overflows {ctype}")
            return ctype.wrap(result)
        if op in ('/', '%'):
            self.site(n)
            if b == 0:
                self.violation(UbKind.DIVIDE_BY_ZERO, n, f"{a} {op} 0")
                return 0
            if ctype.signed and a == ctype.min and b == -1:
                self.violation(UbKind.INTEGER_OVERFLOW, n, f"{a} {op} -1 overflows {ctype}")
                return ctype.wrap(-a) if op == '/' else 0
            quotient = _trunc_div(a, b)
            return ctype.wrap(quotient) if op == '/' else ctype.wrap(a - quotient * b)
        if op in ('<<', '>>'):
            self.site(n)
            if not 0 <= b < ctype.width:
                self.violation(UbKind.SHIFT_OVERFLOW, n, f"shift by {b} of a {ctype.width}-bit value")
                b &= ctype.width - 1
            return ctype.wrap(a << b) if op == '<<' else ctype.wrap(a >> b)
        if op == '&':
            return ctype.wrap(a & b)
        if op == '|':
            return ctype.wrap(a | b)
        if op == '^':
            return ctype.wrap(a ^ b)
        raise UnsupportedConstruct(f"operator {op}", self.loc(n))

    def _assignment(self, n):
        ltype = T.decay(self.type_of(n.lvalue))
        if n.op == '=':
            value = self.convert(self.eval(n.rvalue), ltype)
            ptr = self.lvalue(n.lvalue)
            self.write(ptr, ltype, value)
            return value
        ptr = self.lvalue(n.lvalue)
        current, cp = M.strip(self.read(ptr, ltype))
        right, rp = M.strip(self.eval(n.rvalue))
        rtype = T.decay(self.type_of(n.rvalue))
        result = self._apply(n, n.op[:-1], current, right, ltype, rtype)
        value = self.convert(M.Uninit(result) if (cp or rp) else result, ltype)
        self.write(ptr, ltype, value)
        return value

    def _cast(self, n):
        value = self.eval(n.expr)
        return self.convert(value, self.ast.type_of_declarator(n.to_type))

    def _ternary(self, n):
        chosen = n.iftrue if self.condition(n.cond) else n.iffalse
        return self.convert(self.eval(chosen), T.decay(self.type_of(n)))

    def condition(self, cond) -> bool:
        raw, poisoned = M.strip(self.eval(cond))
        self.site(cond)
        if poisoned:
            self.violation(UbKind.USE_OF_UNINIT_MEMORY, cond, "branch on uninitialized value")
        return self._truth(raw)

    # calls -------------------------------------------------------------------

    def _call(self, n):
        name = n.name.name
        args = [self.eval(a) for a in (n.args.exprs if n.args is not None else ())]
        target = self.ast.scopes.resolution.get(self.ast.nid(n.name))
        if target == BUILTIN:
            return self._builtin(n, name, args)
        function = self.ast.function(name)
        if function is None:
            raise UnsupportedConstruct(f"call to undefined function {name}", self.loc(n))
        return self._invoke(function, args)

    def _invoke(self, function, args):
        if len(self.frames) >= MAX_CALL_DEPTH:
            raise CallDepthExceeded(f"call depth {MAX_CALL_DEPTH} exceeded in {function.decl.name}")
        ftype = self.ast.decl_type(self.ast.nid(function.decl))
        frame = _Frame(function.decl.name)
        params = function.decl.type.args.params if function.decl.type.args is not None else []
        params = [p for p in params if isinstance(p, c_ast.Decl) and p.name]
        for param, value in zip(params, args):
            pnid = self.ast.nid(param)
            ptype = T.decay(self.ast.decl_type(pnid))
            obj = self.mem.allocate(ptype.size, M.STACK, param.name, poisoned=False, decl=pnid)
            frame.env[pnid] = obj
            frame.scopes[0].append(obj)
            self.write(M.Ptr(obj, 0), ptype, self.convert(value, ptype))
        self.frames.append(frame)
        try:
            for item in function.body.block_items or ():
                self.execute(item)
            result = M.Uninit(0) if function.decl.name != 'main' else 0
        except _Return as ret:
            result = ret.value
        finally:
            for scope in frame.scopes:
                self._kill(scope)
            self.frames.pop()
        if isinstance(ftype.ret, T.VoidType):
            return None
        return self.convert(result, ftype.ret)

    def _builtin(self, n, name, args):
        if name == 'printf':
            text = format_printf(args[0], args[1:])
            self.out.append(text)
            return len(text)
        if name == 'malloc':
            return self._malloc(args[0])
        if name == 'free':
            self._free(n, args[0])
            return None
        site = M.strip(args[0])[0]
        if name == '__ubf_value':
            self.record('VALUE', site, M.strip(args[1])[0], _as_int(args[2]))
            return args[2]
        if name == '__ubf_pair':
            self.record('VALUE', site, 0, _as_int(args[1]))
            self.record('VALUE', site, 1, _as_int(args[2]))
            return args[2]
        if name == '__ubf_access':
            self.record('ACCESS', site, self.pointer(args[1]).flat)
            return args[1]
        if name == '__ubf_range':
            self.record('RANGE', site, self.pointer(args[1]).flat, _as_int(args[2]))
            return None
        if name == '__ubf_malloc':
            ptr = self._malloc(args[1])
            self.record('RANGE', site, ptr.flat, _as_int(args[1]))
            return ptr
        if name == '__ubf_free':
            self.record('FREE', site, self.pointer(args[1]).flat)
            self._free(n, args[1])
            return None
        if name == '__ubf_scope':
            self.record('SCOPE', site, self.pointer(args[1]).flat, _as_int(args[2]))
            return None
        raise UnsupportedConstruct(f"builtin {name}", self.loc(n))

    def _malloc(self, size):
        size = _as_int(size)
        obj = self.mem.allocate(size, M.HEAP, f"heap block {len(self.mem.objects)}", poisoned=True)
        return M.Ptr(obj, 0)

    def _free(self, n, value):
        ptr = self.pointer(value)
        if ptr.is_null:
            return
        if ptr.obj is None or ptr.obj.storage != M.HEAP or ptr.offset != 0:
            raise InvalidFree(f"free of non-heap pointer at {self.loc(n)}")
        if ptr.obj.state == M.FREED:
            self.site(n)
            self.violation(UbKind.USE_AFTER_FREE, n, f"double free of {ptr.obj.name}")
            return
        ptr.obj.state = M.FREED

    # statements --------------------------------------------------------------

    def execute(self, n):
        self.tick()
        if not isinstance(n, c_ast.Compound):
            self.site(n)
        if isinstance(n, c_ast.Compound):
            frame = self.frames[-1]
            frame.scopes.append([])
            try:
                for item in n.block_items or ():
                    self.execute(item)
            finally:
                self._kill(frame.scopes.pop())
        elif isinstance(n, c_ast.Decl):
            self._declare(n)
        elif isinstance(n, c_ast.DeclList):
            for decl in n.decls:
                self._declare(decl)
        elif isinstance(n, c_ast.If):
            if self.condition(n.cond):
                self.execute(n.iftrue)
            elif n.iffalse is not None:
                self.execute(n.iffalse)
        elif isinstance(n, c_ast.While):
            self._loop(n, None, n.cond, None, n.stmt)
        elif isinstance(n, c_ast.For):
            frame = self.frames[-1]
            frame.scopes.append([])
            try:
                self._loop(n, n.init, n.cond, n.next, n.stmt)
            finally:
                self._kill(frame.scopes.pop())
        elif isinstance(n, c_ast.Return):
            raise _Return(self.eval(n.expr) if n.expr is not None else None)
        elif isinstance(n, c_ast.Break):
            raise _Break()
        elif isinstance(n, c_ast.Continue):
            raise _Continue()
        elif isinstance(n, c_ast.EmptyStatement):
            pass
        else:
            self.eval(n)

    def _loop(self, n, init, cond, step, body):
        if init is not None:
            if isinstance(init, c_ast.DeclList):
                for decl in init.decls:
                    self._declare(decl)
            else:
                self.eval(init)
        first = True
        while True:
            if not first:
                self.tick()
                self.site(n)
            first = False
            if cond is not None and not self.condition(cond):
                break
            try:
                self.execute(body)
            except _Break:
                break
            except _Continue:
                pass
            if step is not None:
                self.eval(step)

    def _declare(self, n):
        if n.name is None:
            return
        nid = self.ast.nid(n)
        ctype = self.ast.decl_type(nid)
        if isinstance(ctype, T.FuncType):
            return
        if 'static' in (n.storage or ()):
            if nid not in self.statics:
                obj = self.mem.allocate(ctype.size, M.GLOBAL, n.name, poisoned=False, decl=nid)
                self.statics[nid] = obj
                if n.init is not None:
                    self._initialize(M.Ptr(obj, 0), ctype, n.init)
            return
        frame = self.frames[-1]
        obj = self.mem.allocate(ctype.size, M.STACK, n.name, poisoned=True, decl=nid)
        frame.env[nid] = obj
        frame.scopes[-1].append(obj)
        if n.init is not None:
            self._initialize(M.Ptr(obj, 0), ctype, n.init)

    def _initialize(self, ptr: M.Ptr, ctype, init):
        if isinstance(init, c_ast.InitList):
            self.mem.store_blob(ptr, M.Blob(bytes(ctype.size), bytes(ctype.size), {}))
            if isinstance(ctype, T.ArrayType):
                slots = [(i * ctype.elem.size, ctype.elem) for i in range(ctype.length)]
            elif isinstance(ctype, T.StructType):
                slots = [(f.offset, f.type) for f in ctype.fields]
            else:
                slots = [(0, ctype)]
            for (offset, elem), expr in zip(slots, init.exprs):
                self._initialize(ptr.add(offset), elem, expr)
            return
        self.write(ptr, ctype, self.convert(self.eval(init), ctype))


def _compare(op, a, b) -> bool:
    if op == '<':
        return a < b
    if op == '>':
        return a > b
    if op == '<=':
        return a <= b
    if op == '>=':
        return a >= b
    if op == '==':
        return a == b
    return a != b


def _trunc_div(a: int, b: int) -> int:
    quotient = abs(a) // abs(b)
    return -quotient if (a < 0) != (b < 0) else quotient


def _as_int(value) -> int:
    raw, _ = M.strip(value)
    if isinstance(raw, M.Ptr):
        return raw.flat
    return int(raw)


def _step_limit(step_limit):
    if step_limit is None:
        return getattr(settings, 'UBF_VM_STEP_LIMIT', 1_000_000)
    return step_limit


def eval_program(ast: Ast, step_limit: Optional[int] = None, policy: Optional[Policy] = None,
                 recorder: Optional[Recorder] = None):
    """Run ast to completion or to its first undefined behaviour."""
    outcome, _ = Interpreter(ast, _step_limit(step_limit), policy, recorder).run()
    return outcome


def eval_trace(ast: Ast, step_limit: Optional[int] = None, policy: Optional[Policy] = None,
               recorder: Optional[Recorder] = None):
    """As eval_program, also returning the executed-site trace."""
    return Interpreter(ast, _step_limit(step_limit), policy, recorder, trace=True).run()
