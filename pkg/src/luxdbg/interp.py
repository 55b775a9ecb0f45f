"""Embeddable command-string interpreter.

The debugger's extension language: string-valued variables, procedures with
brace defaults, `$`/bracket substitution, brace quoting, an integer C-like
`expr`, list commands, file channels, `catch`, and an unknown-command hook
through which the debugger offers bare expressions to its own evaluators.

Every value is a string. Commands are dispatched through a single ordered
command table so `info commands` output is deterministic.
"""

from __future__ import annotations

import fnmatch
import re
import sys
from typing import Callable, Optional

from .errors import ScriptError

__all__ = ["Interpreter", "ScriptError", "ExitScript", "list_parse", "list_format"]


class ExitScript(Exception):
    """Raised by the `exit` command; not catchable by `catch`."""

    def __init__(self, code: int = 0):
        super().__init__(code)
        self.code = code


class _Return(Exception):
    def __init__(self, value: str):
        self.value = value


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


# ---------------------------------------------------------------------------
# list syntax

_BARE_SAFE = re.compile(r'^[^\s\\{}"\[\]$;]+$')


def list_parse(text: str) -> list[str]:
    """Split a string into list elements (brace and quote aware)."""
    items = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t\n":
            i += 1
            continue
        if c == "{":
            depth = 1
            j = i + 1
            while j < n and depth:
                if text[j] == "\\":
                    j += 2
                    continue
                if text[j] == "{":
                    depth += 1
                elif text[j] == "}":
                    depth -= 1
                j += 1
            if depth:
                raise ScriptError("unmatched open brace in list")
            items.append(text[i + 1 : j - 1])
            i = j
        elif c == '"':
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    buf.append(_BACKSLASH_MAP.get(text[j + 1], text[j + 1]))
                    j += 2
                else:
                    buf.append(text[j])
                    j += 1
            if j >= n:
                raise ScriptError("unmatched quote in list")
            items.append("".join(buf))
            i = j + 1
        else:
            j = i
            buf = []
            while j < n and text[j] not in " \t\n":
                if text[j] == "\\" and j + 1 < n:
                    buf.append(_BACKSLASH_MAP.get(text[j + 1], text[j + 1]))
                    j += 2
                else:
                    buf.append(text[j])
                    j += 1
            items.append("".join(buf))
            i = j
    return items


def _balanced_braces(s: str) -> bool:
    depth = 0
    i = 0
    while i < len(s):
        if s[i] == "\\":
            i += 2
            continue
        if s[i] == "{":
            depth += 1
        elif s[i] == "}":
            depth -= 1
            if depth < 0:
                return False
        i += 1
    return depth == 0


def list_quote(item: str) -> str:
    if item == "":
        return "{}"
    if _BARE_SAFE.match(item):
        return item
    if _balanced_braces(item) and not item.endswith("\\"):
        return "{" + item + "}"
    out = []
    for ch in item:
        if ch in ' \t\n\\{}"[]$;':
            out.append("\\" + ch)
        else:
            out.append(ch)
    return "".join(out)


def list_format(items) -> str:
    return " ".join(list_quote(str(it)) for it in items)


# ---------------------------------------------------------------------------
# parsing

_BACKSLASH_MAP = {"n": "\n", "t": "\t", "r": "\r", "a": "\a", "f": "\f", "v": "\v"}
_VARNAME = re.compile(r"[A-Za-z0-9_]*")

# word part kinds
_LIT = 0
_VAR = 1  # (kind, base name, index parts or None)
_CMD = 2  # (kind, script text)


def _scan_bracket(text: str, i: int) -> int:
    """Return index just past the ] matching the [ at i. Quote/brace aware."""
    assert text[i] == "["
    depth = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\\":
            i += 2
            continue
        if c == "[":
            depth += 1
        elif c == "]":
            depth -= 1
            if depth == 0:
                return i + 1
        elif c == "{":
            d = 1
            i += 1
            while i < n and d:
                if text[i] == "\\":
                    i += 2
                    continue
                if text[i] == "{":
                    d += 1
                elif text[i] == "}":
                    d -= 1
                i += 1
            continue
        elif c == '"':
            i += 1
            while i < n and text[i] != '"':
                i += 2 if text[i] == "\\" else 1
        i += 1
    raise ScriptError("missing close-bracket")


def _parse_parts(text: str, i: int, terminators: str, in_quotes: bool):
    """Parse substitutable word content. Returns (parts, next index)."""
    parts = []
    lit = []
    n = len(text)

    def flush():
        if lit:
            parts.append((_LIT, "".join(lit)))
            lit.clear()

    while i < n:
        c = text[i]
        if in_quotes:
            if c == '"':
                flush()
                return parts, i + 1
        elif c in terminators:
            break
        if c == "\\":
            if i + 1 >= n:
                lit.append("\\")
                i += 1
                continue
            nxt = text[i + 1]
            if nxt == "\n":
                # line continuation collapses to a single space
                i += 2
                while i < n and text[i] in " \t":
                    i += 1
                lit.append(" ")
                continue
            lit.append(_BACKSLASH_MAP.get(nxt, nxt))
            i += 2
            continue
        if c == "$":
            m = _VARNAME.match(text, i + 1)
            if i + 1 < n and text[i + 1] == "{":
                j = text.find("}", i + 2)
                if j < 0:
                    raise ScriptError("missing close-brace for variable name")
                flush()
                parts.append((_VAR, text[i + 2 : j], None))
                i = j + 1
                continue
            name = m.group(0)
            if not name:
                lit.append("$")
                i += 1
                continue
            i = m.end()
            if i < n and text[i] == "(":
                idx_parts, i = _parse_parts(text, i + 1, ")", False)
                if i >= n or text[i] != ")":
                    raise ScriptError("missing close parenthesis in array reference")
                i += 1
                flush()
                parts.append((_VAR, name, idx_parts))
            else:
                flush()
                parts.append((_VAR, name, None))
            continue
        if c == "[":
            j = _scan_bracket(text, i)
            flush()
            parts.append((_CMD, text[i + 1 : j - 1]))
            i = j
            continue
        lit.append(c)
        i += 1
    if in_quotes:
        raise ScriptError("missing close quote")
    flush()
    return parts, i


def _parse_word(text: str, i: int, in_bracket: bool):
    """Parse one word starting at non-space text[i]. Returns (parts, next index)."""
    n = len(text)
    c = text[i]
    terminators = " \t\n;]" if in_bracket else " \t\n;"
    if c == "{":
        depth = 1
        j = i + 1
        while j < n and depth:
            if text[j] == "\\":
                j += 2
                continue
            if text[j] == "{":
                depth += 1
            elif text[j] == "}":
                depth -= 1
            j += 1
        if depth:
            raise ScriptError("missing close-brace")
        if j < n and text[j] not in terminators:
            raise ScriptError("extra characters after close-brace")
        return [(_LIT, text[i + 1 : j - 1])], j
    if c == '"':
        parts, j = _parse_parts(text, i + 1, "", True)
        if j < n and text[j] not in terminators:
            raise ScriptError("extra characters after close-quote")
        return parts, j
    return _parse_parts(text, i, terminators, False)


def parse_script(text: str, in_bracket: bool = False) -> list[list]:
    """Parse a script into a list of commands, each a list of word parts."""
    cmds = []
    words: list = []
    i, n = 0, len(text)
    while True:
        if i >= n:
            if words:
                cmds.append(words)
            return cmds
        c = text[i]
        if c in " \t":
            i += 1
            continue
        if c == "\\" and i + 1 < n and text[i + 1] == "\n":
            i += 2
            continue
        if c in "\n;":
            if words:
                cmds.append(words)
                words = []
            i += 1
            continue
        if c == "#" and not words:
            while i < n and text[i] != "\n":
                if text[i] == "\\" and i + 1 < n:
                    i += 2
                else:
                    i += 1
            continue
        word, i = _parse_word(text, i, in_bracket)
        words.append(word)


# ---------------------------------------------------------------------------
# expr

_EXPR_OPS = [
    "||", "&&", "==", "!=", "<=", ">=", "<<", ">>",
    "|", "^", "&", "<", ">", "+", "-", "*", "/", "%", "!", "~", "(", ")",
]
_PRECEDENCE = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5,
    "==": 6, "!=": 6, "<": 7, "<=": 7, ">": 7, ">=": 7,
    "<<": 8, ">>": 8, "+": 9, "-": 9, "*": 10, "/": 10, "%": 10,
}
_INT_RE = re.compile(r"0[xX][0-9a-fA-F]+|[0-9]+")


def _expr_tokens(text: str) -> list:
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t\n":
            i += 1
            continue
        m = _INT_RE.match(text, i)
        if m and c.isdigit():
            toks.append(("int", int(m.group(0), 0)))
            i = m.end()
            continue
        if c == "$":
            parts, i = _parse_parts(text, i, "()!~*/%+-<>=&^|\" \t\n", False)
            # _parse_parts consumed exactly the $var reference plus nothing else
            if len(parts) != 1 or parts[0][0] != _VAR:
                raise ScriptError(f"bad variable reference in expression: {text!r}")
            toks.append(("var", parts[0]))
            continue
        if c == "[":
            j = _scan_bracket(text, i)
            toks.append(("cmd", text[i + 1 : j - 1]))
            i = j
            continue
        if c == '"':
            parts, i = _parse_parts(text, i + 1, "", True)
            toks.append(("str", parts))
            continue
        if c == "{":
            word, i = _parse_word(text, i, False)
            toks.append(("str", word))
            continue
        for op in _EXPR_OPS:
            if text.startswith(op, i):
                toks.append(("op", op))
                i += len(op)
                break
        else:
            raise ScriptError(f"syntax error in expression: {text!r}")
    return toks


class _ExprParser:
    """Precedence-climbing parser over expr tokens; emits an AST for lazy &&/||."""

    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self):
        t = self.peek()
        if t is None:
            raise ScriptError("premature end of expression")
        self.pos += 1
        return t

    def parse(self):
        node = self.parse_binary(0)
        if self.peek() is not None:
            raise ScriptError("trailing tokens in expression")
        return node

    def parse_binary(self, min_prec):
        left = self.parse_unary()
        while True:
            t = self.peek()
            if t is None or t[0] != "op" or t[1] not in _PRECEDENCE:
                return left
            prec = _PRECEDENCE[t[1]]
            if prec < min_prec:
                return left
            self.next()
            right = self.parse_binary(prec + 1)
            left = ("bin", t[1], left, right)

    def parse_unary(self):
        t = self.next()
        if t[0] == "op":
            if t[1] == "(":
                node = self.parse_binary(0)
                close = self.next()
                if close != ("op", ")"):
                    raise ScriptError("missing close parenthesis in expression")
                return node
            if t[1] in ("-", "+", "!", "~"):
                return ("un", t[1], self.parse_unary())
            raise ScriptError(f"unexpected operator {t[1]!r} in expression")
        return t


def _numeric(value: str) -> Optional[int]:
    s = value.strip()
    if not s:
        return None
    neg = s.startswith("-")
    body = s[1:] if s[0] in "+-" else s
    try:
        if body.lower().startswith("0x"):
            v = int(body, 16)
        else:
            v = int(body, 10)
    except ValueError:
        return None
    return -v if neg else v


# ---------------------------------------------------------------------------
# interpreter

class Channel:
    def __init__(self, fobj, name):
        self.fobj = fobj
        self.name = name


class Interpreter:
    """Command interpreter with an ordered command table and global/proc scopes."""

    def __init__(self, stdout_write: Optional[Callable[[str], None]] = None):
        self.commands: dict[str, Callable] = {}
        self.frames: list[dict] = [{"vars": {}, "globals": set()}]
        self.channels: dict[str, Channel] = {}
        self._chan_seq = 0
        self.unknown_hook: Optional[Callable] = None
        self.stdout_write = stdout_write or (lambda s: (sys.stdout.write(s), sys.stdout.flush()))
        self._parse_cache: dict[str, list] = {}
        self._expr_cache: dict[str, tuple] = {}
        self._register_builtins()

    # -- variables

    def _frame_for(self, base: str) -> dict:
        frame = self.frames[-1]
        if len(self.frames) > 1 and base in frame["globals"]:
            return self.frames[0]
        return frame

    def get_var(self, base: str, index: Optional[str] = None) -> str:
        store = self._frame_for(base)["vars"]
        if base not in store:
            name = base if index is None else f"{base}({index})"
            raise ScriptError(f'can\'t read "{name}": no such variable')
        val = store[base]
        if index is None:
            if isinstance(val, dict):
                raise ScriptError(f'can\'t read "{base}": variable is array')
            return val
        if not isinstance(val, dict):
            raise ScriptError(f'can\'t read "{base}({index})": variable isn\'t array')
        if index not in val:
            raise ScriptError(f'can\'t read "{base}({index})": no such element in array')
        return val[index]

    def set_var(self, base: str, value: str, index: Optional[str] = None) -> str:
        store = self._frame_for(base)["vars"]
        if index is None:
            if isinstance(store.get(base), dict):
                raise ScriptError(f'can\'t set "{base}": variable is array')
            store[base] = value
        else:
            cur = store.setdefault(base, {})
            if not isinstance(cur, dict):
                raise ScriptError(f'can\'t set "{base}({index})": variable isn\'t array')
            cur[index] = value
        return value

    def unset_var(self, base: str, index: Optional[str] = None):
        store = self._frame_for(base)["vars"]
        if base not in store:
            raise ScriptError(f'can\'t unset "{base}": no such variable')
        if index is None:
            del store[base]
        else:
            arr = store[base]
            if not isinstance(arr, dict) or index not in arr:
                raise ScriptError(f'can\'t unset "{base}({index})": no such element in array')
            del arr[index]

    @staticmethod
    def split_varname(name: str):
        if name.endswith(")"):
            p = name.find("(")
            if p > 0:
                return name[:p], name[p + 1 : -1]
        return name, None

    # -- evaluation

    def _parsed(self, text: str) -> list:
        cached = self._parse_cache.get(text)
        if cached is None:
            cached = parse_script(text)
            if len(self._parse_cache) > 4096:
                self._parse_cache.clear()
            self._parse_cache[text] = cached
        return cached

    def _part_value(self, part) -> str:
        kind = part[0]
        if kind == _LIT:
            return part[1]
        if kind == _VAR:
            idx = None
            if part[2] is not None:
                idx = "".join(self._part_value(p) for p in part[2])
            return self.get_var(part[1], idx)
        return self.eval_script(part[1])

    def _word_value(self, word) -> str:
        if len(word) == 1 and word[0][0] == _LIT:
            return word[0][1]
        return "".join(self._part_value(p) for p in word)

    def subst_text(self, text: str) -> str:
        """Perform $/bracket/backslash substitution on a fragment."""
        parts, _ = _parse_parts(text, 0, "", False)
        return "".join(self._part_value(p) for p in parts)

    def eval_script(self, text: str) -> str:
        result = ""
        for words in self._parsed(text):
            argv = [self._word_value(w) for w in words]
            result = self.invoke(argv)
        return result

    def invoke(self, argv: list[str]) -> str:
        name = argv[0]
        cmd = self.commands.get(name)
        if cmd is not None:
            return cmd(self, argv[1:])
        if self.unknown_hook is not None:
            return self.unknown_hook(self, argv)
        raise ScriptError(f'invalid command name "{name}"')

    # -- expr

    def eval_expr(self, text: str) -> str:
        ast = self._expr_cache.get(text)
        if ast is None:
            ast = _ExprParser(_expr_tokens(text)).parse()
            if len(self._expr_cache) > 4096:
                self._expr_cache.clear()
            self._expr_cache[text] = ast
        v = self._expr_eval(ast)
        return str(v) if isinstance(v, int) else v

    def expr_truth(self, text: str) -> bool:
        v = self._expr_eval_node_or_text(text)
        n = v if isinstance(v, int) else _numeric(v)
        if n is None:
            raise ScriptError(f'expected boolean value but got "{v}"')
        return n != 0

    def _expr_eval_node_or_text(self, text: str):
        ast = self._expr_cache.get(text)
        if ast is None:
            ast = _ExprParser(_expr_tokens(text)).parse()
            if len(self._expr_cache) > 4096:
                self._expr_cache.clear()
            self._expr_cache[text] = ast
        return self._expr_eval(ast)

    def _expr_operand_int(self, node) -> int:
        v = self._expr_eval(node)
        if isinstance(v, int):
            return v
        n = _numeric(v)
        if n is None:
            raise ScriptError(f'expected integer but got "{v}"')
        return n

    def _expr_eval(self, node):
        kind = node[0]
        if kind == "int":
            return node[1]
        if kind == "var":
            _, base, idx_parts = node[1]
            idx = None
            if idx_parts is not None:
                idx = "".join(self._part_value(p) for p in idx_parts)
            return self.get_var(base, idx)
        if kind == "cmd":
            return self.eval_script(node[1])
        if kind == "str":
            return "".join(self._part_value(p) for p in node[1])
        if kind == "un":
            op = node[1]
            v = self._expr_operand_int(node[2])
            if op == "-":
                return -v
            if op == "+":
                return v
            if op == "!":
                return 0 if v else 1
            return ~v
        # binary
        op = node[1]
        if op == "&&":
            if self._expr_operand_int(node[2]) == 0:
                return 0
            return 1 if self._expr_operand_int(node[3]) != 0 else 0
        if op == "||":
            if self._expr_operand_int(node[2]) != 0:
                return 1
            return 1 if self._expr_operand_int(node[3]) != 0 else 0
        a = self._expr_eval(node[2])
        b = self._expr_eval(node[3])
        if op in ("==", "!=", "<", "<=", ">", ">="):
            an = a if isinstance(a, int) else _numeric(a)
            bn = b if isinstance(b, int) else _numeric(b)
            if an is not None and bn is not None:
                a, b = an, bn
            else:
                a, b = str(a), str(b)
            if op == "==":
                return 1 if a == b else 0
            if op == "!=":
                return 1 if a != b else 0
            if op == "<":
                return 1 if a < b else 0
            if op == "<=":
                return 1 if a <= b else 0
            if op == ">":
                return 1 if a > b else 0
            return 1 if a >= b else 0
        an = a if isinstance(a, int) else _numeric(a)
        bn = b if isinstance(b, int) else _numeric(b)
        if an is None or bn is None:
            bad = a if an is None else b
            raise ScriptError(f'expected integer but got "{bad}"')
        if op == "+":
            return an + bn
        if op == "-":
            return an - bn
        if op == "*":
            return an * bn
        if op == "/":
            if bn == 0:
                raise ScriptError("divide by zero")
            q = abs(an) // abs(bn)
            return q if (an < 0) == (bn < 0) else -q
        if op == "%":
            if bn == 0:
                raise ScriptError("divide by zero")
            q = abs(an) // abs(bn)
            q = q if (an < 0) == (bn < 0) else -q
            return an - q * bn
        if op == "<<":
            return an << bn
        if op == ">>":
            return an >> bn
        if op == "&":
            return an & bn
        if op == "|":
            return an | bn
        if op == "^":
            return an ^ bn
        raise ScriptError(f"unknown operator {op!r}")

    # -- command registration

    def register(self, name: str, fn: Callable):
        self.commands[name] = fn

    def unregister(self, name: str):
        self.commands.pop(name, None)

    def _register_builtins(self):
        for name in (
            "set", "incr", "proc", "global", "if", "for", "foreach", "while",
            "break", "continue", "return", "expr", "list", "lindex", "llength",
            "split", "string", "format", "regexp", "puts", "open", "close",
            "gets", "eval", "catch", "info", "unset", "error", "source", "exit",
        ):
            self.register(name, getattr(Interpreter, "_cmd_" + name))

    # -- builtins

    def _cmd_set(self, argv):
        if len(argv) == 1:
            base, idx = self.split_varname(argv[0])
            return self.get_var(base, idx)
        if len(argv) == 2:
            base, idx = self.split_varname(argv[0])
            return self.set_var(base, argv[1], idx)
        raise ScriptError('wrong # args: should be "set varName ?newValue?"')

    def _cmd_incr(self, argv):
        if not argv or len(argv) > 2:
            raise ScriptError('wrong # args: should be "incr varName ?increment?"')
        base, idx = self.split_varname(argv[0])
        try:
            cur = self.get_var(base, idx)
        except ScriptError:
            cur = "0"
        n = _numeric(cur)
        if n is None:
            raise ScriptError(f'expected integer but got "{cur}"')
        step = 1
        if len(argv) == 2:
            step = _numeric(argv[1])
            if step is None:
                raise ScriptError(f'expected integer but got "{argv[1]}"')
        return self.set_var(base, str(n + step), idx)

    def _cmd_proc(self, argv):
        if len(argv) != 3:
            raise ScriptError('wrong # args: should be "proc name args body"')
        name, params_text, body = argv
        specs = []
        for p in list_parse(params_text):
            fields = list_parse(p)
            if len(fields) == 1:
                specs.append((fields[0], None))
            elif len(fields) == 2:
                specs.append((fields[0], fields[1]))
            else:
                raise ScriptError(f'too many fields in argument specifier "{p}"')

        def call(interp: "Interpreter", args, _specs=specs, _body=body, _name=name):
            frame = {"vars": {}, "globals": set()}
            pos = 0
            for j, (pname, default) in enumerate(_specs):
                if pname == "args" and j == len(_specs) - 1:
                    frame["vars"]["args"] = list_format(args[pos:])
                    pos = len(args)
                    break
                if pos < len(args):
                    frame["vars"][pname] = args[pos]
                    pos += 1
                elif default is not None:
                    frame["vars"][pname] = default
                else:
                    spec = " ".join(
                        s if d is None else f"?{s}?" for s, d in _specs
                    )
                    raise ScriptError(f'wrong # args: should be "{_name} {spec}"')
            if pos < len(args):
                spec = " ".join(s if d is None else f"?{s}?" for s, d in _specs)
                raise ScriptError(f'wrong # args: should be "{_name} {spec}"')
            interp.frames.append(frame)
            try:
                return interp.eval_script(_body)
            except _Return as r:
                return r.value
            except _Break:
                raise ScriptError('invoked "break" outside of a loop')
            except _Continue:
                raise ScriptError('invoked "continue" outside of a loop')
            finally:
                interp.frames.pop()

        self.register(name, call)
        return ""

    def _cmd_global(self, argv):
        frame = self.frames[-1]
        for name in argv:
            frame["globals"].add(name)
        return ""

    def _cmd_if(self, argv):
        i = 0
        while True:
            if i + 1 >= len(argv):
                raise ScriptError('wrong # args: no expression after "if" argument')
            cond = argv[i]
            body = argv[i + 1]
            if body == "then":
                raise ScriptError('"then" keyword not supported')
            if self.expr_truth(cond):
                return self.eval_script(body)
            i += 2
            if i >= len(argv):
                return ""
            if argv[i] == "elseif":
                i += 1
                continue
            if argv[i] == "else":
                if i + 1 >= len(argv):
                    raise ScriptError('wrong # args: no script following "else"')
                return self.eval_script(argv[i + 1])
            raise ScriptError(f'invalid "if" clause "{argv[i]}"')

    def _cmd_for(self, argv):
        if len(argv) != 4:
            raise ScriptError('wrong # args: should be "for start test next command"')
        start, test, nxt, body = argv
        self.eval_script(start)
        while self.expr_truth(test):
            try:
                self.eval_script(body)
            except _Break:
                break
            except _Continue:
                pass
            self.eval_script(nxt)
        return ""

    def _cmd_foreach(self, argv):
        if len(argv) != 3:
            raise ScriptError('wrong # args: should be "foreach varName list command"')
        var, items_text, body = argv
        base, idx = self.split_varname(var)
        for item in list_parse(items_text):
            self.set_var(base, item, idx)
            try:
                self.eval_script(body)
            except _Break:
                break
            except _Continue:
                continue
        return ""

    def _cmd_while(self, argv):
        if len(argv) != 2:
            raise ScriptError('wrong # args: should be "while test command"')
        test, body = argv
        while self.expr_truth(test):
            try:
                self.eval_script(body)
            except _Break:
                break
            except _Continue:
                continue
        return ""

    def _cmd_break(self, argv):
        raise _Break()

    def _cmd_continue(self, argv):
        raise _Continue()

    def _cmd_return(self, argv):
        raise _Return(argv[0] if argv else "")

    def _cmd_expr(self, argv):
        return self.eval_expr(" ".join(argv))

    def _cmd_list(self, argv):
        return list_format(argv)

    def _cmd_lindex(self, argv):
        if len(argv) != 2:
            raise ScriptError('wrong # args: should be "lindex list index"')
        items = list_parse(argv[0])
        n = _numeric(argv[1])
        if n is None:
            raise ScriptError(f'expected integer but got "{argv[1]}"')
        if 0 <= n < len(items):
            return items[n]
        return ""

    def _cmd_llength(self, argv):
        if len(argv) != 1:
            raise ScriptError('wrong # args: should be "llength list"')
        return str(len(list_parse(argv[0])))

    def _cmd_split(self, argv):
        if len(argv) not in (1, 2):
            raise ScriptError('wrong # args: should be "split string ?splitChars?"')
        s = argv[0]
        chars = argv[1] if len(argv) == 2 else " \t\n"
        if chars == "":
            return list_format(list(s))
        items = [""]
        for ch in s:
            if ch in chars:
                items.append("")
            else:
                items[-1] += ch
        return list_format(items)

    def _cmd_string(self, argv):
        if len(argv) == 2 and argv[0] == "length":
            return str(len(argv[1]))
        raise ScriptError('should be "string length string"')

    def _cmd_format(self, argv):
        if not argv:
            raise ScriptError('wrong # args: should be "format formatString ?arg ...?"')
        fmt = argv[0]
        args = argv[1:]
        out = []
        ai = 0
        i, n = 0, len(fmt)
        while i < n:
            c = fmt[i]
            if c != "%":
                out.append(c)
                i += 1
                continue
            if i + 1 >= n:
                raise ScriptError('format string ended in middle of field specifier')
            spec = fmt[i + 1]
            if spec == "%":
                out.append("%")
                i += 2
                continue
            if ai >= len(args):
                raise ScriptError("not enough arguments for all format specifiers")
            arg = args[ai]
            ai += 1
            if spec == "d":
                v = _numeric(arg)
                if v is None:
                    raise ScriptError(f'expected integer but got "{arg}"')
                out.append(str(v))
            elif spec == "x":
                v = _numeric(arg)
                if v is None:
                    raise ScriptError(f'expected integer but got "{arg}"')
                out.append(format(v & 0xFFFFFFFFFFFFFFFF if v < 0 else v, "x"))
            elif spec == "s":
                out.append(arg)
            else:
                raise ScriptError(f'bad field specifier "{spec}"')
            i += 2
        return "".join(out)

    def _cmd_regexp(self, argv):
        if len(argv) < 2:
            raise ScriptError('wrong # args: should be "regexp exp string ?matchVar? ?subMatchVar ...?"')
        pattern, target = argv[0], argv[1]
        try:
            m = re.search(pattern, target)
        except re.error as e:
            raise ScriptError(f"bad regular expression: {e}")
        if not m:
            return "0"
        for vi, varname in enumerate(argv[2:]):
            group = m.group(vi) if vi <= (m.re.groups) else None
            base, idx = self.split_varname(varname)
            self.set_var(base, group if group is not None else "", idx)
        return "1"

    def _cmd_puts(self, argv):
        newline = True
        if argv and argv[0] == "-nonewline":
            newline = False
            argv = argv[1:]
        if len(argv) == 1:
            chan, text = "stdout", argv[0]
        elif len(argv) == 2:
            chan, text = argv
        else:
            raise ScriptError('wrong # args: should be "puts ?-nonewline? ?channelId? string"')
        data = text + ("\n" if newline else "")
        if chan in ("stdout", "stderr"):
            self.stdout_write(data)
        else:
            ch = self.channels.get(chan)
            if ch is None:
                raise ScriptError(f'can not find channel named "{chan}"')
            ch.fobj.write(data)
        return ""

    def _cmd_open(self, argv):
        if len(argv) not in (1, 2):
            raise ScriptError('wrong # args: should be "open fileName ?access?"')
        path = argv[0]
        mode = argv[1] if len(argv) == 2 else "r"
        if mode not in ("r", "w", "a", "r+", "w+", "a+"):
            raise ScriptError(f'illegal access mode "{mode}"')
        try:
            fobj = open(path, mode, encoding="utf-8", newline="")
        except OSError as e:
            raise ScriptError(f'couldn\'t open "{path}": {e.strerror}')
        self._chan_seq += 1
        name = f"file{self._chan_seq}"
        self.channels[name] = Channel(fobj, name)
        return name

    def _cmd_close(self, argv):
        if len(argv) != 1:
            raise ScriptError('wrong # args: should be "close channelId"')
        ch = self.channels.pop(argv[0], None)
        if ch is None:
            raise ScriptError(f'can not find channel named "{argv[0]}"')
        ch.fobj.close()
        return ""

    def _cmd_gets(self, argv):
        if len(argv) not in (1, 2):
            raise ScriptError('wrong # args: should be "gets channelId ?varName?"')
        ch = self.channels.get(argv[0])
        if ch is None:
            raise ScriptError(f'can not find channel named "{argv[0]}"')
        line = ch.fobj.readline()
        at_eof = line == ""
        line = line.rstrip("\n").rstrip("\r")
        if len(argv) == 2:
            base, idx = self.split_varname(argv[1])
            self.set_var(base, line, idx)
            return "-1" if at_eof else str(len(line))
        return line

    def _cmd_eval(self, argv):
        return self.eval_script(" ".join(argv))

    def _cmd_catch(self, argv):
        if len(argv) not in (1, 2):
            raise ScriptError('wrong # args: should be "catch command ?varName?"')
        code, result = "0", ""
        try:
            result = self.eval_script(argv[0])
        except ScriptError as e:
            code, result = "1", e.message
        except _Return as r:
            code, result = "2", r.value
        except _Break:
            code = "3"
        except _Continue:
            code = "4"
        if len(argv) == 2:
            base, idx = self.split_varname(argv[1])
            self.set_var(base, result, idx)
        return code

    def _cmd_info(self, argv):
        if argv and argv[0] == "commands":
            names = list(self.commands.keys())
            if len(argv) == 2:
                names = [n for n in names if fnmatch.fnmatchcase(n, argv[1])]
            elif len(argv) > 2:
                raise ScriptError('wrong # args: should be "info commands ?pattern?"')
            return list_format(names)
        if argv and argv[0] == "exists" and len(argv) == 2:
            base, idx = self.split_varname(argv[1])
            try:
                self.get_var(base, idx)
                return "1"
            except ScriptError:
                return "0"
        raise ScriptError('should be "info commands ?pattern?" or "info exists varName"')

    def _cmd_unset(self, argv):
        if not argv:
            raise ScriptError('wrong # args: should be "unset varName ?varName ...?"')
        for name in argv:
            base, idx = self.split_varname(name)
            self.unset_var(base, idx)
        return ""

    def _cmd_error(self, argv):
        raise ScriptError(argv[0] if argv else "")

    def _cmd_source(self, argv):
        if len(argv) != 1:
            raise ScriptError('wrong # args: should be "source fileName"')
        try:
            with open(argv[0], "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise ScriptError(f'couldn\'t read file "{argv[0]}": {e.strerror}')
        return self.eval_script(text)

    def _cmd_exit(self, argv):
        code = 0
        if argv:
            n = _numeric(argv[0])
            if n is None:
                raise ScriptError(f'expected integer but got "{argv[0]}"')
            code = n
        raise ExitScript(code)
