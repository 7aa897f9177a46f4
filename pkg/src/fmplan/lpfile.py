"""LP-format emission and parsing for MatrixModel.

The emitted dialect is the common LP subset: an objective section, Subject
To rows, explicit Bounds for every variable (so parsing recovers the full
column set), a Binaries list, and End.  Output is deterministic and numbers
are printed so that parsing returns the exact same floats.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .mip import MatrixModel, ModelError, Row, Variable

__all__ = ["LpParseError", "emit_lp", "parse_lp"]


class LpParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


def _fmt(value: float) -> str:
    if value == math.inf:
        return "+inf"
    if value == -math.inf:
        return "-inf"
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def _expr_lines(coeffs, variables, head: str) -> list[str]:
    parts = []
    for idx, (col, coef) in enumerate(coeffs):
        name = variables[col].name
        if idx == 0:
            sign = "-" if coef < 0 else ""
        else:
            sign = "- " if coef < 0 else "+ "
        parts.append(f"{sign}{_fmt(abs(coef))} {name}")
    lines = []
    current = head
    for part in parts:
        if len(current) + len(part) + 1 > 78 and current != head:
            lines.append(current)
            current = "   "
        current += " " + part
    lines.append(current)
    return lines


def emit_lp(model: MatrixModel) -> str:
    """Serialize a model to LP-format text (deterministic)."""
    names = set()
    for v in model.variables:
        if v.name in names:
            raise ModelError(f"duplicate variable name in model: {v.name}")
        names.add(v.name)
    rownames = set()
    for r in model.rows:
        if r.name in rownames or r.name in names:
            raise ModelError(f"duplicate row name in model: {r.name}")
        rownames.add(r.name)

    out = ["\\ fmplan model"]
    out.append("Minimize")
    out.extend(_expr_lines(model.objective, model.variables, " obj:"))
    out.append("Subject To")
    for row in model.rows:
        lines = _expr_lines(row.coeffs, model.variables, f" {row.name}:")
        lines[-1] += f" {row.sense} {_fmt(row.rhs)}"
        out.extend(lines)
    out.append("Bounds")
    for v in model.variables:
        if v.kind == "binary" and (v.lb, v.ub) == (0.0, 1.0):
            continue
        if v.lb == v.ub:
            out.append(f" {v.name} = {_fmt(v.lb)}")
        elif v.lb == -math.inf and v.ub == math.inf:
            out.append(f" {v.name} free")
        else:
            out.append(f" {_fmt(v.lb)} <= {v.name} <= {_fmt(v.ub)}")
    binaries = [v.name for v in model.variables if v.kind == "binary"]
    if binaries:
        out.append("Binaries")
        line = ""
        for name in binaries:
            if len(line) + len(name) + 1 > 78:
                out.append(line)
                line = ""
            line += (" " if line else " ") + name
        if line:
            out.append(line)
    out.append("End")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


@dataclass
class _Token:
    kind: str  # "name", "number", "sign", "sense", "colon"
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t\r]+)
      | (?P<comment>\\[^\n]*)
      | (?P<newline>\n)
      | (?P<sense><=|>=|=<|=>|[<>=])
      | (?P<colon>:)
      | (?P<sign>[+-])
      | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
      | (?P<name>[A-Za-z_!#$%&;?@'`(){}|~.][A-Za-z0-9_!#$%&;?@'`(){}|~.]*)
    """,
    re.X,
)

_SECTION_WORDS = {
    "minimize": "objective",
    "minimise": "objective",
    "min": "objective",
    "maximize": "objective-max",
    "maximise": "objective-max",
    "max": "objective-max",
    "subject": "rows",
    "st": "rows",
    "s.t.": "rows",
    "such": "rows",
    "bounds": "bounds",
    "bound": "bounds",
    "binaries": "binaries",
    "binary": "binaries",
    "bin": "binaries",
    "end": "end",
    "general": "general",
    "generals": "general",
    "gen": "general",
    "semi-continuous": "general",
    "integers": "general",
    "integer": "general",
}


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise LpParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind == "newline":
            line += 1
            col = 1
        else:
            if kind not in ("ws", "comment"):
                tokens.append(_Token(kind, tok, line, col))
            col += len(tok)
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.model = MatrixModel()
        self.explicit_bounds: set[str] = set()

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("", "", 1, 1)
            raise LpParseError("unexpected end of file", last.line, last.col)
        self.pos += 1
        return tok

    def at_section(self) -> str | None:
        tok = self.peek()
        if tok is None or tok.kind != "name":
            return None
        word = tok.text.lower()
        if word not in _SECTION_WORDS:
            return None
        nxt = self.tokens[self.pos + 1] if self.pos + 1 < len(self.tokens) else None
        if nxt is not None and nxt.kind == "colon":
            return None  # a label that happens to spell a keyword
        return _SECTION_WORDS[word]

    def eat_section_header(self) -> str:
        tok = self.next()
        word = tok.text.lower()
        section = _SECTION_WORDS.get(word)
        if section is None:
            raise LpParseError(f"expected a section keyword, got {tok.text!r}", tok.line, tok.col)
        if word in ("subject", "such"):
            follow = self.next()
            if follow.kind != "name" or follow.text.lower() != "to":
                raise LpParseError("expected 'To' after 'Subject'", follow.line, follow.col)
        return section

    def column(self, name: str) -> int:
        if name not in self.model.var_index:
            self.model.add_var(name, "continuous", 0.0, math.inf, _meta_from_name(name))
        return self.model.var_index[name]

    def parse_number(self) -> float:
        sign = 1.0
        tok = self.next()
        while tok.kind == "sign":
            if tok.text == "-":
                sign = -sign
            tok = self.next()
        if tok.kind == "number":
            return sign * float(tok.text)
        if tok.kind == "name" and tok.text.lower() in ("inf", "infinity", "1e30"):
            return sign * math.inf
        raise LpParseError(f"expected a number, got {tok.text!r}", tok.line, tok.col)

    def parse_expr(self) -> list[tuple[int, float]]:
        """Linear expression: terms until a sense token or section keyword."""
        coeffs: dict[int, float] = {}
        order: list[int] = []
        while True:
            tok = self.peek()
            if tok is None or tok.kind in ("sense",):
                break
            if self.at_section() is not None:
                break
            sign = 1.0
            while tok is not None and tok.kind == "sign":
                self.next()
                if tok.text == "-":
                    sign = -sign
                tok = self.peek()
            if tok is None:
                break
            if tok.kind == "number":
                self.next()
                coef = sign * float(tok.text)
                follow = self.peek()
                if follow is not None and follow.kind == "name" and self.at_section() is None:
                    name_tok = self.next()
                    col = self.column(name_tok.text)
                else:
                    raise LpParseError(
                        "constant terms are not supported", tok.line, tok.col
                    )
            elif tok.kind == "name":
                self.next()
                col = self.column(tok.text)
                coef = sign
            else:
                raise LpParseError(f"unexpected token {tok.text!r}", tok.line, tok.col)
            if col in coeffs:
                coeffs[col] += coef
            else:
                coeffs[col] = coef
                order.append(col)
        return [(col, coeffs[col]) for col in order if coeffs[col] != 0.0]

    def parse(self) -> MatrixModel:
        section = self.eat_section_header()
        if section not in ("objective", "objective-max"):
            tok = self.tokens[0]
            raise LpParseError("model must start with an objective section", tok.line, tok.col)
        negate = section == "objective-max"

        # Optional objective label.
        tok = self.peek()
        if (
            tok is not None
            and tok.kind == "name"
            and self.pos + 1 < len(self.tokens)
            and self.tokens[self.pos + 1].kind == "colon"
        ):
            self.pos += 2
        objective = self.parse_expr()
        if negate:
            objective = [(c, -v) for c, v in objective]
        self.model.objective = objective

        section = self.eat_section_header()
        if section != "rows":
            tok = self.tokens[self.pos - 1]
            raise LpParseError("expected 'Subject To'", tok.line, tok.col)

        row_counter = 0
        while True:
            marker = self.at_section()
            if marker is not None:
                break
            label = None
            tok = self.peek()
            if tok is None:
                raise LpParseError("unexpected end of file in rows", 0, 0)
            if (
                tok.kind == "name"
                and self.pos + 1 < len(self.tokens)
                and self.tokens[self.pos + 1].kind == "colon"
            ):
                label = tok.text
                self.pos += 2
            coeffs = self.parse_expr()
            sense_tok = self.next()
            if sense_tok.kind != "sense":
                raise LpParseError(
                    f"expected a constraint sense, got {sense_tok.text!r}",
                    sense_tok.line,
                    sense_tok.col,
                )
            sense = {"<": "<=", ">": ">=", "=<": "<=", "=>": ">="}.get(
                sense_tok.text, sense_tok.text
            )
            rhs = self.parse_number()
            if label is None:
                label = f"r{row_counter}"
            row_counter += 1
            if not coeffs:
                raise LpParseError("row has no terms", sense_tok.line, sense_tok.col)
            self.model.rows.append(Row(label, coeffs, sense, rhs))

        while True:
            section = self.eat_section_header()
            if section == "end":
                break
            if section == "bounds":
                self._parse_bounds()
            elif section == "binaries":
                self._parse_binaries()
            elif section == "general":
                tok = self.tokens[self.pos - 1]
                raise LpParseError(
                    f"unsupported section {tok.text!r}", tok.line, tok.col
                )
        return self.model

    def _parse_bounds(self):
        while self.at_section() is None:
            tok = self.peek()
            if tok is None:
                raise LpParseError("unexpected end of file in bounds", 0, 0)
            if tok.kind in ("sign", "number") or (
                tok.kind == "name" and tok.text.lower() in ("inf", "infinity")
            ):
                value = self.parse_number()
                sense = self.next()
                if sense.kind != "sense" or sense.text not in ("<=", "<", "=<"):
                    raise LpParseError("expected '<=' in bound", sense.line, sense.col)
                name_tok = self.next()
                if name_tok.kind != "name":
                    raise LpParseError("expected a variable name", name_tok.line, name_tok.col)
                var = self.model.variables[self.column(name_tok.text)]
                var.lb = value
                self.explicit_bounds.add(var.name)
                follow = self.peek()
                if follow is not None and follow.kind == "sense":
                    self.next()
                    var.ub = self.parse_number()
            else:
                name_tok = self.next()
                if name_tok.kind != "name":
                    raise LpParseError("expected a variable name", name_tok.line, name_tok.col)
                follow = self.peek()
                if follow is not None and follow.kind == "name" and follow.text.lower() == "free":
                    self.next()
                    var = self.model.variables[self.column(name_tok.text)]
                    var.lb, var.ub = -math.inf, math.inf
                    self.explicit_bounds.add(var.name)
                    continue
                sense = self.next()
                if sense.kind != "sense":
                    raise LpParseError("expected a bound sense", sense.line, sense.col)
                value = self.parse_number()
                var = self.model.variables[self.column(name_tok.text)]
                if sense.text in ("<=", "<", "=<"):
                    var.ub = value
                elif sense.text in (">=", ">", "=>"):
                    var.lb = value
                else:
                    var.lb = var.ub = value
                self.explicit_bounds.add(var.name)

    def _parse_binaries(self):
        while self.at_section() is None:
            tok = self.next()
            if tok.kind != "name":
                raise LpParseError("expected a variable name", tok.line, tok.col)
            var = self.model.variables[self.column(tok.text)]
            var.kind = "binary"
            if var.name not in self.explicit_bounds:
                var.lb, var.ub = 0.0, 1.0


_NAME_PATTERNS = [
    (re.compile(r"^a_(\d+)_(\d+)_(\d+)$"), "a"),
    (re.compile(r"^as_(\d+)_(\d+)_(\d+)$"), "as"),
    (re.compile(r"^m_(\d+)_(\d+)$"), "m"),
    (re.compile(r"^u_(\d+)_(\d+)$"), "u"),
    (re.compile(r"^rft_(\d+)_(\d+)$"), "rft"),
]


def _meta_from_name(name: str) -> tuple[str, int, int, int]:
    for pattern, fam in _NAME_PATTERNS:
        m = pattern.match(name)
        if not m:
            continue
        if fam in ("a", "as"):
            j, t, i = (int(g) for g in m.groups())
            return (fam, j, t, i)
        i, t = (int(g) for g in m.groups())
        return (fam, -1, t, i)
    return ("x", -1, -1, -1)


def parse_lp(text: str) -> MatrixModel:
    """Parse LP-format text back into a MatrixModel.

    Inverse of emit_lp up to variable column order; comments and blank
    lines are ignored; malformed input raises LpParseError with the
    offending line and column.
    """
    return _Parser(text).parse()
