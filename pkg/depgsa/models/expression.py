# Copyright (c) 2023-2024 DepGSA developers
# MIT License

"""
A small arithmetic expression language for user-defined models.

Grammar (by decreasing precedence):

    atom    := number | x<i> | name "(" expr ")" | "(" expr ")"
    power   := atom "^" unary              (right associative)
    unary   := "-" unary | power
    product := unary (("*" | "/") unary)*
    sum     := product (("+" | "-") product)*

with the functions ``abs``, ``exp``, ``sqrt`` and ``log``.  The parser
is a Pratt (top-down operator precedence) parser; the trees evaluate
vectorized over the rows of an input array.
"""

import re
import logging

import numpy as np

from ..errors import ExpressionError, ModelEvaluationError


logger = logging.getLogger(__name__)

# name: (numpy function, arity)
FUNCTIONS = {
    "abs": (np.abs, 1),
    "exp": (np.exp, 1),
    "sqrt": (np.sqrt, 1),
    "log": (np.log, 1),
}

# Binding powers
BP_SUM = 10
BP_PRODUCT = 20
BP_UNARY = 25
BP_POWER = 30
BP_ATOM = 100

_TOKEN_RE = re.compile(r"""
    (?P<number> (?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)? )
  | (?P<name>   [A-Za-z_][A-Za-z_0-9]* )
  | (?P<op>     [-+*/^(),] )
  | (?P<space>  [ \t\r]+ )
  | (?P<newline> \n )
""", re.VERBOSE)

_VAR_RE = re.compile(r"^x([1-9][0-9]*)$")


class Token:
    def __init__(self, kind, text, line, column):
        self.kind = kind
        self.text = text
        self.line = line
        self.column = column

    def __repr__(self):
        return "Token(%s, %r, %d:%d)" % (self.kind, self.text,
                                         self.line, self.column)


def tokenize(text):
    """
    Split the text into tokens, ending with an ``"end"`` token placed
    just after the last character.
    """
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        mo = _TOKEN_RE.match(text, pos)
        column = pos - line_start + 1
        if mo is None:
            raise ExpressionError("unexpected character %r" % text[pos],
                                  line=line, column=column)
        kind = mo.lastgroup
        if kind == "newline":
            line += 1
            line_start = mo.end()
        elif kind != "space":
            tokens.append(Token(kind, mo.group(), line, column))
        pos = mo.end()
    tokens.append(Token("end", "", line, len(text) - line_start + 1))
    return tokens


# --------------------------------------------------------------------
# Tree nodes
# --------------------------------------------------------------------

class Node:
    """
    Base class of the expression tree nodes.

    ``column`` locates the node in the source text for the error
    reports; it does not take part in the comparisons.
    """
    prec = BP_ATOM

    def __init__(self, column=None):
        self.column = column

    def children(self):
        return ()

    def _key(self):
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self._key() == other._key()

    def __hash__(self):
        return hash((type(self).__name__, self._key()))

    def variables(self):
        """Indices of the referenced variables."""
        found = set()
        for child in self.children():
            found |= child.variables()
        return found

    def evaluate(self, x):
        """
        Evaluate the node on the rows of ``x`` (shape ``(n, d)``).

        Raises
        ------
        ModelEvaluationError :
            The node yields a non-finite value from finite operands; the
            error carries the first such row and the node column.
        """
        args = [child.evaluate(x) for child in self.children()]
        with np.errstate(all="ignore"):
            value = self._compute(x, *args)
        if args:
            finite_in = np.all([np.isfinite(a) for a in args], axis=0)
            bad = finite_in & ~np.isfinite(value)
            if np.any(bad):
                row = int(np.argmax(bad))
                raise ModelEvaluationError(
                    "%s is not finite at row %d (column %s)" %
                    (self, row, self.column),
                    row=row, position=self.column)
        return value

    def _compute(self, x, *args):
        raise NotImplementedError


class Num(Node):
    def __init__(self, value, column=None):
        super().__init__(column)
        self.value = float(value)

    def _key(self):
        return (self.value,)

    def _compute(self, x):
        return np.full(x.shape[0], self.value)

    def __repr__(self):
        return format_number(self.value)


class Var(Node):
    def __init__(self, index, column=None):
        super().__init__(column)
        self.index = int(index)

    def _key(self):
        return (self.index,)

    def variables(self):
        return {self.index}

    def _compute(self, x):
        return x[:, self.index-1]

    def __repr__(self):
        return "x%d" % self.index


class Neg(Node):
    prec = BP_UNARY

    def __init__(self, operand, column=None):
        super().__init__(column)
        self.operand = operand

    def children(self):
        return (self.operand,)

    def _key(self):
        return (self.operand,)

    def _compute(self, x, a):
        return -a

    def __repr__(self):
        return "Neg(%r)" % (self.operand,)


class BinOp(Node):
    symbol = None

    def __init__(self, left, right, column=None):
        super().__init__(column)
        self.left = left
        self.right = right

    def children(self):
        return (self.left, self.right)

    def _key(self):
        return (self.left, self.right)

    def __repr__(self):
        return "%s(%r, %r)" % (type(self).__name__, self.left, self.right)


class Add(BinOp):
    symbol = "+"
    prec = BP_SUM

    def _compute(self, x, a, b):
        return a + b


class Sub(BinOp):
    symbol = "-"
    prec = BP_SUM

    def _compute(self, x, a, b):
        return a - b


class Mul(BinOp):
    symbol = "*"
    prec = BP_PRODUCT

    def _compute(self, x, a, b):
        return a * b


class Div(BinOp):
    symbol = "/"
    prec = BP_PRODUCT

    def _compute(self, x, a, b):
        return a / b


class Pow(BinOp):
    symbol = "^"
    prec = BP_POWER

    def _compute(self, x, a, b):
        return np.power(a, b)


class Call(Node):
    def __init__(self, name, args, column=None):
        super().__init__(column)
        self.name = name
        self.args = tuple(args)

    def children(self):
        return self.args

    def _key(self):
        return (self.name,) + self.args

    def _compute(self, x, *args):
        return FUNCTIONS[self.name][0](*args)

    def __repr__(self):
        return "%s(%s)" % (self.name.capitalize(),
                           ", ".join(repr(a) for a in self.args))


BINARY_OPS = {cls.symbol: cls for cls in (Add, Sub, Mul, Div, Pow)}


# --------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------

class Parser:
    """
    Pratt parser of one expression.

    Parameters
    ----------
    text : str
    dim : int, optional
        Number of model inputs; variables beyond ``dim`` are rejected.
    """

    def __init__(self, text, dim=None):
        self.text = text
        self.dim = dim
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def token(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.token
        if tok.kind == "end":
            message = "unexpected end of input" if message is None \
                else message
        return ExpressionError(message or "unexpected %r" % tok.text,
                               line=tok.line, column=tok.column)

    def expect(self, text):
        tok = self.token
        if tok.text != text or tok.kind == "end":
            raise self.error("expected %r" % text if tok.kind != "end"
                             else None)
        return self.advance()

    def parse(self):
        node = self.expression(0)
        if self.token.kind != "end":
            raise self.error(None)
        return node

    def expression(self, rbp):
        left = self.nud(self.advance())
        while self.lbp(self.token) > rbp:
            left = self.led(self.advance(), left)
        return left

    @staticmethod
    def lbp(tok):
        if tok.kind != "op":
            return 0
        return {"+": BP_SUM, "-": BP_SUM, "*": BP_PRODUCT,
                "/": BP_PRODUCT, "^": BP_POWER}.get(tok.text, 0)

    def nud(self, tok):
        if tok.kind == "number":
            value = float(tok.text)
            if not np.isfinite(value):
                raise self.error("number out of range: %s" % tok.text, tok)
            return Num(value, column=tok.column)
        elif tok.kind == "name":
            if self.token.text == "(" and self.token.kind == "op":
                return self.call(tok)
            mo = _VAR_RE.match(tok.text)
            if mo is None:
                raise self.error("unknown identifier %r" % tok.text, tok)
            index = int(mo.group(1))
            if self.dim is not None and index > self.dim:
                raise self.error("variable %s out of range (d = %d)" %
                                 (tok.text, self.dim), tok)
            return Var(index, column=tok.column)
        elif tok.kind == "op" and tok.text == "-":
            return Neg(self.expression(BP_UNARY), column=tok.column)
        elif tok.kind == "op" and tok.text == "+":
            return self.expression(BP_UNARY)
        elif tok.kind == "op" and tok.text == "(":
            node = self.expression(0)
            self.expect(")")
            return node
        raise self.error(None, tok)

    def led(self, tok, left):
        cls = BINARY_OPS[tok.text]
        # "^" is right associative
        rbp = BP_POWER - 1 if cls is Pow else cls.prec
        return cls(left, self.expression(rbp), column=tok.column)

    def call(self, tok):
        if tok.text not in FUNCTIONS:
            raise self.error("unknown function %r" % tok.text, tok)
        self.expect("(")
        args = []
        if self.token.text != ")":
            args.append(self.expression(0))
            while self.token.kind == "op" and self.token.text == ",":
                self.advance()
                args.append(self.expression(0))
        self.expect(")")
        arity = FUNCTIONS[tok.text][1]
        if len(args) != arity:
            raise self.error("%s() takes %d argument(s), got %d" %
                             (tok.text, arity, len(args)), tok)
        return Call(tok.text, args, column=tok.column)


def parse_expression(text, dim=None):
    """
    Parse an expression into its tree.

    Raises
    ------
    ExpressionError :
        Syntax error, unknown identifier or wrong number of arguments;
        the error carries the line and column.
    """
    return Parser(text, dim=dim).parse()


# --------------------------------------------------------------------
# Pretty printer
# --------------------------------------------------------------------

def format_number(value):
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def _wrap(node, parens):
    text = pretty(node)
    return "(%s)" % text if parens else text


def pretty(node):
    """
    Print the tree with the minimal parentheses, so that re-parsing the
    text gives back the same tree.
    """
    if isinstance(node, Num):
        return format_number(node.value)
    elif isinstance(node, Var):
        return "x%d" % node.index
    elif isinstance(node, Call):
        return "%s(%s)" % (node.name,
                           ", ".join(pretty(a) for a in node.args))
    elif isinstance(node, Neg):
        return "-" + _wrap(node.operand, node.operand.prec < BP_POWER)
    elif isinstance(node, BinOp):
        prec = node.prec
        is_pow = isinstance(node, Pow)
        left = _wrap(node.left,
                     node.left.prec < prec or
                     (is_pow and node.left.prec <= BP_POWER))
        right = _wrap(node.right,
                      node.right.prec < prec or
                      (not is_pow and node.right.prec <= prec))
        if prec == BP_SUM:
            return "%s %s %s" % (left, node.symbol, right)
        return "%s%s%s" % (left, node.symbol, right)
    raise TypeError("not an expression node: %r" % (node,))
