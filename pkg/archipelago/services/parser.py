"""
Expression Parser
Surface syntax for finite words and schema words:

    expr  := term ( "·"? term )*
    term  := atom ( "^" int )?
    atom  := g<i>:<literal> | "1" | "(" expr ")" | inv(expr) | tau[j](expr)
           | p[n](expr) | nest(k=S.., base=g{affine}:<literal>, exp=affine)
           | eps(<literal>, ..., tail=<literal>|last, start=int)
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import pyparsing as pp

from archipelago.core.exceptions import ContractViolation, ParseException, UnsupportedException
from archipelago.services import freewords as fw
from archipelago.services.factor_groups import FamilySpec, parse_element
from archipelago.services.freewords import EMPTY, Letter
from archipelago.services.projective import (
    Affine,
    ProjectiveWord,
    epsilon_word,
    finite_value,
    inverse,
    leaf_word,
    nested_word,
    power,
    product,
    projection,
    rebase,
    tau,
)


# Expression AST

@dataclass(frozen=True)
class LetterExpr:
    index: int
    literal: str


@dataclass(frozen=True)
class One:
    """The empty word."""


@dataclass(frozen=True)
class ProductExpr:
    terms: Tuple["Expression", ...]


@dataclass(frozen=True)
class PowerExpr:
    base: "Expression"
    exponent: int


@dataclass(frozen=True)
class InvExpr:
    body: "Expression"


@dataclass(frozen=True)
class TauExpr:
    level: int
    body: "Expression"


@dataclass(frozen=True)
class ProjExpr:
    depth: int
    body: "Expression"


@dataclass(frozen=True)
class NestExpr:
    start: int = 1
    index: Affine = field(default_factory=lambda: Affine(1, 0))
    literal: str = "1"
    exponent: Affine = field(default_factory=lambda: Affine(1, 1))


@dataclass(frozen=True)
class EpsExpr:
    coordinates: Tuple[str, ...]
    tail: Optional[str] = None
    start: int = 1


Expression = Union[
    LetterExpr, One, ProductExpr, PowerExpr, InvExpr, TauExpr, ProjExpr, NestExpr, EpsExpr
]


# Grammar

def _affine(tokens: pp.ParseResults) -> Affine:
    if tokens.get("const") is not None:
        return Affine(0, int(tokens["const"]))
    scale = int(tokens["scale"]) if tokens.get("scale") else 1
    offset = int(tokens["offset"]) if tokens.get("offset") else 0
    return Affine(scale, offset)


def _nest(tokens: pp.ParseResults) -> NestExpr:
    expr = NestExpr()
    if "start" in tokens:
        expr = NestExpr(tokens["start"], expr.index, expr.literal, expr.exponent)
    if "base" in tokens:
        index, literal = tokens["base"]
        expr = NestExpr(expr.start, index, literal, expr.exponent)
    if "exp" in tokens:
        expr = NestExpr(expr.start, expr.index, expr.literal, tokens["exp"])
    return expr


def _eps(tokens: pp.ParseResults) -> EpsExpr:
    tail = tokens.get("tail")
    return EpsExpr(
        coordinates=tuple(tokens["coords"]),
        tail=None if tail in (None, "last") else tail,
        start=tokens.get("start", 1),
    )


def _term(tokens: pp.ParseResults) -> Expression:
    return PowerExpr(tokens[0], tokens[1]) if len(tokens) == 2 else tokens[0]


def _expr(tokens: pp.ParseResults) -> Expression:
    return ProductExpr(tuple(tokens)) if len(tokens) > 1 else tokens[0]


def _build_grammar() -> pp.ParserElement:
    expr = pp.Forward()
    LPAR, RPAR, LBRACK, RBRACK, COMMA, EQ = map(pp.Suppress, "()[],=")

    integer = pp.Regex(r"[+-]?\d+").set_parse_action(lambda t: int(t[0]))
    natural = pp.Regex(r"\d+").set_parse_action(lambda t: int(t[0]))
    literal = pp.original_text_for(pp.nested_expr("<", ">")) | pp.Regex(r"[A-Za-z0-9'/+\-]+")
    affine = pp.Regex(r"(?P<scale>\d*)k(?P<offset>[+-]\d+)?|(?P<const>[+-]?\d+)").set_parse_action(_affine)

    letter = (pp.Regex(r"g(?P<index>\d+):") + literal).set_parse_action(
        lambda t: LetterExpr(int(t["index"]), t[1])
    )
    one = pp.Regex(r"1(?![0-9])").set_parse_action(lambda t: One())
    body = LPAR + pp.Optional(expr, default=One()) + RPAR

    inv = (pp.Keyword("inv").suppress() + body).set_parse_action(lambda t: InvExpr(t[0]))
    tau_ = (pp.Keyword("tau").suppress() + LBRACK + natural + RBRACK + body).set_parse_action(
        lambda t: TauExpr(t[0], t[1])
    )
    proj = (pp.Keyword("p").suppress() + LBRACK + natural + RBRACK + body).set_parse_action(
        lambda t: ProjExpr(t[0], t[1])
    )

    start_arg = pp.Suppress(pp.Literal("k") + "=") + natural + pp.Suppress("..")
    base_arg = pp.Group(pp.Suppress(pp.Literal("base") + "=" + "g" + "{") + affine + pp.Suppress("}" + pp.Literal(":")) + literal)
    exp_arg = pp.Suppress(pp.Literal("exp") + "=") + affine
    nest_arg = start_arg("start") | base_arg("base") | exp_arg("exp")
    nest = (
        pp.Keyword("nest").suppress() + LPAR + pp.Optional(pp.DelimitedList(nest_arg)) + RPAR
    ).set_parse_action(_nest)

    keyword_arg = pp.Regex(r"(tail|start)\s*=")
    coordinates = pp.Group(literal + pp.ZeroOrMore(COMMA + ~keyword_arg + literal))
    eps = (
        pp.Keyword("eps").suppress()
        + LPAR
        + coordinates("coords")
        + pp.Optional(COMMA + pp.Suppress(pp.Literal("tail") + EQ) + literal("tail"))
        + pp.Optional(COMMA + pp.Suppress(pp.Literal("start") + EQ) + natural("start"))
        + RPAR
    ).set_parse_action(_eps)

    atom = letter | inv | tau_ | proj | nest | eps | one | (LPAR + expr + RPAR)
    term = (atom + pp.Optional(pp.Suppress("^") + integer)).set_parse_action(_term)
    expr <<= (term + pp.ZeroOrMore(pp.Optional(pp.Suppress("·")) + term)).set_parse_action(_expr)
    return expr


_GRAMMAR = _build_grammar()


def parse_expression(text: str, spec: Optional[FamilySpec] = None) -> Expression:
    """
    Parse an expression; with a family, every letter literal is also checked
    against the descriptor of its factor.
    """
    try:
        expr = _GRAMMAR.parse_string(text, parse_all=True)[0]
    except pp.ParseBaseException as e:
        raise ParseException(
            message=f"Syntax error at column {e.column}: {e.msg}",
            details={
                "expression": text,
                "position": e.loc,
                "line": e.lineno,
                "column": e.column,
                "found": text[e.loc : e.loc + 12],
            },
        )
    if spec is not None:
        validate_expression(expr, spec)
    return expr


def _check_letter(index: int, literal: str, spec: FamilySpec) -> None:
    if not spec.has_index(index):
        raise ParseException(
            message=f"Family {spec.label} has no factor G_{index}",
            details={"index": index, "family": spec.label},
        )
    parse_element(spec.descriptor(index), literal)


def validate_expression(expr: Expression, spec: FamilySpec) -> None:
    """Raise ParseException for letters whose index or literal the family rejects."""
    if isinstance(expr, LetterExpr):
        _check_letter(expr.index, expr.literal, spec)
    elif isinstance(expr, ProductExpr):
        for term in expr.terms:
            validate_expression(term, spec)
    elif isinstance(expr, PowerExpr):
        validate_expression(expr.base, spec)
    elif isinstance(expr, (InvExpr, TauExpr, ProjExpr)):
        validate_expression(expr.body, spec)


# Formatting

def format_expression(expr: Expression) -> str:
    """Canonical text of an expression; parse_expression inverts it."""
    if isinstance(expr, LetterExpr):
        return f"g{expr.index}:{expr.literal}"
    if isinstance(expr, One):
        return "1"
    if isinstance(expr, ProductExpr):
        return " ".join(
            f"({format_expression(t)})" if isinstance(t, ProductExpr) else format_expression(t)
            for t in expr.terms
        )
    if isinstance(expr, PowerExpr):
        base = format_expression(expr.base)
        if isinstance(expr.base, (ProductExpr, PowerExpr)):
            base = f"({base})"
        return f"{base}^{expr.exponent}"
    if isinstance(expr, InvExpr):
        return f"inv({format_expression(expr.body)})"
    if isinstance(expr, TauExpr):
        return f"tau[{expr.level}]({format_expression(expr.body)})"
    if isinstance(expr, ProjExpr):
        return f"p[{expr.depth}]({format_expression(expr.body)})"
    if isinstance(expr, NestExpr):
        return f"nest(k={expr.start}.., base=g{{{expr.index}}}:{expr.literal}, exp={expr.exponent})"
    if isinstance(expr, EpsExpr):
        text = f"eps({','.join(expr.coordinates)}, tail={expr.tail or 'last'}"
        return text + (f", start={expr.start})" if expr.start != 1 else ")")
    raise UnsupportedException(
        message=f"Unknown expression node {type(expr).__name__}",
        details={"node": type(expr).__name__},
    )


# Evaluation

def _aligned(words: Tuple[ProjectiveWord, ...]) -> Tuple[ProjectiveWord, ...]:
    base = min(w.base_index for w in words)
    return tuple(rebase(w, base) if w.base_index != base else w for w in words)


def align(u: ProjectiveWord, v: ProjectiveWord) -> Tuple[ProjectiveWord, ProjectiveWord]:
    """View two words in the same tail product."""
    left, right = _aligned((u, v))
    return left, right


def evaluate(expr: Expression, spec: FamilySpec) -> ProjectiveWord:
    """Build the word an expression denotes, over base index 1 unless tau raises it."""
    if isinstance(expr, LetterExpr):
        _check_letter(expr.index, expr.literal, spec)
        element = parse_element(spec.descriptor(expr.index), expr.literal)
        return leaf_word(spec, fw.reduce([(expr.index, element)]))
    if isinstance(expr, One):
        return leaf_word(spec, EMPTY)
    if isinstance(expr, ProductExpr):
        words = _aligned(tuple(evaluate(t, spec) for t in expr.terms))
        result = words[0]
        for w in words[1:]:
            result = product(result, w)
        return result
    if isinstance(expr, PowerExpr):
        return power(evaluate(expr.base, spec), expr.exponent)
    if isinstance(expr, InvExpr):
        return inverse(evaluate(expr.body, spec))
    if isinstance(expr, TauExpr):
        return tau(expr.level, evaluate(expr.body, spec))
    if isinstance(expr, ProjExpr):
        w = evaluate(expr.body, spec)
        return leaf_word(spec, projection(w, expr.depth), base_index=w.base_index)
    if isinstance(expr, NestExpr):
        return nested_word(spec, expr.start, expr.index, expr.exponent, expr.literal)
    if isinstance(expr, EpsExpr):
        return epsilon_word(spec, expr.coordinates, expr.tail, expr.start)
    raise UnsupportedException(
        message=f"Unknown expression node {type(expr).__name__}",
        details={"node": type(expr).__name__},
    )


def evaluate_text(text: str, spec: FamilySpec) -> ProjectiveWord:
    return evaluate(parse_expression(text, spec), spec)


def evaluate_finite(text: str, spec: FamilySpec) -> fw.FiniteWord:
    """The finite word an expression denotes; infinite words are unsupported here."""
    w = evaluate_text(text, spec)
    value = finite_value(w)
    if value is None:
        raise UnsupportedException(
            message="Expression does not denote a finite word",
            details={"expression": text},
        )
    return value


def parse_letter(text: str, spec: FamilySpec) -> Letter:
    """A single nonidentity letter g<i>:<literal>."""
    expr = parse_expression(text, spec)
    if not isinstance(expr, LetterExpr):
        raise ParseException(
            message=f"Expected a single letter like g1:1, got {text!r}",
            details={"expression": text},
        )
    element = parse_element(spec.descriptor(expr.index), expr.literal)
    if element.is_identity:
        raise ContractViolation(
            message=f"Letter {text} is the identity",
            details={"letter": text},
        )
    return Letter(expr.index, element)
