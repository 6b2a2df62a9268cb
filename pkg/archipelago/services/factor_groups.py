"""
Factor Groups
Descriptors for the groups G_i, their element calculus, and family configuration.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from pathlib import Path
from typing import Annotated, Any, Callable, Iterator, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError, field_validator

from archipelago.core.exceptions import ConfigException, ContractViolation, ParseException
from archipelago.core.logging import logger


Payload = Any

_INT_LITERAL = re.compile(r"[+-]?\d+")
_RATIONAL_LITERAL = re.compile(r"[+-]?\d+(?:/\d+)?")
_FREE_LITERAL = re.compile(r"(?:x\d+'?)+")
_FREE_TOKEN = re.compile(r"x(\d+)('?)")
_INVOLUTION_LITERAL = re.compile(r"(?:y\d+)+")
_INVOLUTION_TOKEN = re.compile(r"y(\d+)")


def _literal_error(descriptor: "FactorBase", text: str, reason: str) -> ParseException:
    return ParseException(
        message=f"Invalid element literal {text!r} for {descriptor.label}: {reason}",
        details={"literal": text, "descriptor": descriptor.label},
    )


def _reduced_sequences(
    alphabet: List[int],
    length: int,
    forbidden: Callable[[int, int], bool],
) -> Iterator[Tuple[int, ...]]:
    """Words of exactly `length` letters in alphabet order, skipping forbidden adjacent pairs."""
    if length == 0:
        yield ()
        return

    def extend(prefix: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
        if len(prefix) == length:
            yield prefix
            return
        for letter in alphabet:
            if prefix and forbidden(prefix[-1], letter):
                continue
            yield from extend(prefix + (letter,))

    yield from extend(())


class FactorBase(BaseModel):
    """
    Contract every factor group G_i fulfils.

    Elements are canonical payloads, so element equality is structural equality.
    """

    model_config = ConfigDict(frozen=True)

    @property
    def label(self) -> str:
        raise NotImplementedError

    def identity_payload(self) -> Payload:
        raise NotImplementedError

    def multiply(self, p: Payload, q: Payload) -> Payload:
        raise NotImplementedError

    def invert(self, p: Payload) -> Payload:
        raise NotImplementedError

    def order_of(self, p: Payload) -> Optional[int]:
        """Order of the element, None when infinite."""
        raise NotImplementedError

    def iter_payloads(self) -> Iterator[Payload]:
        """Deterministic enumeration starting at the identity, without repetition."""
        raise NotImplementedError

    def cardinality(self) -> Optional[int]:
        """Group order, None when countably infinite."""
        raise NotImplementedError

    def has_involution(self) -> bool:
        raise NotImplementedError

    def parse_literal(self, text: str) -> Payload:
        raise NotImplementedError

    def format_literal(self, p: Payload) -> str:
        raise NotImplementedError

    def is_payload(self, p: Payload) -> bool:
        raise NotImplementedError

    def to_config(self) -> Any:
        raise NotImplementedError

    def is_finite(self) -> bool:
        return self.cardinality() is not None


class IntegersFactor(FactorBase):
    """The infinite cyclic group (Z, +)."""

    kind: Literal["integers"] = "integers"

    @property
    def label(self) -> str:
        return "Z"

    def identity_payload(self) -> int:
        return 0

    def multiply(self, p: int, q: int) -> int:
        return p + q

    def invert(self, p: int) -> int:
        return -p

    def order_of(self, p: int) -> Optional[int]:
        return 1 if p == 0 else None

    def iter_payloads(self) -> Iterator[int]:
        yield 0
        for n in itertools.count(1):
            yield n
            yield -n

    def cardinality(self) -> Optional[int]:
        return None

    def has_involution(self) -> bool:
        return False

    def parse_literal(self, text: str) -> int:
        if not _INT_LITERAL.fullmatch(text):
            raise _literal_error(self, text, "expected an integer")
        return int(text)

    def format_literal(self, p: int) -> str:
        return str(p)

    def is_payload(self, p: Payload) -> bool:
        return isinstance(p, int) and not isinstance(p, bool)

    def to_config(self) -> Any:
        return "Z"


class CyclicFactor(FactorBase):
    """The finite cyclic group Z/k, written additively with payloads in [0, k)."""

    kind: Literal["cyclic"] = "cyclic"
    order: int = Field(ge=2)

    @property
    def label(self) -> str:
        return f"Z/{self.order}"

    def identity_payload(self) -> int:
        return 0

    def multiply(self, p: int, q: int) -> int:
        return (p + q) % self.order

    def invert(self, p: int) -> int:
        return (-p) % self.order

    def order_of(self, p: int) -> Optional[int]:
        return self.order // gcd(p, self.order)

    def iter_payloads(self) -> Iterator[int]:
        return iter(range(self.order))

    def cardinality(self) -> Optional[int]:
        return self.order

    def has_involution(self) -> bool:
        return self.order % 2 == 0

    def parse_literal(self, text: str) -> int:
        if not _INT_LITERAL.fullmatch(text):
            raise _literal_error(self, text, "expected an integer")
        value = int(text)
        if not 0 <= value < self.order:
            raise _literal_error(self, text, f"expected a value in [0, {self.order})")
        return value

    def format_literal(self, p: int) -> str:
        return str(p)

    def is_payload(self, p: Payload) -> bool:
        return isinstance(p, int) and not isinstance(p, bool) and 0 <= p < self.order

    def to_config(self) -> Any:
        return {"cyclic": self.order}


class RationalsFactor(FactorBase):
    """The additive group (Q, +); payloads are Fractions in lowest terms."""

    kind: Literal["rationals"] = "rationals"

    @property
    def label(self) -> str:
        return "Q"

    def identity_payload(self) -> Fraction:
        return Fraction(0)

    def multiply(self, p: Fraction, q: Fraction) -> Fraction:
        return p + q

    def invert(self, p: Fraction) -> Fraction:
        return -p

    def order_of(self, p: Fraction) -> Optional[int]:
        return 1 if p == 0 else None

    def iter_payloads(self) -> Iterator[Fraction]:
        # diagonal over p + q = s, both signs
        yield Fraction(0)
        for s in itertools.count(2):
            for p in range(1, s):
                q = s - p
                if gcd(p, q) == 1:
                    yield Fraction(p, q)
                    yield Fraction(-p, q)

    def cardinality(self) -> Optional[int]:
        return None

    def has_involution(self) -> bool:
        return False

    def parse_literal(self, text: str) -> Fraction:
        if not _RATIONAL_LITERAL.fullmatch(text):
            raise _literal_error(self, text, "expected p or p/q")
        try:
            return Fraction(text)
        except ZeroDivisionError:
            raise _literal_error(self, text, "denominator must be positive")

    def format_literal(self, p: Fraction) -> str:
        return str(p)

    def is_payload(self, p: Payload) -> bool:
        return isinstance(p, Fraction)

    def to_config(self) -> Any:
        return "Q"


class FreeFactor(FactorBase):
    """
    Free group on x1, x2, ... (finitely many or countably many generators).

    Payloads are freely reduced tuples of nonzero ints, -i standing for xi'.
    """

    kind: Literal["free"] = "free"
    rank: Union[PositiveInt, Literal["countable"]]

    @property
    def label(self) -> str:
        return "F(inf)" if self.rank == "countable" else f"F{self.rank}"

    def identity_payload(self) -> Tuple[int, ...]:
        return ()

    def multiply(self, p: Tuple[int, ...], q: Tuple[int, ...]) -> Tuple[int, ...]:
        stack = list(p)
        for g in q:
            if stack and stack[-1] == -g:
                stack.pop()
            else:
                stack.append(g)
        return tuple(stack)

    def invert(self, p: Tuple[int, ...]) -> Tuple[int, ...]:
        return tuple(-g for g in reversed(p))

    def order_of(self, p: Tuple[int, ...]) -> Optional[int]:
        return 1 if not p else None

    def _alphabet(self, rank: int) -> List[int]:
        return [s * g for g in range(1, rank + 1) for s in (1, -1)]

    def iter_payloads(self) -> Iterator[Tuple[int, ...]]:
        yield ()
        forbidden = lambda a, b: a == -b  # noqa: E731
        if self.rank != "countable":
            alphabet = self._alphabet(self.rank)
            for length in itertools.count(1):
                yield from _reduced_sequences(alphabet, length, forbidden)
            return
        # level b: words of length <= b over x1..xb that reach b in length or generator
        for b in itertools.count(1):
            alphabet = self._alphabet(b)
            for length in range(1, b + 1):
                for word in _reduced_sequences(alphabet, length, forbidden):
                    if length == b or any(abs(g) == b for g in word):
                        yield word

    def cardinality(self) -> Optional[int]:
        return None

    def has_involution(self) -> bool:
        return False

    def parse_literal(self, text: str) -> Tuple[int, ...]:
        if text == "e":
            return ()
        if not _FREE_LITERAL.fullmatch(text):
            raise _literal_error(self, text, "expected generators like x2'x1 or e")
        letters = []
        for number, prime in _FREE_TOKEN.findall(text):
            g = int(number)
            if g < 1 or (self.rank != "countable" and g > self.rank):
                raise _literal_error(self, text, f"generator x{g} outside rank {self.rank}")
            letters.append(-g if prime else g)
        return self.multiply((), tuple(letters))

    def format_literal(self, p: Tuple[int, ...]) -> str:
        if not p:
            return "e"
        return "".join(f"x{abs(g)}" + ("'" if g < 0 else "") for g in p)

    def is_payload(self, p: Payload) -> bool:
        return isinstance(p, tuple) and self.multiply((), p) == p and 0 not in p

    def to_config(self) -> Any:
        return {"free": self.rank}


class InvolutionFreeFactor(FactorBase):
    """
    Free product of copies of Z/2 on generators y1, y2, ...

    Payloads are tuples of positive ints with no two equal neighbours.
    """

    kind: Literal["free2"] = "free2"
    rank: Union[PositiveInt, Literal["countable"]]

    @property
    def label(self) -> str:
        return "Z2*(inf)" if self.rank == "countable" else f"Z2*{self.rank}"

    def identity_payload(self) -> Tuple[int, ...]:
        return ()

    def multiply(self, p: Tuple[int, ...], q: Tuple[int, ...]) -> Tuple[int, ...]:
        stack = list(p)
        for g in q:
            if stack and stack[-1] == g:
                stack.pop()
            else:
                stack.append(g)
        return tuple(stack)

    def invert(self, p: Tuple[int, ...]) -> Tuple[int, ...]:
        return tuple(reversed(p))

    def order_of(self, p: Tuple[int, ...]) -> Optional[int]:
        if not p:
            return 1
        # torsion elements are conjugates of generators, i.e. odd palindromes
        return 2 if p == p[::-1] else None

    def iter_payloads(self) -> Iterator[Tuple[int, ...]]:
        yield ()
        forbidden = lambda a, b: a == b  # noqa: E731
        if self.rank == 1:
            yield (1,)
            return
        if self.rank != "countable":
            alphabet = list(range(1, self.rank + 1))
            for length in itertools.count(1):
                yield from _reduced_sequences(alphabet, length, forbidden)
            return
        for b in itertools.count(1):
            alphabet = list(range(1, b + 1))
            for length in range(1, b + 1):
                for word in _reduced_sequences(alphabet, length, forbidden):
                    if length == b or b in word:
                        yield word

    def cardinality(self) -> Optional[int]:
        return 2 if self.rank == 1 else None

    def has_involution(self) -> bool:
        return True

    def parse_literal(self, text: str) -> Tuple[int, ...]:
        if text == "e":
            return ()
        if not _INVOLUTION_LITERAL.fullmatch(text):
            raise _literal_error(self, text, "expected generators like y1y2 or e")
        letters = []
        for number in _INVOLUTION_TOKEN.findall(text):
            g = int(number)
            if g < 1 or (self.rank != "countable" and g > self.rank):
                raise _literal_error(self, text, f"generator y{g} outside rank {self.rank}")
            letters.append(g)
        return self.multiply((), tuple(letters))

    def format_literal(self, p: Tuple[int, ...]) -> str:
        return "".join(f"y{g}" for g in p) if p else "e"

    def is_payload(self, p: Payload) -> bool:
        return isinstance(p, tuple) and self.multiply((), p) == p and all(g >= 1 for g in p)

    def to_config(self) -> Any:
        return {"free2": self.rank}


class TableFactor(FactorBase):
    """Finite group given by its multiplication table; element 0 is the identity."""

    kind: Literal["table"] = "table"
    table: Tuple[Tuple[int, ...], ...]

    @field_validator("table")
    @classmethod
    def validate_table(cls, v: Tuple[Tuple[int, ...], ...]) -> Tuple[Tuple[int, ...], ...]:
        """Check the table defines a group."""
        k = len(v)
        if k == 0:
            raise ValueError("Table must have at least one row")
        elements = set(range(k))
        for i, row in enumerate(v):
            if len(row) != k:
                raise ValueError(f"Row {i} has {len(row)} entries, expected {k}")
            if set(row) != elements:
                raise ValueError(f"Row {i} is not a permutation of 0..{k - 1}")
        for j in range(k):
            if {v[i][j] for i in range(k)} != elements:
                raise ValueError(f"Column {j} is not a permutation of 0..{k - 1}")
        if tuple(v[0]) != tuple(range(k)) or tuple(v[i][0] for i in range(k)) != tuple(range(k)):
            raise ValueError("Row and column 0 must be the identity")
        for i in range(k):
            right = v[i].index(0)
            if v[right][i] != 0:
                raise ValueError(f"Element {i} has no two-sided inverse")
        for a in range(k):
            for b in range(k):
                ab = v[a][b]
                for c in range(k):
                    if v[ab][c] != v[a][v[b][c]]:
                        raise ValueError(f"Table is not associative at ({a}, {b}, {c})")
        return v

    @property
    def label(self) -> str:
        return f"T{len(self.table)}"

    def identity_payload(self) -> int:
        return 0

    def multiply(self, p: int, q: int) -> int:
        return self.table[p][q]

    def invert(self, p: int) -> int:
        return self.table[p].index(0)

    def order_of(self, p: int) -> Optional[int]:
        n, power = 1, p
        while power != 0:
            power = self.table[power][p]
            n += 1
        return n

    def iter_payloads(self) -> Iterator[int]:
        return iter(range(len(self.table)))

    def cardinality(self) -> Optional[int]:
        return len(self.table)

    def has_involution(self) -> bool:
        return any(self.table[i][i] == 0 for i in range(1, len(self.table)))

    def parse_literal(self, text: str) -> int:
        if not _INT_LITERAL.fullmatch(text):
            raise _literal_error(self, text, "expected a table index")
        value = int(text)
        if not 0 <= value < len(self.table):
            raise _literal_error(self, text, f"expected an index in [0, {len(self.table)})")
        return value

    def format_literal(self, p: int) -> str:
        return str(p)

    def is_payload(self, p: Payload) -> bool:
        return isinstance(p, int) and not isinstance(p, bool) and 0 <= p < len(self.table)

    def to_config(self) -> Any:
        return {"table": [list(row) for row in self.table]}


class FreeProductFactor(FactorBase):
    """
    Free product of finitely many descriptors, the factor type of regrouped families.

    Payloads are reduced tuples of (component position, component payload).
    """

    kind: Literal["product"] = "product"
    components: Tuple["FactorDescriptor", ...]

    @property
    def label(self) -> str:
        return "(" + "*".join(c.label for c in self.components) + ")"

    def _component(self, position: int) -> FactorBase:
        return self.components[position - 1]

    def identity_payload(self) -> Tuple[Tuple[int, Payload], ...]:
        return ()

    def multiply(self, p: Tuple, q: Tuple) -> Tuple:
        stack = list(p)
        for position, value in q:
            component = self._component(position)
            if stack and stack[-1][0] == position:
                merged = component.multiply(stack.pop()[1], value)
                if merged != component.identity_payload():
                    stack.append((position, merged))
            elif value != component.identity_payload():
                stack.append((position, value))
        return tuple(stack)

    def invert(self, p: Tuple) -> Tuple:
        return tuple(
            (position, self._component(position).invert(value))
            for position, value in reversed(p)
        )

    def order_of(self, p: Tuple) -> Optional[int]:
        if not p:
            return 1
        i, j = 0, len(p) - 1
        while j > i and p[i][0] == p[j][0]:
            component = self._component(p[i][0])
            if p[i][1] != component.invert(p[j][1]):
                return None
            i, j = i + 1, j - 1
        if i == j:
            return self._component(p[i][0]).order_of(p[i][1])
        return None

    def iter_payloads(self) -> Iterator[Tuple]:
        seen = {()}
        yield ()
        total = self.cardinality()
        nontrivial = [
            pos for pos, c in enumerate(self.components, start=1)
            if c.cardinality() != 1
        ]
        if not nontrivial:
            return
        for b in itertools.count(1):
            choices = {
                pos: [
                    (pos, value)
                    for value in itertools.islice(self._component(pos).iter_payloads(), b + 1)
                    if value != self._component(pos).identity_payload()
                ]
                for pos in nontrivial
            }
            for syllables in range(1, b + 1):
                for positions in _reduced_sequences(nontrivial, syllables, lambda a, c: a == c):
                    for word in itertools.product(*(choices[pos] for pos in positions)):
                        if word not in seen:
                            seen.add(word)
                            yield word
                            if total is not None and len(seen) == total:
                                return

    def cardinality(self) -> Optional[int]:
        sizes = [c.cardinality() for c in self.components if c.cardinality() != 1]
        if not sizes:
            return 1
        if len(sizes) == 1:
            return sizes[0]
        return None

    def has_involution(self) -> bool:
        return any(c.has_involution() for c in self.components)

    def parse_literal(self, text: str) -> Tuple:
        if not (text.startswith("<") and text.endswith(">")):
            raise _literal_error(self, text, "expected <pos:literal,...>")
        body = text[1:-1]
        parts, depth, start = [], 0, 0
        for i, ch in enumerate(body):
            if ch == "<":
                depth += 1
            elif ch == ">":
                depth -= 1
            elif ch == "," and depth == 0:
                parts.append(body[start:i])
                start = i + 1
        if body:
            parts.append(body[start:])
        syllables = []
        for part in parts:
            position_text, sep, literal = part.strip().partition(":")
            if not sep or not position_text.isdigit():
                raise _literal_error(self, text, f"syllable {part!r} is not pos:literal")
            position = int(position_text)
            if not 1 <= position <= len(self.components):
                raise _literal_error(self, text, f"component {position} does not exist")
            syllables.append((position, self._component(position).parse_literal(literal)))
        return self.multiply((), tuple(syllables))

    def format_literal(self, p: Tuple) -> str:
        return "<" + ",".join(
            f"{position}:{self._component(position).format_literal(value)}"
            for position, value in p
        ) + ">"

    def is_payload(self, p: Payload) -> bool:
        return isinstance(p, tuple) and self.multiply((), p) == p

    def to_config(self) -> Any:
        return {"product": [c.to_config() for c in self.components]}


FactorDescriptor = Annotated[
    Union[
        IntegersFactor,
        CyclicFactor,
        RationalsFactor,
        FreeFactor,
        InvolutionFreeFactor,
        TableFactor,
        FreeProductFactor,
    ],
    Field(discriminator="kind"),
]

FreeProductFactor.model_rebuild()


def descriptor_from_config(entry: Any) -> FactorBase:
    """
    Build a descriptor from its config keyword form.

    Accepts "Z", "Q", {"cyclic": k}, {"free": r}, {"free2": r}, {"table": rows},
    {"product": [...]} and already-built descriptors.
    """
    if isinstance(entry, FactorBase):
        return entry
    try:
        if entry == "Z":
            return IntegersFactor()
        if entry == "Q":
            return RationalsFactor()
        if isinstance(entry, dict) and len(entry) == 1:
            (key, value), = entry.items()
            if key == "cyclic":
                return CyclicFactor(order=value)
            if key == "free":
                return FreeFactor(rank=value)
            if key == "free2":
                return InvolutionFreeFactor(rank=value)
            if key == "table":
                return TableFactor(table=tuple(tuple(row) for row in value))
            if key == "product":
                return FreeProductFactor(
                    components=tuple(descriptor_from_config(c) for c in value)
                )
    except ValidationError as e:
        raise ConfigException(
            message=f"Invalid factor descriptor {entry!r}",
            details={"errors": e.errors(include_url=False)},
        )
    raise ConfigException(
        message=f"Unknown factor descriptor {entry!r}",
        details={"entry": repr(entry)},
    )


class FamilySpec(BaseModel):
    """
    The sequence (G_n) of factor groups: prefix entries first, then the tail
    pattern repeated cyclically. Without a tail the family is finite.
    """

    model_config = ConfigDict(frozen=True)

    prefix: Tuple[FactorDescriptor, ...] = ()
    tail: Optional[Tuple[FactorDescriptor, ...]] = None

    @field_validator("prefix", "tail", mode="before")
    @classmethod
    def parse_keywords(cls, v: Any) -> Any:
        """Translate config keyword forms into descriptor models."""
        if v is None:
            return v
        return tuple(descriptor_from_config(entry) for entry in v)

    @field_validator("tail")
    @classmethod
    def validate_tail(cls, v: Optional[Tuple[FactorBase, ...]]) -> Optional[Tuple[FactorBase, ...]]:
        if v is not None and len(v) == 0:
            raise ValueError("Tail pattern must not be empty; omit it for a finite family")
        return v

    @property
    def is_finite(self) -> bool:
        return self.tail is None

    @property
    def size(self) -> Optional[int]:
        """Number of factors, None for an infinite family."""
        return len(self.prefix) if self.tail is None else None

    def descriptor(self, n: int) -> FactorBase:
        """Resolve the descriptor of G_n (n >= 1)."""
        if n < 1:
            raise ContractViolation(
                message=f"Factor index must be positive, got {n}",
                details={"index": n},
            )
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        if self.tail is None:
            raise ContractViolation(
                message=f"Finite family has no factor G_{n}",
                details={"index": n, "size": len(self.prefix)},
            )
        return self.tail[(n - len(self.prefix) - 1) % len(self.tail)]

    def has_index(self, n: int) -> bool:
        return n >= 1 and (self.tail is not None or n <= len(self.prefix))

    def to_config(self) -> dict:
        config: dict = {"prefix": [d.to_config() for d in self.prefix]}
        if self.tail is not None:
            config["tail"] = [d.to_config() for d in self.tail]
        return config

    @property
    def label(self) -> str:
        head = ", ".join(d.label for d in self.prefix)
        if self.tail is None:
            return f"({head})"
        tail = ", ".join(d.label for d in self.tail)
        return f"({head}{'; ' if head else ''}repeat {tail})"


def family_from_config(config: Any) -> FamilySpec:
    """Validate a FamilySpec from its decoded JSON form."""
    if not isinstance(config, dict):
        raise ConfigException(
            message="Family config must be a JSON object",
            details={"type": type(config).__name__},
        )
    try:
        return FamilySpec.model_validate(config)
    except ValidationError as e:
        logger.warning("family_config_invalid", errors=e.error_count())
        raise ConfigException(
            message="Invalid family configuration",
            details={"errors": e.errors(include_url=False)},
        )


def family_from_json(text: str) -> FamilySpec:
    """Parse a FamilySpec from JSON text."""
    try:
        config = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigException(
            message="Invalid JSON in family configuration",
            details={"error": str(e), "line": e.lineno, "column": e.colno},
        )
    return family_from_config(config)


def load_family(path: Path) -> FamilySpec:
    """Load a FamilySpec config file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigException(
            message=f"Cannot read family file {path}",
            details={"error": str(e)},
        )
    family = family_from_json(text)
    logger.debug("family_loaded", path=str(path), family=family.label)
    return family


def constant_family(descriptor: Any) -> FamilySpec:
    """The family with every G_n equal to one descriptor."""
    return FamilySpec(tail=(descriptor_from_config(descriptor),))


def finite_family(*descriptors: Any) -> FamilySpec:
    """The finite family G_1, ..., G_k."""
    return FamilySpec(prefix=tuple(descriptor_from_config(d) for d in descriptors))


@dataclass(frozen=True, slots=True)
class GroupElement:
    """An element of one factor group, stored as a canonical payload."""

    descriptor: FactorBase
    payload: Payload

    @property
    def is_identity(self) -> bool:
        return self.payload == self.descriptor.identity_payload()

    def __str__(self) -> str:
        return self.descriptor.format_literal(self.payload)


def make_element(descriptor: FactorBase, payload: Payload) -> GroupElement:
    """Wrap a payload, checking it is canonical for the descriptor."""
    if not descriptor.is_payload(payload):
        raise ContractViolation(
            message=f"{payload!r} is not a canonical element of {descriptor.label}",
            details={"descriptor": descriptor.label, "payload": repr(payload)},
        )
    return GroupElement(descriptor, payload)


def identity(descriptor: FactorBase) -> GroupElement:
    return GroupElement(descriptor, descriptor.identity_payload())


def parse_element(descriptor: FactorBase, text: str) -> GroupElement:
    return GroupElement(descriptor, descriptor.parse_literal(text))


def format_element(a: GroupElement) -> str:
    return a.descriptor.format_literal(a.payload)


def _same_descriptor(a: GroupElement, b: GroupElement) -> None:
    if a.descriptor is not b.descriptor and a.descriptor != b.descriptor:
        raise ContractViolation(
            message=f"Cannot multiply elements of {a.descriptor.label} and {b.descriptor.label}",
            details={"left": a.descriptor.label, "right": b.descriptor.label},
        )


def group_op(a: GroupElement, b: GroupElement) -> GroupElement:
    """Product a*b in the shared factor group."""
    _same_descriptor(a, b)
    return GroupElement(a.descriptor, a.descriptor.multiply(a.payload, b.payload))


def group_inverse(a: GroupElement) -> GroupElement:
    return GroupElement(a.descriptor, a.descriptor.invert(a.payload))


def element_order(a: GroupElement) -> Optional[int]:
    """Order of a, None when infinite."""
    return a.descriptor.order_of(a.payload)


def is_involution(a: GroupElement) -> bool:
    """True iff a is not the identity and a*a is."""
    return not a.is_identity and group_op(a, a).is_identity


def enumerate_elements(descriptor: FactorBase, limit: int) -> List[GroupElement]:
    """
    First `limit` elements of the descriptor's fixed enumeration.

    Starts at the identity; exhaustive for finite groups when limit >= order.
    """
    if limit < 1:
        raise ContractViolation(
            message=f"Enumeration limit must be at least 1, got {limit}",
            details={"limit": limit},
        )
    return [
        GroupElement(descriptor, p)
        for p in itertools.islice(descriptor.iter_payloads(), limit)
    ]


def nonidentity_elements(descriptor: FactorBase, limit: Optional[int] = None) -> List[GroupElement]:
    """
    First `limit` nonidentity elements, or all of them for a finite group.

    Raises ContractViolation for an infinite group without a limit.
    """
    if limit is None:
        size = descriptor.cardinality()
        if size is None:
            raise ContractViolation(
                message=f"{descriptor.label} is infinite; a per-factor limit is required",
                details={"descriptor": descriptor.label},
            )
        return enumerate_elements(descriptor, size)[1:]
    return enumerate_elements(descriptor, limit + 1)[1:]
