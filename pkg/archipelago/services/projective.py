"""
Projective Words
Elements of the topologist's product, represented by schemas whose
projections p_n form a compatible family.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field, replace
from functools import lru_cache
from math import isqrt, prod
from typing import Callable, Dict, List, Optional, Tuple, Union

from archipelago.core.config import get_settings
from archipelago.core.exceptions import (
    ContractViolation,
    ResourceBudgetExceeded,
    UnsupportedException,
)
from archipelago.core.logging import logger
from archipelago.models.schemas import Certificate, LevelOutcome, Verdict, VerdictStatus
from archipelago.services import freewords as fw
from archipelago.services.factor_groups import (
    FactorBase,
    FamilySpec,
    GroupElement,
    parse_element,
)
from archipelago.services.freewords import EMPTY, FiniteWord, Letter


@dataclass(frozen=True)
class Affine:
    """The rule k -> scale*k + offset."""

    scale: int = 1
    offset: int = 0

    def __call__(self, k: int) -> int:
        return self.scale * k + self.offset

    def __str__(self) -> str:
        if self.scale == 0:
            return str(self.offset)
        head = "k" if self.scale == 1 else f"{self.scale}k"
        if self.offset > 0:
            return f"{head}+{self.offset}"
        if self.offset < 0:
            return f"{head}-{-self.offset}"
        return head


# Schema nodes

@dataclass(frozen=True)
class Leaf:
    word: FiniteWord


@dataclass(frozen=True)
class Nested:
    """
    w_k = a_k * (w_{k+1})^{e_k} for k >= start, the word itself being w_start.

    a_k is the element `literal` of G_{index(k)}; e_k = exponent(k).
    """

    start: int
    index: Affine
    exponent: Affine
    literal: str


@dataclass(frozen=True)
class Epsilon:
    """
    Triangular word: block b lists coordinates 1..b, position p carries index start-1+p.

    `tail` is the literal used past the explicit coordinates, None repeating the
    last one. Positions up to `skip` are deleted. Identity coordinates are omitted.
    """

    coordinates: Tuple[str, ...]
    tail: Optional[str] = None
    start: int = 1
    skip: int = 0

    def coordinate(self, t: int) -> str:
        if t <= len(self.coordinates):
            return self.coordinates[t - 1]
        return self.coordinates[-1] if self.tail is None else self.tail


@dataclass(frozen=True)
class Product:
    children: Tuple["SchemaNode", ...]


@dataclass(frozen=True)
class Inverse:
    child: "SchemaNode"


@dataclass(frozen=True)
class Power:
    child: "SchemaNode"
    exponent: int


@dataclass(frozen=True)
class Tail:
    """Image under the bonding map tau_level."""

    level: int
    child: "SchemaNode"


@dataclass(frozen=True)
class IndexPermutation:
    """A bijection of the positive integers moving finitely many indices."""

    moves: Tuple[Tuple[int, int], ...]
    _lookup: Dict[int, int] = field(init=False, compare=False, hash=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_lookup", dict(self.moves))

    @classmethod
    def from_mapping(cls, mapping: Dict[int, int]) -> "IndexPermutation":
        moves = {int(k): int(v) for k, v in mapping.items() if int(k) != int(v)}
        if any(i < 1 for pair in moves.items() for i in pair):
            raise ContractViolation(
                message="Permuted indices must be positive",
                details={"mapping": {str(k): v for k, v in mapping.items()}},
            )
        if set(moves) != set(moves.values()):
            raise ContractViolation(
                message="Index rule is not a bijection",
                details={"mapping": {str(k): v for k, v in mapping.items()}},
            )
        return cls(tuple(sorted(moves.items())))

    def __call__(self, i: int) -> int:
        return self._lookup.get(i, i)

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(k for k, _ in self.moves)

    def inverse(self) -> "IndexPermutation":
        return IndexPermutation(tuple(sorted((v, k) for k, v in self.moves)))

    def depth_for(self, n: int) -> int:
        """Largest old index whose image is at most n."""
        return max([n] + [k for k, v in self.moves if v <= n])

    def __str__(self) -> str:
        return ",".join(f"{k}->{v}" for k, v in self.moves)


@dataclass(frozen=True)
class BlockPartition:
    """
    Ordered finite blocks of old indices, followed by consecutive runs of
    `width` indices. Explicit blocks and `dropped` together cover exactly 1..M.
    """

    blocks: Tuple[Tuple[int, ...], ...] = ()
    width: int = 1
    dropped: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.width < 1:
            raise ContractViolation(
                message="Block width must be positive",
                details={"width": self.width},
            )
        seen: List[int] = list(self.dropped)
        for block in self.blocks:
            if not block:
                raise ContractViolation(message="Blocks must be nonempty", details={})
            seen.extend(block)
        if len(seen) != len(set(seen)):
            raise ContractViolation(
                message="Blocks overlap",
                details={"blocks": [list(b) for b in self.blocks], "dropped": list(self.dropped)},
            )
        if set(seen) != set(range(1, len(seen) + 1)):
            raise ContractViolation(
                message="Explicit blocks and dropped indices must cover 1..M exactly",
                details={"covered": sorted(seen)},
            )

    @property
    def covered(self) -> int:
        return sum(len(b) for b in self.blocks) + len(self.dropped)

    def block(self, m: int) -> Tuple[int, ...]:
        if m <= len(self.blocks):
            return self.blocks[m - 1]
        r = m - len(self.blocks)
        first = self.covered + (r - 1) * self.width + 1
        return tuple(range(first, first + self.width))

    def locate(self, i: int) -> Optional[Tuple[int, int]]:
        """(block number, position in block) of an old index, None when dropped."""
        if i <= self.covered:
            for m, block in enumerate(self.blocks, start=1):
                if i in block:
                    return m, block.index(i) + 1
            return None
        offset = i - self.covered - 1
        return len(self.blocks) + offset // self.width + 1, offset % self.width + 1

    def __str__(self) -> str:
        explicit = ";".join(",".join(map(str, b)) for b in self.blocks)
        return f"blocks={explicit or '-'} width={self.width} dropped={','.join(map(str, self.dropped)) or '-'}"


@dataclass(frozen=True)
class Relabel:
    permutation: IndexPermutation
    source: "ProjectiveWord"


@dataclass(frozen=True)
class Regroup:
    partition: BlockPartition
    source: "ProjectiveWord"


SchemaNode = Union[Leaf, Nested, Epsilon, Product, Inverse, Power, Tail, Relabel, Regroup]


@dataclass(frozen=True)
class ProjectiveWord:
    """An element of the tail product of G_i for i >= base_index."""

    spec: FamilySpec
    base_index: int
    schema: SchemaNode

    def __str__(self) -> str:
        return describe(self)


# Projection

@lru_cache(maxsize=4096)
def _element(descriptor: FactorBase, literal: str) -> GroupElement:
    return parse_element(descriptor, literal)


def _guard(n: int, estimate: int) -> None:
    budget = get_settings().word_size_budget
    if estimate > budget:
        raise ResourceBudgetExceeded(
            message=f"Projection at depth {n} needs about {estimate} letters (budget {budget})",
            details={"depth": n, "estimated_letters": estimate, "budget": budget},
        )


def triangular_coordinate(p: int) -> int:
    """Coordinate carried by position p of the triangular pattern 1; 1,2; 1,2,3; ..."""
    b = (isqrt(8 * p + 1) - 1) // 2
    if b * (b + 1) // 2 < p:
        b += 1
    return p - (b - 1) * b // 2


def _project_nested(node: Nested, spec: FamilySpec, n: int) -> FiniteWord:
    if node.index(node.start) > n:
        return EMPTY
    top = node.start
    while node.index(top + 1) <= n:
        top += 1

    def letter(k: int) -> FiniteWord:
        i = node.index(k)
        return fw.reduce([(i, _element(spec.descriptor(i), node.literal))])

    word = letter(top)
    for k in range(top - 1, node.start - 1, -1):
        e = node.exponent(k)
        _guard(n, len(word) * e + 1)
        word = fw.concat(letter(k), fw.power(word, e))
    return word


def _project_epsilon(node: Epsilon, spec: FamilySpec, n: int) -> FiniteWord:
    letters = []
    for p in range(node.skip + 1, n - node.start + 2):
        index = node.start - 1 + p
        element = _element(spec.descriptor(index), node.coordinate(triangular_coordinate(p)))
        if not element.is_identity:
            letters.append(Letter(index, element))
    return FiniteWord(tuple(letters))


def _project_relabel(node: Relabel, spec: FamilySpec, n: int) -> FiniteWord:
    perm = node.permutation
    source = _project_word(node.source, perm.depth_for(n))
    return fw.reduce(
        Letter(perm(letter.index), letter.element)
        for letter in source
        if perm(letter.index) <= n
    )


def _project_regroup(node: Regroup, spec: FamilySpec, n: int) -> FiniteWord:
    partition = node.partition
    depth = max((max(partition.block(m)) for m in range(1, n + 1)), default=0)
    source = _project_word(node.source, depth)
    raw = []
    for letter in source:
        located = partition.locate(letter.index)
        if located is None or located[0] > n:
            continue
        m, position = located
        raw.append((m, GroupElement(spec.descriptor(m), ((position, letter.element.payload),))))
    return fw.reduce(raw)


def _project(node: SchemaNode, spec: FamilySpec, n: int) -> FiniteWord:
    if isinstance(node, Leaf):
        if node.word.max_index <= n:
            return node.word
        return fw.project_keep(node.word, fw.keep_at_most(n))
    if isinstance(node, Nested):
        return _project_nested(node, spec, n)
    if isinstance(node, Epsilon):
        return _project_epsilon(node, spec, n)
    if isinstance(node, Product):
        word = EMPTY
        for child in node.children:
            part = _project(child, spec, n)
            _guard(n, len(word) + len(part))
            word = fw.concat(word, part)
        return word
    if isinstance(node, Inverse):
        return fw.invert(_project(node.child, spec, n))
    if isinstance(node, Power):
        word = _project(node.child, spec, n)
        _guard(n, len(word) * abs(node.exponent))
        return fw.power(word, node.exponent)
    if isinstance(node, Tail):
        if n <= node.level:
            return EMPTY
        return fw.project_keep(_project(node.child, spec, n), fw.keep_above(node.level))
    if isinstance(node, Relabel):
        return _project_relabel(node, spec, n)
    if isinstance(node, Regroup):
        return _project_regroup(node, spec, n)
    raise UnsupportedException(
        message=f"Unknown schema node {type(node).__name__}",
        details={"node": type(node).__name__},
    )


def _compute_projection(w: ProjectiveWord, n: int, budget: int) -> FiniteWord:
    # budget is part of the key: a cached word never bypasses a smaller budget
    return _project(w.schema, w.spec, n)


_projection_cache: Optional[Callable[[ProjectiveWord, int, int], FiniteWord]] = None


def _cached_projection(w: ProjectiveWord, n: int) -> FiniteWord:
    global _projection_cache
    settings = get_settings()
    if _projection_cache is None:
        _projection_cache = lru_cache(maxsize=settings.projection_cache_size)(_compute_projection)
    return _projection_cache(w, n, settings.word_size_budget)


def _project_word(w: ProjectiveWord, n: int) -> FiniteWord:
    if n < w.base_index:
        return EMPTY
    return _cached_projection(w, n)


def clear_projection_cache() -> None:
    """Drop memoized projections; the next lookup re-reads the cache size."""
    global _projection_cache
    _projection_cache = None
    _element.cache_clear()


def projection(w: ProjectiveWord, n: int) -> FiniteWord:
    """
    The reduced finite word p_n(w) over indices base_index..n.

    Raises ResourceBudgetExceeded naming the depth when the expansion would
    exceed the configured word-size budget.
    """
    if n < w.base_index:
        raise ContractViolation(
            message=f"Depth {n} is below the base index {w.base_index}",
            details={"depth": n, "base_index": w.base_index},
        )
    return _cached_projection(w, n)


# Constructors

def _require_infinite(spec: FamilySpec, what: str) -> None:
    if spec.is_finite:
        raise ContractViolation(
            message=f"{what} needs an infinite family",
            details={"family": spec.label},
        )


def _descriptors_from(spec: FamilySpec, first: int) -> List[FactorBase]:
    """Distinct descriptors G_i for i >= first."""
    found: List[FactorBase] = []
    period = len(spec.tail or ())
    for i in range(first, max(first, len(spec.prefix) + 1) + period):
        d = spec.descriptor(i)
        if d not in found:
            found.append(d)
    return found


def leaf_word(spec: FamilySpec, word: FiniteWord, base_index: int = 1) -> ProjectiveWord:
    """A finite word viewed in the topologist's product."""
    checked = fw.reduce(word.letters, spec)
    low = [letter.index for letter in checked if letter.index < base_index]
    if low:
        raise ContractViolation(
            message=f"Letters below base index {base_index}",
            details={"indices": low},
        )
    return ProjectiveWord(spec, base_index, Leaf(checked))


def nested_word(
    spec: FamilySpec,
    start: int = 1,
    index: Affine = Affine(1, 0),
    exponent: Affine = Affine(1, 1),
    literal: str = "1",
    base_index: int = 1,
) -> ProjectiveWord:
    """
    The nested power a_s(a_{s+1}(...)^{e_{s+1}})^{e_s}.

    With the defaults this is w = a1(a2(a3(...)^4)^3)^2 over G_k, a_k = 1.
    """
    _require_infinite(spec, "A nested power")
    if start < 1 or index.scale < 1 or index(start) < max(1, base_index):
        raise ContractViolation(
            message="Nested letter indices must be strictly increasing and at least the base index",
            details={"start": start, "index": str(index), "base_index": base_index},
        )
    if exponent.scale < 0 or exponent(start) < 1:
        raise ContractViolation(
            message="Nested exponents must be at least 1",
            details={"start": start, "exponent": str(exponent)},
        )
    period = len(spec.tail or ())
    for k in range(start, start + len(spec.prefix) + period + 1):
        _element(spec.descriptor(index(k)), literal)
    return ProjectiveWord(spec, base_index, Nested(start, index, exponent, literal))


def epsilon_word(
    spec: FamilySpec,
    coordinates: Tuple[str, ...],
    tail: Optional[str] = None,
    start: int = 1,
    base_index: int = 1,
) -> ProjectiveWord:
    """The triangular word g_1 g_1 g_2 g_1 g_2 g_3 ... placed at indices start, start+1, ..."""
    _require_infinite(spec, "A triangular word")
    if not coordinates:
        raise ContractViolation(message="At least one coordinate is required", details={})
    if start < max(1, base_index):
        raise ContractViolation(
            message=f"Start index {start} is below the base index {base_index}",
            details={"start": start, "base_index": base_index},
        )
    literals = set(coordinates) | ({tail} if tail is not None else set())
    for descriptor in _descriptors_from(spec, start):
        for literal in literals:
            _element(descriptor, literal)
    return ProjectiveWord(spec, base_index, Epsilon(tuple(coordinates), tail, start))


def _same_space(u: ProjectiveWord, v: ProjectiveWord) -> None:
    if u.spec is not v.spec and u.spec != v.spec:
        raise ContractViolation(
            message="Words live over different families",
            details={"left": u.spec.label, "right": v.spec.label},
        )
    if u.base_index != v.base_index:
        raise ContractViolation(
            message=f"Base index mismatch: {u.base_index} vs {v.base_index}",
            details={"left": u.base_index, "right": v.base_index},
        )


def product(u: ProjectiveWord, v: ProjectiveWord) -> ProjectiveWord:
    _same_space(u, v)
    return ProjectiveWord(u.spec, u.base_index, Product((u.schema, v.schema)))


def inverse(u: ProjectiveWord) -> ProjectiveWord:
    return ProjectiveWord(u.spec, u.base_index, Inverse(u.schema))


def power(u: ProjectiveWord, m: int) -> ProjectiveWord:
    return ProjectiveWord(u.spec, u.base_index, Power(u.schema, m))


def tau(j: int, w: ProjectiveWord) -> ProjectiveWord:
    """Bonding map: delete every letter with index <= j."""
    if j < w.base_index - 1:
        raise ContractViolation(
            message=f"Level {j} is below base index {w.base_index} minus one",
            details={"level": j, "base_index": w.base_index},
        )
    if j == w.base_index - 1:
        return w
    return ProjectiveWord(w.spec, j + 1, Tail(j, w.schema))


def rebase(w: ProjectiveWord, base_index: int) -> ProjectiveWord:
    """View w in a larger tail product (base_index <= w.base_index)."""
    if base_index > w.base_index or base_index < 1:
        raise ContractViolation(
            message=f"Cannot move base index {w.base_index} to {base_index}",
            details={"from": w.base_index, "to": base_index},
        )
    return replace(w, base_index=base_index)


# Structural normal form

Term = Union[Leaf, Power]


def _merge(terms) -> Tuple[Term, ...]:
    stack: List[Term] = []
    for term in terms:
        top = stack[-1] if stack else None
        if isinstance(top, Leaf) and isinstance(term, Leaf):
            stack.pop()
            word = fw.concat(top.word, term.word)
            if word:
                stack.append(Leaf(word))
        elif isinstance(top, Power) and isinstance(term, Power) and top.child == term.child:
            stack.pop()
            e = top.exponent + term.exponent
            if e:
                stack.append(Power(term.child, e))
        else:
            stack.append(term)
    return tuple(stack)


def _invert_terms(terms: Tuple[Term, ...]) -> Tuple[Term, ...]:
    return tuple(
        Leaf(fw.invert(t.word)) if isinstance(t, Leaf) else Power(t.child, -t.exponent)
        for t in reversed(terms)
    )


def _power_terms(terms: Tuple[Term, ...], m: int) -> Tuple[Term, ...]:
    if m == 0 or not terms:
        return ()
    if len(terms) == 1:
        (t,) = terms
        if isinstance(t, Leaf):
            return (Leaf(fw.power(t.word, m)),)
        return (Power(t.child, t.exponent * m),)
    if m < 0:
        terms, m = _invert_terms(terms), -m
    if m == 1:
        return terms
    return (Power(Product(terms), m),)


def _canonical_epsilon(node: Epsilon) -> Epsilon:
    tail = node.coordinates[-1] if node.tail is None else node.tail
    coordinates = list(node.coordinates)
    while coordinates and coordinates[-1] == tail:
        coordinates.pop()
    return Epsilon(tuple(coordinates), tail, node.start, node.skip)


def _push_tail(j: int, node: SchemaNode) -> SchemaNode:
    if isinstance(node, Leaf):
        return Leaf(fw.project_keep(node.word, fw.keep_above(j)))
    if isinstance(node, Nested):
        if node.index(node.start) > j:
            return node
        last = node.start
        while node.index(last + 1) <= j:
            last += 1
        e = prod(node.exponent(k) for k in range(node.start, last + 1))
        return Power(replace(node, start=last + 1), e)
    if isinstance(node, Epsilon):
        return replace(node, skip=max(node.skip, j - node.start + 1))
    if isinstance(node, Product):
        return Product(tuple(Tail(j, c) for c in node.children))
    if isinstance(node, Inverse):
        return Inverse(Tail(j, node.child))
    if isinstance(node, Power):
        return Power(Tail(j, node.child), node.exponent)
    if isinstance(node, Tail):
        return Tail(max(j, node.level), node.child)
    return Tail(j, node)


def _terms(node: SchemaNode) -> Tuple[Term, ...]:
    if isinstance(node, Leaf):
        return (node,) if node.word else ()
    if isinstance(node, Epsilon):
        return (Power(_canonical_epsilon(node), 1),)
    if isinstance(node, (Nested, Relabel, Regroup)):
        return (Power(node, 1),)
    if isinstance(node, Product):
        return _merge(itertools.chain.from_iterable(_terms(c) for c in node.children))
    if isinstance(node, Inverse):
        return _invert_terms(_terms(node.child))
    if isinstance(node, Power):
        return _power_terms(_terms(node.child), node.exponent)
    if isinstance(node, Tail):
        if isinstance(node.child, (Relabel, Regroup)):
            return (Power(node, 1),)
        return _terms(_push_tail(node.level, node.child))
    raise UnsupportedException(
        message=f"Unknown schema node {type(node).__name__}",
        details={"node": type(node).__name__},
    )


def normal_form(w: ProjectiveWord) -> SchemaNode:
    """
    Structural normal form: bonding maps pushed inward, products flattened,
    neighbouring finite parts merged and powers of one atom combined.
    """
    terms = _terms(w.schema)
    if not terms:
        return Leaf(EMPTY)
    if len(terms) == 1:
        (t,) = terms
        if isinstance(t, Power) and t.exponent == 1:
            return t.child
        return t
    return Product(tuple(t.child if isinstance(t, Power) and t.exponent == 1 else t for t in terms))


def structurally_equal(u: ProjectiveWord, v: ProjectiveWord) -> bool:
    _same_space(u, v)
    return normal_form(u) == normal_form(v)


def finite_value(w: ProjectiveWord) -> Optional[FiniteWord]:
    """The word itself when its normal form is finite."""
    node = normal_form(w)
    return node.word if isinstance(node, Leaf) else None


# Rendering

def _render(node: SchemaNode, atom: bool = False) -> str:
    if isinstance(node, Leaf):
        if not node.word:
            return "1"
        text = " ".join(str(letter) for letter in node.word)
        return f"({text})" if atom and len(node.word) > 1 else text
    if isinstance(node, Nested):
        return (
            f"nest(k={node.start}.., base=g{{{node.index}}}:{node.literal}, "
            f"exp={node.exponent})"
        )
    if isinstance(node, Epsilon):
        if node.coordinates:
            text = f"eps({','.join(node.coordinates)}, tail={node.tail or 'last'}"
        else:
            text = f"eps({node.tail}, tail=last"
        text += f", start={node.start})" if node.start != 1 else ")"
        if node.skip:
            return f"tau[{node.start - 1 + node.skip}]({text})"
        return text
    if isinstance(node, Product):
        text = " ".join(_render(c, atom=True) for c in node.children)
        return f"({text})" if atom else text
    if isinstance(node, Inverse):
        return f"inv({_render(node.child)})"
    if isinstance(node, Power):
        return f"{_render(node.child, atom=True)}^{node.exponent}"
    if isinstance(node, Tail):
        return f"tau[{node.level}]({_render(node.child)})"
    if isinstance(node, Relabel):
        return f"relabel[{node.permutation}]({describe(node.source)})"
    if isinstance(node, Regroup):
        return f"regroup[{node.partition}]({describe(node.source)})"
    return repr(node)


def describe(w: ProjectiveWord) -> str:
    return _render(w.schema)


# Verdicts

def eq_in_product(u: ProjectiveWord, v: ProjectiveWord, max_depth: int) -> Verdict:
    """
    Equality in the topologist's product.

    Structural identity certifies equality; a differing projection at depth
    n <= max_depth certifies distinctness; anything else stays unknown.
    """
    _same_space(u, v)
    if normal_form(u) == normal_form(v):
        return Verdict.structural(max_depth=max_depth)
    for n in range(u.base_index, max_depth + 1):
        try:
            left, right = projection(u, n), projection(v, n)
        except ResourceBudgetExceeded as e:
            logger.warning("projection_budget_exhausted", depth=n, details=e.details)
            return Verdict.unknown(max_depth=n - 1)
        if left != right:
            return Verdict.distinct(depth=n, max_depth=max_depth)
    return Verdict.unknown(max_depth=max_depth)


def eq_in_archipelago(
    u: ProjectiveWord,
    v: ProjectiveWord,
    max_level: int,
    max_depth: int,
) -> Verdict:
    """
    Equality in the archipelago quotient: the first level j <= max_level with
    tau_j(u) structurally equal to tau_j(v). Inequality is never certified.
    """
    _same_space(u, v)
    outcomes: List[LevelOutcome] = []
    bounds = {"max_level": max_level, "max_depth": max_depth}
    for j in range(u.base_index - 1, max_level + 1):
        verdict = eq_in_product(tau(j, u), tau(j, v), max_depth)
        if verdict.is_certified_equal:
            outcomes.append(LevelOutcome(level=j, status=verdict.status))
            return Verdict.structural(level=j, per_level=outcomes, **bounds)
        outcomes.append(
            LevelOutcome(
                level=j,
                status=verdict.status,
                depth=verdict.depth if verdict.is_distinct else verdict.max_depth,
            )
        )
    return Verdict.unknown(
        per_level=outcomes,
        all_levels_distinct=bool(outcomes)
        and all(o.status == VerdictStatus.DISTINCT_WITNESS for o in outcomes),
        **bounds,
    )


def _nested_level(w: ProjectiveWord, node: Nested, k: int) -> ProjectiveWord:
    return ProjectiveWord(w.spec, w.base_index, replace(node, start=k))


def divisible_chain(
    w: ProjectiveWord,
    n_max: int,
    cross_check_depth: Optional[int] = None,
) -> List[Certificate]:
    """
    Certificates tau(j, w_{n-1}) = w_n^{e_{n-1}} and their composition
    w ~ w_n^{e_s...e_{n-1}} at level j = index(n-1), for every level up to n_max.

    Each composed certificate is cross-checked on projections up to
    `cross_check_depth`.
    """
    node = normal_form(w)
    if not isinstance(node, Nested):
        raise UnsupportedException(
            message="Divisibility chains need a nested power",
            details={"schema": describe(w)},
        )
    if n_max <= node.start:
        raise ContractViolation(
            message=f"n_max must exceed the first level {node.start}",
            details={"n_max": n_max, "start": node.start},
        )
    limit = cross_check_depth or get_settings().cross_check_depth
    certificates: List[Certificate] = []
    total = 1
    for n in range(node.start + 1, n_max + 1):
        j = node.index(n - 1)
        e = node.exponent(n - 1)
        total *= e
        w_prev, w_n = _nested_level(w, node, n - 1), _nested_level(w, node, n)

        step = eq_in_product(tau(j, w_prev), tau(j, power(w_n, e)), limit)
        certificates.append(
            Certificate(
                kind="step",
                statement=f"tau({j}, w_{n - 1}) = w_{n}^{e}",
                level=j,
                outcome=str(Verdict.structural(level=j)) if step.is_certified_equal else str(step),
                details={"exponent": e},
            )
        )

        left, right = tau(j, w), tau(j, power(w_n, total))
        composed = structurally_equal(left, right)
        checked: List[int] = []
        largest = 0
        agree = True
        for d in range(j + 1, limit + 1):
            try:
                p_left, p_right = projection(left, d), projection(right, d)
            except ResourceBudgetExceeded:
                logger.warning("cross_check_budget_exhausted", level=n, depth=d)
                break
            agree = agree and p_left == p_right
            largest = max(largest, len(p_left))
            checked.append(d)
        outcome = str(Verdict.structural(level=j)) if composed and agree else "fails"
        certificates.append(
            Certificate(
                kind="composed",
                statement=f"w ~ w_{n}^{total}",
                level=j,
                depth=checked[-1] if checked else None,
                outcome=outcome,
                details={
                    "exponent": total,
                    "checked_depths": checked,
                    "max_letters": largest,
                    "projections_agree": agree,
                },
            )
        )
        logger.debug("divisibility_level_certified", level=n, exponent=total, outcome=outcome)
    return certificates


class DepthFamily:
    """
    A finite word for every depth n >= base_index, with no compatibility
    guarantee between depths.

    Values are memoized; concurrent readers see one consistent word per depth.
    """

    def __init__(self, base_index: int, rule: Callable[[int], FiniteWord], label: str = ""):
        self.base_index = base_index
        self.label = label
        self._rule = rule
        self._memo: Dict[int, FiniteWord] = {}
        self._lock = threading.Lock()

    def at(self, n: int) -> FiniteWord:
        if n < self.base_index:
            raise ContractViolation(
                message=f"Depth {n} is below the base index {self.base_index}",
                details={"depth": n, "base_index": self.base_index},
            )
        with self._lock:
            if n not in self._memo:
                self._memo[n] = self._rule(n)
            return self._memo[n]

    def incompatible_depth(self, max_depth: int) -> Optional[int]:
        """First n with p_n(family(n+1)) != family(n), if any up to max_depth."""
        for n in range(self.base_index, max_depth):
            if fw.project_keep(self.at(n + 1), fw.keep_at_most(n)) != self.at(n):
                return n
        return None

    def __repr__(self) -> str:
        return f"DepthFamily(base_index={self.base_index}, label={self.label!r})"
