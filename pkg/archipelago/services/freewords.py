"""
Free Words
Reduced words in finite free products of factor groups.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from archipelago.core.exceptions import ContractViolation, UnsupportedException
from archipelago.core.logging import logger
from archipelago.models.schemas import CensusReport, FamilyCheck
from archipelago.services.factor_groups import (
    FamilySpec,
    GroupElement,
    element_order,
    group_inverse,
    group_op,
    nonidentity_elements,
    parse_element,
)


IndexPredicate = Callable[[int], bool]


@dataclass(frozen=True, slots=True)
class Letter:
    """A nonidentity element of the factor G_index."""

    index: int
    element: GroupElement

    def __str__(self) -> str:
        return f"g{self.index}:{self.element}"

    def inverse(self) -> "Letter":
        return Letter(self.index, group_inverse(self.element))


@dataclass(frozen=True, slots=True)
class FiniteWord:
    """
    Reduced word: no identity letters, no two neighbours from the same factor.

    Build through reduce() or the operations below; the constructor does not
    re-check reducedness.
    """

    letters: Tuple[Letter, ...] = ()

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __str__(self) -> str:
        return format_word(self)

    @property
    def max_index(self) -> int:
        return max((letter.index for letter in self.letters), default=0)

    @property
    def indices(self) -> Tuple[int, ...]:
        return tuple(letter.index for letter in self.letters)


EMPTY = FiniteWord()


@dataclass(frozen=True, slots=True)
class TorsionWitness:
    """word = conjugator * core * conjugator^-1 with core of finite order"""

    conjugator: FiniteWord
    core: Letter
    order: int


RawLetter = Union[Letter, Tuple[int, GroupElement]]


def format_word(u: FiniteWord) -> str:
    """Canonical text form, e.g. g1:1·g2:3; the empty word prints as 1."""
    if not u.letters:
        return "1"
    return "·".join(str(letter) for letter in u.letters)


def word_to_json(u: FiniteWord) -> List[List[Union[int, str]]]:
    return [[letter.index, str(letter.element)] for letter in u.letters]


def _check_letter(index: int, element: GroupElement, spec: Optional[FamilySpec]) -> None:
    if index < 1:
        raise ContractViolation(
            message=f"Letter index must be positive, got {index}",
            details={"index": index},
        )
    if spec is None:
        return
    expected = spec.descriptor(index)
    if element.descriptor is not expected and element.descriptor != expected:
        raise ContractViolation(
            message=(
                f"Element {element} of {element.descriptor.label} does not belong "
                f"to G_{index} = {expected.label}"
            ),
            details={"index": index, "expected": expected.label, "got": element.descriptor.label},
        )


def reduce(raw: Iterable[RawLetter], spec: Optional[FamilySpec] = None) -> FiniteWord:
    """
    Reduced normal form of a raw letter sequence.

    Identity letters are dropped and neighbours from one factor are merged;
    a merge that yields the identity exposes the previous letter to the next.
    """
    stack: List[Letter] = []
    for item in raw:
        index, element = (item.index, item.element) if isinstance(item, Letter) else item
        _check_letter(index, element, spec)
        if element.is_identity:
            continue
        if stack and stack[-1].index == index:
            merged = group_op(stack.pop().element, element)
            if not merged.is_identity:
                stack.append(Letter(index, merged))
        else:
            stack.append(item if isinstance(item, Letter) else Letter(index, element))
    return FiniteWord(tuple(stack))


def _cancels(left: Letter, right: Letter) -> bool:
    return left.index == right.index and group_op(left.element, right.element).is_identity


def concat(u: FiniteWord, v: FiniteWord) -> FiniteWord:
    """
    Reduced product u*v.

    Splits u = a·g1·x and v = x^-1·g2·b with the cancelling part maximal, then
    merges g1·g2 when both come from one factor. A merge can only be trivial for
    inverse letters, which the cancellation scan has already consumed.
    """
    a, b = u.letters, v.letters
    if not a:
        return v
    if not b:
        return u
    k = 0
    limit = min(len(a), len(b))
    while k < limit and _cancels(a[-1 - k], b[k]):
        k += 1
    left, right = a[: len(a) - k], b[k:]
    if left and right and left[-1].index == right[0].index:
        merged = Letter(left[-1].index, group_op(left[-1].element, right[0].element))
        return FiniteWord(left[:-1] + (merged,) + right[1:])
    return FiniteWord(left + right)


def invert(u: FiniteWord) -> FiniteWord:
    return FiniteWord(tuple(letter.inverse() for letter in reversed(u.letters)))


def power(u: FiniteWord, m: int) -> FiniteWord:
    """u^m by repeated squaring; negative m powers the inverse."""
    if m < 0:
        u, m = invert(u), -m
    result = EMPTY
    base = u
    while m:
        if m & 1:
            result = concat(result, base)
        m >>= 1
        if m:
            base = concat(base, base)
    return result


def conjugate(u: FiniteWord, c: FiniteWord) -> FiniteWord:
    """u^c = c^-1 * u * c"""
    return concat(concat(invert(c), u), c)


def project_keep(u: FiniteWord, keep: IndexPredicate) -> FiniteWord:
    """Delete letters whose index fails `keep`, then reduce."""
    return reduce(letter for letter in u.letters if keep(letter.index))


def keep_at_most(n: int) -> IndexPredicate:
    return lambda i: i <= n


def keep_above(j: int) -> IndexPredicate:
    return lambda i: i > j


def cyclic_reduce(u: FiniteWord) -> Tuple[FiniteWord, FiniteWord]:
    """
    Split u = conjugator * core * conjugator^-1 with core cyclically reduced.

    Returns (core, conjugator).
    """
    letters = u.letters
    i, j = 0, len(letters) - 1
    while i < j and _cancels(letters[i], letters[j]):
        i += 1
        j -= 1
    if i < j and letters[i].index == letters[j].index:
        # ends from one factor: fold the first letter onto the last
        merged = Letter(letters[j].index, group_op(letters[j].element, letters[i].element))
        return FiniteWord(letters[i + 1 : j] + (merged,)), FiniteWord(letters[: i + 1])
    return FiniteWord(letters[i : j + 1]), FiniteWord(letters[:i])


def torsion_witness(u: FiniteWord) -> Optional[TorsionWitness]:
    """Witness that u has finite order > 1, or None."""
    core, conjugator = cyclic_reduce(u)
    if len(core) != 1:
        return None
    order = element_order(core.letters[0].element)
    if order is None or order == 1:
        return None
    return TorsionWitness(conjugator=conjugator, core=core.letters[0], order=order)


def _index_sequences(max_index: int, length: int) -> Iterator[Tuple[int, ...]]:
    if length == 0:
        yield ()
        return
    for head in _index_sequences(max_index, length - 1):
        for i in range(1, max_index + 1):
            if not head or head[-1] != i:
                yield head + (i,)


def enumerate_words(
    spec: FamilySpec,
    max_index: int,
    max_syllables: int,
    per_factor_limit: Optional[int] = None,
) -> Iterator[FiniteWord]:
    """
    All reduced words with at most `max_syllables` letters over indices <= max_index.

    Ordered by syllable count, then index sequence, then each factor's
    enumeration order. Infinite factors need `per_factor_limit`.
    """
    choices = {
        i: [Letter(i, element) for element in nonidentity_elements(spec.descriptor(i), per_factor_limit)]
        for i in range(1, max_index + 1)
    }
    for length in range(max_syllables + 1):
        for indices in _index_sequences(max_index, length):
            for letters in itertools.product(*(choices[i] for i in indices)):
                yield FiniteWord(tuple(letters))


def is_word_involution(u: FiniteWord) -> bool:
    return bool(u) and not concat(u, u)


def lemma20_family(
    g: Letter, h: Letter, a: Letter, size: int
) -> Tuple[List[FiniteWord], List[FiniteWord]]:
    """
    The words (gh)^n and a^((gh)^n) for n = 1..size.

    g and h must be nonidentity letters from distinct factors, a an involution.
    """
    if g.index == h.index:
        raise ContractViolation(
            message="g and h must come from distinct factors",
            details={"g": str(g), "h": str(h)},
        )
    for name, letter in (("g", g), ("h", h)):
        if letter.element.is_identity:
            raise ContractViolation(
                message=f"{name} must not be the identity",
                details={name: str(letter)},
            )
    a_word = FiniteWord((a,))
    if not is_word_involution(a_word):
        raise ContractViolation(
            message=f"{a} is not an involution",
            details={"a": str(a)},
        )
    gh = reduce([g, h])
    powers: List[FiniteWord] = []
    conjugates: List[FiniteWord] = []
    current = EMPTY
    for _ in range(size):
        current = concat(current, gh)
        powers.append(current)
        conjugates.append(conjugate(a_word, current))
    return powers, conjugates


def check_lemma20_family(g: Letter, h: Letter, a: Letter, size: int) -> FamilyCheck:
    powers, conjugates = lemma20_family(g, h, a, size)
    return FamilyCheck(
        size=size,
        distinct_powers=len(set(powers)) == len(powers),
        powers_non_involutions=not any(is_word_involution(p) for p in powers),
        distinct_conjugates=len(set(conjugates)) == len(conjugates),
        conjugates_involutions=all(is_word_involution(c) for c in conjugates),
        first_power=format_word(powers[0]),
        first_conjugate=format_word(conjugates[0]),
    )


def involution_census(
    spec: FamilySpec,
    max_syllables: int,
    max_index: Optional[int] = None,
    family: Optional[Tuple[Letter, Letter, Letter]] = None,
    family_size: int = 50,
    sample_size: int = 50,
) -> CensusReport:
    """
    Count involutions among all reduced words with at most `max_syllables` letters.

    Every factor up to `max_index` must be finite; optionally checks the
    (gh)^n and a^((gh)^n) families for g, h, a = `family`.
    """
    if max_index is None:
        if spec.size is None:
            raise UnsupportedException(
                message="An infinite family needs an explicit max_index for a census",
                details={"family": spec.label},
            )
        max_index = spec.size
    infinite = [
        i for i in range(1, max_index + 1) if spec.descriptor(i).cardinality() is None
    ]
    if infinite:
        raise UnsupportedException(
            message="Census requires finite factor groups",
            details={"infinite_indices": infinite, "family": spec.label},
        )

    examined = involutions = non_involutions = 0
    samples: List[str] = []
    for u in enumerate_words(spec, max_index, max_syllables):
        examined += 1
        if not u:
            continue
        if is_word_involution(u):
            involutions += 1
            if len(samples) < sample_size:
                samples.append(format_word(u))
        else:
            non_involutions += 1

    checks = check_lemma20_family(*family, family_size) if family is not None else None
    logger.debug(
        "involution_census_complete",
        family=spec.label,
        max_syllables=max_syllables,
        examined=examined,
        involutions=involutions,
    )
    return CensusReport(
        family=spec.label,
        max_index=max_index,
        max_syllables=max_syllables,
        words_examined=examined,
        involutions=involutions,
        non_involutions=non_involutions,
        involution_words=samples,
        families=checks,
    )


def letters_from_pairs(spec: FamilySpec, pairs: Sequence[Tuple[int, str]]) -> List[Letter]:
    """Letters from (index, literal) pairs, parsed under the family."""
    return [Letter(index, parse_element(spec.descriptor(index), literal)) for index, literal in pairs]


def word_from_pairs(spec: FamilySpec, pairs: Sequence[Tuple[int, str]]) -> FiniteWord:
    return reduce(letters_from_pairs(spec, pairs), spec)
