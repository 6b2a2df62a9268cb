"""
Calculus Facade
Command-level operations shared by the CLI and the HTTP service; both render
the same result models.
"""

from typing import Any, Dict, Optional, Union

from archipelago.core.config import get_settings
from archipelago.core.exceptions import ContractViolation, UnsupportedException
from archipelago.core.logging import logger
from archipelago.services.parser import align, evaluate_finite, evaluate_text, parse_letter
from archipelago.models.schemas import (
    DepthImage,
    PhiResult,
    SchemaResult,
    TorsionResult,
    TorsionWitnessModel,
    VerdictResult,
    WitnessReport,
    WitnessRequest,
    WordResult,
)
from archipelago.services import constructions
from archipelago.services import freewords as fw
from archipelago.services.factor_groups import FamilySpec, family_from_config, family_from_json
from archipelago.services.morphisms import LetterMap, lift_phi
from archipelago.services.projective import (
    describe,
    eq_in_archipelago,
    eq_in_product,
    projection,
    tau,
)


def resolve_family(config: Optional[Dict[str, Any]] = None) -> FamilySpec:
    """The given family config, or the configured default family."""
    if config is None:
        return family_from_json(get_settings().default_family)
    return family_from_config(config)


def word_result(
    command: str,
    u: fw.FiniteWord,
    depth: Optional[int] = None,
    level: Optional[int] = None,
) -> WordResult:
    return WordResult(
        command=command,
        word=fw.format_word(u),
        letters=fw.word_to_json(u),
        length=len(u),
        depth=depth,
        level=level,
    )


def reduce_expression(text: str, spec: FamilySpec) -> WordResult:
    return word_result("reduce", evaluate_finite(text, spec))


def project_expression(text: str, spec: FamilySpec, depth: int) -> WordResult:
    return word_result("project", projection(evaluate_text(text, spec), depth), depth=depth)


def tau_expression(
    text: str,
    spec: FamilySpec,
    level: int,
    depth: Optional[int] = None,
) -> Union[WordResult, SchemaResult]:
    """tau_level of the word: its projection at `depth`, or its schema."""
    w = tau(level, evaluate_text(text, spec))
    if depth is not None:
        return word_result("tau", projection(w, depth), depth=depth, level=level)
    return SchemaResult(command="tau", schema=describe(w), level=level)


def compare_expressions(
    left: str,
    right: str,
    spec: FamilySpec,
    max_depth: Optional[int] = None,
    max_level: Optional[int] = None,
    archipelago: bool = False,
) -> VerdictResult:
    """Equality in the topologist's product, or with `archipelago` in the quotient."""
    settings = get_settings()
    depth = max_depth or settings.default_max_depth
    u, v = align(evaluate_text(left, spec), evaluate_text(right, spec))
    if archipelago:
        level = settings.default_max_level if max_level is None else max_level
        verdict = eq_in_archipelago(u, v, max_level=level, max_depth=depth)
    else:
        verdict = eq_in_product(u, v, depth)
    logger.info(
        "equality_decided",
        archipelago=archipelago,
        status=verdict.status.value,
        level=verdict.level,
    )
    return VerdictResult(
        command="eqa" if archipelago else "eq",
        verdict=verdict,
        text=str(verdict),
    )


def torsion_expression(text: str, spec: FamilySpec) -> TorsionResult:
    u = evaluate_finite(text, spec)
    witness = fw.torsion_witness(u)
    if witness is None:
        return TorsionResult(word=fw.format_word(u), torsion=False)
    return TorsionResult(
        word=fw.format_word(u),
        torsion=True,
        witness=TorsionWitnessModel(
            conjugator=fw.format_word(witness.conjugator),
            core=str(witness.core),
            order=witness.order,
        ),
    )


def phi_expression(text: str, spec: FamilySpec, letter_map: LetterMap, depth: int) -> PhiResult:
    """Images phi(p_n(w)) for every depth up to `depth`."""
    w = evaluate_text(text, spec)
    if depth < w.base_index:
        raise ContractViolation(
            message=f"Depth {depth} is below the base index {w.base_index}",
            details={"depth": depth, "base_index": w.base_index},
        )
    family = lift_phi(letter_map, w)
    return PhiResult(
        family=[
            DepthImage(depth=n, word=fw.format_word(family.at(n)))
            for n in range(w.base_index, depth + 1)
        ],
        compatible=family.incompatible_depth(depth) is None,
    )


def run_witness(name: str, spec: FamilySpec, request: WitnessRequest) -> WitnessReport:
    """Dispatch a packaged construction by name."""
    if name == "divisible":
        return constructions.divisible_witness(request.n_max, spec)
    if name == "epsilon":
        sequences = (
            [tuple(seq) for seq in request.sequences]
            if request.sequences
            else constructions.binary_sequences(request.length)
        )
        return constructions.epsilon_distinctness(
            sequences,
            max_level=request.max_level,
            max_depth=request.max_depth,
            tail=None if request.tail == "last" else request.tail,
            spec=spec,
        )
    if name == "lemma20":
        g = parse_letter(request.g or "g1:1", spec)
        h = parse_letter(request.h or "g2:1", spec)
        a = parse_letter(request.a or "g2:1", spec)
        return constructions.lemma20_families(g, h, a, request.size)
    raise UnsupportedException(
        message=f"Unknown witness {name!r}",
        details={"witness": name, "allowed": ["divisible", "epsilon", "lemma20"]},
    )
