"""
Calculus API Routes
The CLI commands over HTTP; bodies and results are the CLI's JSON shapes.
"""

from typing import Union

from fastapi import APIRouter

from archipelago.core.logging import logger
from archipelago.models.schemas import (
    CalculusRequest,
    ClassificationReport,
    ClassifyRequest,
    EqRequest,
    ProjectRequest,
    SchemaResult,
    TauRequest,
    TorsionResult,
    VerdictResult,
    WitnessReport,
    WitnessRequest,
    WordResult,
)
from archipelago.services import calculus
from archipelago.services.morphisms import classify_family


router = APIRouter()


@router.post("/reduce", response_model=WordResult)
def reduce_word(body: CalculusRequest) -> WordResult:
    """Reduced normal form of a finite expression."""
    spec = calculus.resolve_family(body.family)
    return calculus.reduce_expression(body.expression, spec)


@router.post("/project", response_model=WordResult)
def project_word(body: ProjectRequest) -> WordResult:
    spec = calculus.resolve_family(body.family)
    return calculus.project_expression(body.expression, spec, body.depth)


@router.post("/tau", response_model=Union[WordResult, SchemaResult])
def tau_word(body: TauRequest) -> Union[WordResult, SchemaResult]:
    spec = calculus.resolve_family(body.family)
    return calculus.tau_expression(body.expression, spec, body.level, body.depth)


@router.post("/eq", response_model=VerdictResult)
def eq_words(body: EqRequest) -> VerdictResult:
    """Equality in the topologist's product."""
    spec = calculus.resolve_family(body.family)
    return calculus.compare_expressions(body.left, body.right, spec, body.max_depth)


@router.post("/eqa", response_model=VerdictResult)
def eqa_words(body: EqRequest) -> VerdictResult:
    """Equality in the archipelago group."""
    spec = calculus.resolve_family(body.family)
    return calculus.compare_expressions(
        body.left, body.right, spec, body.max_depth, body.max_level, archipelago=True
    )


@router.post("/torsion", response_model=TorsionResult)
def torsion_word(body: CalculusRequest) -> TorsionResult:
    spec = calculus.resolve_family(body.family)
    return calculus.torsion_expression(body.expression, spec)


@router.post("/classify", response_model=ClassificationReport, response_model_by_alias=True)
def classify(body: ClassifyRequest) -> ClassificationReport:
    """Prototype of the archipelago group, with optional witness pairings."""
    spec = calculus.resolve_family(body.family)
    report = classify_family(spec, body.witnesses)
    logger.info("classify_requested", family=spec.label, prototype=report.prototype)
    return report


@router.post("/witness/{name}", response_model=WitnessReport)
def witness(name: str, body: WitnessRequest) -> WitnessReport:
    """Run a packaged construction: divisible, epsilon or lemma20."""
    spec = calculus.resolve_family(body.family)
    logger.info("witness_requested", name=name, family=spec.label)
    return calculus.run_witness(name, spec, body)
