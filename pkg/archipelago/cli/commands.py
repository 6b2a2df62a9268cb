"""
Command Line Interface
Results go to standard output, diagnostics to standard error. Exit codes:
0 success, 2 parse/config error, 3 contract violation, 4 resource budget.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Tuple

import click
from pydantic import BaseModel, ValidationError

from archipelago import __version__
from archipelago.core.config import get_settings
from archipelago.core.exceptions import AppException, ConfigException
from archipelago.core.logging import logger, setup_logging
from archipelago.models.schemas import (
    CensusReport,
    ClassificationReport,
    PhiResult,
    SchemaResult,
    TorsionResult,
    VerdictResult,
    WitnessReport,
    WitnessRequest,
    WordResult,
)
from archipelago.services import calculus, constructions
from archipelago.services import freewords as fw
from archipelago.services.factor_groups import FamilySpec, family_from_json, load_family
from archipelago.services.morphisms import classify_family, load_letter_map
from archipelago.services.parser import parse_letter


@dataclass
class Session:
    family: FamilySpec
    output_format: str


class CalculusGroup(click.Group):
    """Maps calculus exceptions to their exit codes."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except ValidationError as e:
            self._fail(ctx, ConfigException(
                message="Invalid parameters",
                details={"errors": e.errors(include_url=False)},
            ))
        except AppException as exc:
            self._fail(ctx, exc)

    def _fail(self, ctx: click.Context, exc: AppException) -> None:
        logger.warning(
            "command_failed",
            error_type=type(exc).__name__,
            message=exc.message,
        )
        click.echo(f"error: {exc.message}", err=True)
        if exc.details:
            click.echo(json.dumps(exc.details, default=str, sort_keys=True), err=True)
        ctx.exit(exc.exit_code)


def _emit(session: Session, result: BaseModel) -> None:
    if session.output_format == "json":
        click.echo(result.model_dump_json(indent=2, by_alias=True))
    else:
        click.echo(_render_text(result))


def _render_text(result: BaseModel) -> str:
    if isinstance(result, WordResult):
        return result.word
    if isinstance(result, SchemaResult):
        return result.schema_
    if isinstance(result, VerdictResult):
        return result.text
    if isinstance(result, TorsionResult):
        if result.witness is None:
            return f"{result.word}: no torsion"
        w = result.witness
        return f"{result.word}: order {w.order}, conjugator {w.conjugator}, core {w.core}"
    if isinstance(result, PhiResult):
        lines = [f"n={image.depth}: {image.word}" for image in result.family]
        lines.append("compatible" if result.compatible else "not projection-compatible")
        return "\n".join(lines)
    if isinstance(result, ClassificationReport):
        lines = [f"{result.prototype} (lambda={result.lambda_})"]
        for m in result.witness_maps:
            ok = "" if m.validation is None else (" ok" if m.validation.ok else " FAILED")
            lines.append(f"  G_{m.index} = {m.source}: {m.rule}{ok}")
        return "\n".join(lines)
    if isinstance(result, CensusReport):
        lines = [
            f"{result.words_examined} words, {result.involutions} involutions, "
            f"{result.non_involutions} non-involutions"
        ]
        lines.extend(f"  {word}" for word in result.involution_words)
        return "\n".join(lines)
    if isinstance(result, WitnessReport):
        lines = [f"{result.name}: {result.summary}"]
        lines.extend(f"  [{c.kind}] {c.statement}: {c.outcome}" for c in result.certificates)
        return "\n".join(lines)
    return result.model_dump_json(indent=2, by_alias=True)


@click.group(cls=CalculusGroup)
@click.version_option(__version__, prog_name="archipelago")
@click.option(
    "--family",
    "family_path",
    type=click.Path(dir_okay=False, path_type=Path),
    help="FamilySpec JSON file.",
)
@click.option("--family-inline", help="FamilySpec as inline JSON.")
@click.option(
    "--format",
    "output_format",
    type=click.Choice(["text", "json"]),
    default="text",
    show_default=True,
)
@click.pass_context
def cli(
    ctx: click.Context,
    family_path: Optional[Path],
    family_inline: Optional[str],
    output_format: str,
) -> None:
    """Word calculus for free products, the topologist's product and archipelago groups."""
    setup_logging()
    if family_inline is not None:
        family = family_from_json(family_inline)
    elif family_path is not None:
        family = load_family(family_path)
    else:
        family = calculus.resolve_family()
    ctx.obj = Session(family=family, output_format=output_format)
    logger.debug("session_started", family=family.label, command=ctx.invoked_subcommand)


pass_session = click.make_pass_decorator(Session)


@cli.command()
@click.argument("expression")
@pass_session
def reduce(session: Session, expression: str) -> None:
    """Reduced normal form of a finite expression."""
    _emit(session, calculus.reduce_expression(expression, session.family))


@cli.command()
@click.option("-n", "depth", type=int, required=True, help="Projection depth.")
@click.argument("expression")
@pass_session
def project(session: Session, depth: int, expression: str) -> None:
    """The finite word p_n of an expression."""
    _emit(session, calculus.project_expression(expression, session.family, depth))


@cli.command()
@click.option("-j", "level", type=int, required=True, help="Bonding level.")
@click.option("-n", "depth", type=int, default=None, help="Project the result at this depth.")
@click.argument("expression")
@pass_session
def tau(session: Session, level: int, depth: Optional[int], expression: str) -> None:
    """Apply the bonding map tau_j."""
    _emit(session, calculus.tau_expression(expression, session.family, level, depth))


@cli.command()
@click.option("-N", "max_depth", type=int, default=None, help="Depth bound.")
@click.argument("left")
@click.argument("right")
@pass_session
def eq(session: Session, max_depth: Optional[int], left: str, right: str) -> None:
    """Equality in the topologist's product."""
    _emit(session, calculus.compare_expressions(left, right, session.family, max_depth))


@cli.command()
@click.option("-J", "max_level", type=int, default=None, help="Level bound.")
@click.option("-N", "max_depth", type=int, default=None, help="Depth bound.")
@click.argument("left")
@click.argument("right")
@pass_session
def eqa(
    session: Session,
    max_level: Optional[int],
    max_depth: Optional[int],
    left: str,
    right: str,
) -> None:
    """Equality in the archipelago group."""
    _emit(
        session,
        calculus.compare_expressions(
            left, right, session.family, max_depth, max_level, archipelago=True
        ),
    )


@cli.command()
@click.option(
    "--map",
    "map_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="LetterMap JSON file.",
)
@click.option("-n", "depth", type=int, default=None, help="Largest depth.")
@click.argument("expression")
@pass_session
def phi(session: Session, map_path: Path, depth: Optional[int], expression: str) -> None:
    """Depth-wise image of a word under a letter map."""
    letter_map = load_letter_map(map_path, session.family)
    if depth is None:
        depth = get_settings().default_max_depth
    _emit(session, calculus.phi_expression(expression, session.family, letter_map, depth))


@cli.command()
@click.option("--witnesses", type=int, default=0, show_default=True, help="Witness maps to build.")
@click.option("--limit", type=int, default=None, help="Elements validated per factor.")
@pass_session
def classify(session: Session, witnesses: int, limit: Optional[int]) -> None:
    """Decide the prototype of the family's archipelago group."""
    _emit(session, classify_family(session.family, witnesses, limit))


@cli.command()
@click.argument("expression")
@pass_session
def torsion(session: Session, expression: str) -> None:
    """Finite-order witness of a finite word."""
    _emit(session, calculus.torsion_expression(expression, session.family))


@cli.command()
@click.option("-L", "max_syllables", type=int, required=True, help="Largest syllable count.")
@click.option("--max-index", type=int, default=None, help="Largest factor index.")
@click.option("--limit", type=int, default=50, show_default=True, help="Involutions listed.")
@click.option("--g", "g", default=None, help="Letter g of the (gh)^n family.")
@click.option("--h", "h", default=None, help="Letter h of the (gh)^n family.")
@click.option("--a", "a", default=None, help="Involution a of the a^((gh)^n) family.")
@click.option("--size", type=int, default=50, show_default=True, help="Family size.")
@pass_session
def census(
    session: Session,
    max_syllables: int,
    max_index: Optional[int],
    limit: int,
    g: Optional[str],
    h: Optional[str],
    a: Optional[str],
    size: int,
) -> None:
    """Count involutions among short words over finite factors."""
    family: Optional[Tuple[fw.Letter, fw.Letter, fw.Letter]] = None
    if g or h or a:
        family = (
            parse_letter(g or "g1:1", session.family),
            parse_letter(h or "g2:1", session.family),
            parse_letter(a or "g2:1", session.family),
        )
    _emit(
        session,
        fw.involution_census(
            session.family,
            max_syllables,
            max_index=max_index,
            family=family,
            family_size=size,
            sample_size=limit,
        ),
    )


@cli.group(cls=CalculusGroup)
def witness() -> None:
    """Packaged witness constructions."""


@witness.command()
@click.option("--nmax", "n_max", type=int, default=3, show_default=True)
@pass_session
def divisible(session: Session, n_max: int) -> None:
    """Certificates w ~ w_n^(n!) for the divisible nested power."""
    _emit(session, calculus.run_witness("divisible", session.family, WitnessRequest(n_max=n_max)))


@witness.command()
@click.option("--length", type=int, default=3, show_default=True, help="Binary sequence length.")
@click.option("--seq", "sequences", multiple=True, help="Comma separated coordinates; repeatable.")
@click.option("--tail", default="0", show_default=True, help='Coordinate past the sequence, or "last".')
@click.option("--levels", "max_level", type=int, default=2, show_default=True)
@click.option("--depth", "max_depth", type=int, default=20, show_default=True)
@pass_session
def epsilon(
    session: Session,
    length: int,
    sequences: Tuple[str, ...],
    tail: str,
    max_level: int,
    max_depth: int,
) -> None:
    """Separation of triangular words of distinct coordinate sequences."""
    request = WitnessRequest(
        length=length,
        sequences=[list(s) for s in constructions.sequences_from_text(sequences)] or None,
        tail=tail,
        max_level=max_level,
        max_depth=max_depth,
    )
    _emit(session, calculus.run_witness("epsilon", session.family, request))


@witness.command()
@click.option("--g", "g", default="g1:1", show_default=True)
@click.option("--h", "h", default="g2:1", show_default=True)
@click.option("--a", "a", default="g2:1", show_default=True)
@click.option("-N", "size", type=int, default=10, show_default=True)
@pass_session
def lemma20(session: Session, g: str, h: str, a: str, size: int) -> None:
    """Distinct (gh)^n and distinct involutions a^((gh)^n)."""
    request = WitnessRequest(g=g, h=h, a=a, size=size)
    _emit(session, calculus.run_witness("lemma20", session.family, request))


def main() -> None:
    cli(prog_name="archipelago")


if __name__ == "__main__":
    main()
