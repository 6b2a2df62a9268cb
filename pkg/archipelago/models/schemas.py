from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator


CardinalTag = Union[int, Literal["countable", "uncountable"]]


class VerdictStatus(str, Enum):
    """Three-valued outcome of an equality question"""
    EQUAL_CERTIFIED = "EqualCertified"
    DISTINCT_WITNESS = "DistinctWitness"
    UNKNOWN_UP_TO = "UnknownUpTo"


class LevelOutcome(BaseModel):
    """Result of the product comparison after one bonding map tau_j"""
    level: int
    status: VerdictStatus
    depth: Optional[int] = Field(None, description="Witness depth, or last depth checked")


class Verdict(BaseModel):
    """
    Equality certificate for the topologist's product or the archipelago quotient.

    Depth-checked agreement alone never yields EqualCertified in the product;
    only structural normal-form identity does.
    """
    status: VerdictStatus
    level: Optional[int] = Field(None, description="Bonding level j of the certificate")
    proof: Optional[Literal["structural", "depth_checked"]] = None
    depth: Optional[int] = Field(None, description="Distinguishing depth n, or depth checked")
    max_level: Optional[int] = None
    max_depth: Optional[int] = None
    per_level: List[LevelOutcome] = Field(default_factory=list)
    all_levels_distinct: bool = False

    @classmethod
    def structural(cls, level: Optional[int] = None, **bounds: Any) -> "Verdict":
        return cls(status=VerdictStatus.EQUAL_CERTIFIED, level=level, proof="structural", **bounds)

    @classmethod
    def depth_checked(cls, level: int, depth: int, **bounds: Any) -> "Verdict":
        return cls(
            status=VerdictStatus.EQUAL_CERTIFIED,
            level=level,
            proof="depth_checked",
            depth=depth,
            **bounds,
        )

    @classmethod
    def distinct(cls, depth: int, **bounds: Any) -> "Verdict":
        return cls(status=VerdictStatus.DISTINCT_WITNESS, depth=depth, **bounds)

    @classmethod
    def unknown(cls, max_depth: int, **bounds: Any) -> "Verdict":
        return cls(status=VerdictStatus.UNKNOWN_UP_TO, max_depth=max_depth, **bounds)

    @property
    def is_certified_equal(self) -> bool:
        return self.status == VerdictStatus.EQUAL_CERTIFIED

    @property
    def is_distinct(self) -> bool:
        return self.status == VerdictStatus.DISTINCT_WITNESS

    def __str__(self) -> str:
        if self.status == VerdictStatus.EQUAL_CERTIFIED:
            parts = [] if self.level is None else [f"j={self.level}"]
            parts.append(self.proof or "structural")
            if self.proof == "depth_checked":
                parts.append(f"N={self.depth}")
            return f"EqualCertified({', '.join(parts)})"
        if self.status == VerdictStatus.DISTINCT_WITNESS:
            return f"DistinctWitness(n={self.depth})"
        parts = [] if self.max_level is None else [f"J={self.max_level}"]
        parts.append(f"N={self.max_depth}")
        if self.all_levels_distinct:
            parts.append("distinct at every level")
        return f"UnknownUpTo({', '.join(parts)})"


class Certificate(BaseModel):
    """One checked statement inside a witness report"""
    kind: Literal["step", "composed", "seed", "separation", "expected_equal", "family"]
    statement: str
    level: Optional[int] = None
    depth: Optional[int] = None
    outcome: str
    details: Dict[str, Any] = Field(default_factory=dict)


class WitnessReport(BaseModel):
    """Report of a packaged construction; deterministic given its parameters"""
    name: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    certificates: List[Certificate] = Field(default_factory=list)
    resources: Dict[str, Any] = Field(default_factory=dict)
    summary: str = ""

    @property
    def all_hold(self) -> bool:
        return all(
            not c.outcome.startswith(("UnknownUpTo", "fails"))
            for c in self.certificates
        )


class FamilyCheck(BaseModel):
    """Distinctness checks on the families (gh)^n and a^((gh)^n)"""
    size: int
    distinct_powers: bool
    powers_non_involutions: bool
    distinct_conjugates: bool
    conjugates_involutions: bool
    first_power: str
    first_conjugate: str


class CensusReport(BaseModel):
    """Involution census over a finite free product"""
    family: str
    max_index: int
    max_syllables: int
    words_examined: int
    involutions: int
    non_involutions: int
    involution_words: List[str] = Field(default_factory=list)
    families: Optional[FamilyCheck] = None


class ValidationReport(BaseModel):
    """Sampled validation of one letter function"""
    index: int
    source: str
    target: str
    checked: int
    identity_preserved: bool
    inverse_preserved: bool
    involutions_preserved: bool
    injective: bool
    failures: List[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            self.identity_preserved
            and self.inverse_preserved
            and self.involutions_preserved
            and self.injective
        )


class WitnessMap(BaseModel):
    """Per-index witness of the classification isomorphism chain"""
    index: int
    source: str
    rule: Literal["pairing:Z", "pairing:Z2", "dropped"]
    target: Optional[str] = None
    sample: List[List[str]] = Field(default_factory=list)
    validation: Optional[ValidationReport] = None


class ClassificationReport(BaseModel):
    """Prototype decided from the cardinal profile"""
    model_config = ConfigDict(populate_by_name=True)

    prototype: Literal["A_Z", "A_Z2", "Trivial", "Unsupported"]
    lambda_: CardinalTag = Field(..., alias="lambda")
    kappa: List[CardinalTag]
    kappa_repeats_from: Optional[int] = Field(
        None, description="Index from which the kappa tail pattern repeats"
    )
    witness_maps: List[WitnessMap] = Field(default_factory=list)


class LetterModel(BaseModel):
    index: int
    literal: str


class TorsionWitnessModel(BaseModel):
    conjugator: str
    core: str
    order: int


class WordResult(BaseModel):
    """Finite word output shared by the CLI and the HTTP service"""
    command: str
    word: str
    letters: List[List[Union[int, str]]]
    length: int
    depth: Optional[int] = None
    level: Optional[int] = None


class SchemaResult(BaseModel):
    command: str
    schema_: str = Field(..., alias="schema")
    level: Optional[int] = None

    model_config = ConfigDict(populate_by_name=True)


class VerdictResult(BaseModel):
    command: str
    verdict: Verdict
    text: str


class TorsionResult(BaseModel):
    command: str = "torsion"
    word: str
    torsion: bool
    witness: Optional[TorsionWitnessModel] = None


class DepthImage(BaseModel):
    depth: int
    word: str


class PhiResult(BaseModel):
    command: str = "phi"
    family: List[DepthImage]
    compatible: bool = Field(..., description="Whether consecutive depths are projection-compatible")


# HTTP request bodies

class CalculusRequest(BaseModel):
    """Expression evaluated over a family (the default family when omitted)"""
    expression: str = Field(..., min_length=1, max_length=10_000)
    family: Optional[Dict[str, Any]] = None

    class Config:
        json_schema_extra = {
            "example": {
                "expression": "g1:2 g1:-2 g2:5",
                "family": {"prefix": [], "tail": ["Z"]},
            }
        }


class ProjectRequest(CalculusRequest):
    depth: int = Field(..., ge=1)


class TauRequest(CalculusRequest):
    level: int = Field(..., ge=0)
    depth: Optional[int] = Field(None, ge=1)


class EqRequest(BaseModel):
    left: str = Field(..., min_length=1)
    right: str = Field(..., min_length=1)
    family: Optional[Dict[str, Any]] = None
    max_depth: Optional[int] = Field(None, ge=1)
    max_level: Optional[int] = Field(None, ge=0)


class ClassifyRequest(BaseModel):
    family: Dict[str, Any]
    witnesses: int = Field(default=0, ge=0, le=64)


class WitnessRequest(BaseModel):
    """Parameters of a packaged construction"""
    family: Optional[Dict[str, Any]] = None
    n_max: int = Field(default=3, ge=2)
    sequences: Optional[List[List[str]]] = None
    length: int = Field(default=3, ge=1, le=8)
    tail: str = Field(default="0", description='Coordinate past the sequence, or "last"')
    max_level: int = Field(default=2, ge=0)
    max_depth: int = Field(default=20, ge=1)
    g: Optional[str] = None
    h: Optional[str] = None
    a: Optional[str] = None
    size: int = Field(default=10, ge=1)

    @field_validator("sequences")
    @classmethod
    def validate_sequences(cls, v: Optional[List[List[str]]]) -> Optional[List[List[str]]]:
        if v is not None and any(len(seq) == 0 for seq in v):
            raise ValueError("Coordinate sequences must be nonempty")
        return v
