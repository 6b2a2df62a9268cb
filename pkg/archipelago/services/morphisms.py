"""
Morphisms
Letter-replacement maps, lazy inverse-preserving pairings, reindexing and
regrouping of words, and the classification of archipelago groups.
"""

from __future__ import annotations

import json
import threading
from collections import deque
from math import lcm
from pathlib import Path
from typing import Any, Callable, Deque, Dict, Iterator, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from archipelago.core.config import get_settings
from archipelago.core.exceptions import (
    ClassificationException,
    ConfigException,
    ContractViolation,
    MappingException,
)
from archipelago.core.logging import logger
from archipelago.models.schemas import (
    CardinalTag,
    ClassificationReport,
    LevelOutcome,
    ValidationReport,
    Verdict,
    VerdictStatus,
    WitnessMap,
)
from archipelago.services import freewords as fw
from archipelago.services.factor_groups import (
    FactorBase,
    FamilySpec,
    FreeFactor,
    FreeProductFactor,
    GroupElement,
    InvolutionFreeFactor,
    Payload,
    descriptor_from_config,
    enumerate_elements,
    group_inverse,
    is_involution,
)
from archipelago.services.freewords import FiniteWord
from archipelago.services.projective import (
    BlockPartition,
    DepthFamily,
    IndexPermutation,
    ProjectiveWord,
    Regroup,
    Relabel,
    describe,
    product,
    projection,
)


TargetKind = Literal["Z", "Z2"]

_DONE = object()


def pairing_target(kind: TargetKind) -> FactorBase:
    """Free product of countably many copies of Z, or of Z/2."""
    if kind == "Z":
        return FreeFactor(rank="countable")
    if kind == "Z2":
        return InvolutionFreeFactor(rank="countable")
    raise ConfigException(
        message=f"Unknown pairing target {kind!r}",
        details={"target": kind, "allowed": ["Z", "Z2"]},
    )


def _is_involution_payload(descriptor: FactorBase, p: Payload) -> bool:
    return descriptor.order_of(p) == 2


class PairingBijection:
    """
    Lazy identity- and inverse-preserving injection source -> target.

    Source elements are paired in source enumeration order: an involution takes
    the first unused target involution, a pair x, x^-1 takes the first unused
    pair y, y^-1 of target non-involutions. Targets are therefore consumed in
    enumeration order and the pairing is onto whenever the source supplies
    infinitely many elements of each kind. Queries are serialized by a lock.
    """

    def __init__(
        self,
        source: FactorBase,
        target: FactorBase,
        search_limit: Optional[int] = None,
    ):
        if source.has_involution() and not target.has_involution():
            raise ClassificationException(
                message=f"{source.label} contains involutions but {target.label} has none",
                details={"source": source.label, "target": target.label},
            )
        self.source = source
        self.target = target
        self.search_limit = search_limit or get_settings().pairing_search_limit
        self._forward: Dict[Payload, Payload] = {source.identity_payload(): target.identity_payload()}
        self._backward: Dict[Payload, Payload] = {target.identity_payload(): source.identity_payload()}
        self._source_iter: Iterator[Payload] = source.iter_payloads()
        self._target_iter: Iterator[Payload] = target.iter_payloads()
        next(self._source_iter)
        next(self._target_iter)
        self._pending: Dict[bool, Deque[Payload]] = {True: deque(), False: deque()}
        self._lock = threading.Lock()

    @property
    def next_fresh(self) -> int:
        """Number of nonidentity target elements handed out so far."""
        return len(self._backward) - 1

    def _next_target(self, involution: bool) -> Payload:
        queue = self._pending[involution]
        while queue:
            candidate = queue.popleft()
            if candidate not in self._backward:
                return candidate
        for _ in range(self.search_limit):
            candidate = next(self._target_iter, _DONE)
            if candidate is _DONE:
                raise MappingException(
                    message=f"Target {self.target.label} has no unused element left",
                    details={"source": self.source.label, "target": self.target.label},
                )
            if candidate in self._backward:
                continue
            kind = _is_involution_payload(self.target, candidate)
            if kind == involution:
                return candidate
            self._pending[kind].append(candidate)
        raise MappingException(
            message=f"No unused target element found within {self.search_limit} candidates",
            details={"target": self.target.label, "involution": involution},
        )

    def _record(self, x: Payload, y: Payload) -> None:
        self._forward[x] = y
        self._backward[y] = x

    def _extend(self) -> bool:
        """Pair the next unpaired source element; False once the source is exhausted."""
        for x in self._source_iter:
            if x in self._forward:
                continue
            if _is_involution_payload(self.source, x):
                self._record(x, self._next_target(True))
            else:
                y = self._next_target(False)
                self._record(x, y)
                self._record(self.source.invert(x), self.target.invert(y))
            logger.debug(
                "pairing_extended",
                source=self.source.label,
                element=self.source.format_literal(x),
                image=self.target.format_literal(self._forward[x]),
            )
            return True
        return False

    def _lookup(self, table: Dict[Payload, Payload], key: Payload, direction: str) -> Payload:
        steps = 0
        while key not in table:
            if steps >= self.search_limit or not self._extend():
                raise MappingException(
                    message=f"No {direction} image within the enumerated {self.source.label} elements",
                    details={"direction": direction, "steps": steps},
                )
            steps += 1
        return table[key]

    def forward(self, x: Payload) -> Payload:
        if not self.source.is_payload(x):
            raise MappingException(
                message=f"{x!r} is not an element of {self.source.label}",
                details={"source": self.source.label},
            )
        with self._lock:
            return self._lookup(self._forward, x, "forward")

    def backward(self, y: Payload) -> Payload:
        if not self.target.is_payload(y):
            raise MappingException(
                message=f"{y!r} is not an element of {self.target.label}",
                details={"target": self.target.label},
            )
        with self._lock:
            return self._lookup(self._backward, y, "backward")

    def pairs(self) -> List[Tuple[Payload, Payload]]:
        with self._lock:
            return list(self._forward.items())

    def __repr__(self) -> str:
        return f"PairingBijection({self.source.label} -> {self.target.label}, size={len(self._forward)})"


def build_pairing(source: FactorBase, target_kind: TargetKind) -> PairingBijection:
    return PairingBijection(source, pairing_target(target_kind))


# Letter functions

class LetterFunction:
    """An identity- and inverse-preserving function G_i -> H_i."""

    source: FactorBase
    target: FactorBase

    def __call__(self, a: GroupElement) -> GroupElement:
        raise NotImplementedError

    def inverse(self) -> "LetterFunction":
        raise NotImplementedError

    def to_config(self) -> Any:
        raise NotImplementedError


class IdentityFunction(LetterFunction):
    def __init__(self, descriptor: FactorBase):
        self.source = self.target = descriptor

    def __call__(self, a: GroupElement) -> GroupElement:
        return a

    def inverse(self) -> LetterFunction:
        return self

    def to_config(self) -> Any:
        return "identity"


class PairingFunction(LetterFunction):
    def __init__(self, bijection: PairingBijection, kind: str, backward: bool = False):
        self.bijection = bijection
        self.kind = kind
        self.backward = backward
        self.source = bijection.target if backward else bijection.source
        self.target = bijection.source if backward else bijection.target

    def __call__(self, a: GroupElement) -> GroupElement:
        lookup = self.bijection.backward if self.backward else self.bijection.forward
        return GroupElement(self.target, lookup(a.payload))

    def inverse(self) -> LetterFunction:
        return PairingFunction(self.bijection, self.kind, not self.backward)

    def to_config(self) -> Any:
        return f"pairing:{self.kind}" + (":inverse" if self.backward else "")


class TableFunction(LetterFunction):
    """Finite table of images; unlisted elements map to themselves or have no image."""

    def __init__(
        self,
        source: FactorBase,
        target: FactorBase,
        table: Dict[Payload, Payload],
        default_identity: bool = True,
    ):
        if default_identity and source != target:
            raise ConfigException(
                message="An identity default needs equal source and target factors",
                details={"source": source.label, "target": target.label},
            )
        self.source = source
        self.target = target
        self.table = dict(table)
        self.default_identity = default_identity

    def __call__(self, a: GroupElement) -> GroupElement:
        if a.is_identity:
            return GroupElement(self.target, self.target.identity_payload())
        if a.payload in self.table:
            return GroupElement(self.target, self.table[a.payload])
        if self.default_identity:
            return GroupElement(self.target, a.payload)
        raise MappingException(
            message=f"No image listed for {a} in {self.source.label}",
            details={"element": str(a), "source": self.source.label},
        )

    def inverse(self) -> LetterFunction:
        reverse = {v: k for k, v in self.table.items()}
        if len(reverse) != len(self.table):
            raise MappingException(
                message="Letter table is not injective",
                details={"source": self.source.label},
            )
        return TableFunction(self.target, self.source, reverse, self.default_identity)

    def to_config(self) -> Any:
        return {
            "table": [
                [self.source.format_literal(k), self.target.format_literal(v)]
                for k, v in self.table.items()
            ],
            "target": self.target.to_config(),
            "default": "identity" if self.default_identity else None,
        }


class CallableFunction(LetterFunction):
    def __init__(
        self,
        source: FactorBase,
        target: FactorBase,
        fn: Callable[[Payload], Payload],
        inverse_fn: Optional[Callable[[Payload], Payload]] = None,
    ):
        self.source = source
        self.target = target
        self.fn = fn
        self.inverse_fn = inverse_fn

    def __call__(self, a: GroupElement) -> GroupElement:
        return GroupElement(self.target, self.fn(a.payload))

    def inverse(self) -> LetterFunction:
        if self.inverse_fn is None:
            raise MappingException(
                message="Callable letter function has no inverse",
                details={"source": self.source.label},
            )
        return CallableFunction(self.target, self.source, self.inverse_fn, self.fn)

    def to_config(self) -> Any:
        return "callable"


class LetterMap:
    """
    Per-index letter functions phi_i: G_i -> H_i.

    Functions are given for a prefix window and a repeating tail window; the
    target family is read off the functions' targets.
    """

    def __init__(
        self,
        source: FamilySpec,
        prefix: Sequence[LetterFunction] = (),
        tail: Optional[Sequence[LetterFunction]] = None,
    ):
        self.source: FamilySpec = source
        self.prefix: Tuple[LetterFunction, ...] = tuple(prefix)
        self.tail: Optional[Tuple[LetterFunction, ...]] = tuple(tail) if tail else None

        if source.is_finite:
            window, period = source.size or 0, 0
        else:
            if self.tail is None:
                raise ContractViolation(
                    message="A letter map over an infinite family needs a tail pattern",
                    details={"family": source.label},
                )
            window = max(len(self.prefix), len(source.prefix))
            period = lcm(len(self.tail), len(source.tail or ()))
        for i in range(1, window + period + 1):
            f = self.function(i)
            expected = source.descriptor(i)
            if f.source is not expected and f.source != expected:
                raise ContractViolation(
                    message=f"Letter function at index {i} expects {f.source.label}, family has {expected.label}",
                    details={"index": i, "expected": expected.label, "got": f.source.label},
                )
        targets = [self.function(i).target for i in range(1, window + period + 1)]
        self.target = FamilySpec(
            prefix=tuple(targets[:window]),
            tail=tuple(targets[window:]) if period else None,
        )
        self._window = window
        self._period = period

    def function(self, i: int) -> LetterFunction:
        if i <= len(self.prefix):
            return self.prefix[i - 1]
        if self.tail is None:
            raise ContractViolation(
                message=f"Letter map has no function for index {i}",
                details={"index": i},
            )
        return self.tail[(i - len(self.prefix) - 1) % len(self.tail)]

    def functions(self) -> List[LetterFunction]:
        return [self.function(i) for i in range(1, self._window + self._period + 1)]

    def to_config(self) -> Dict[str, Any]:
        config: Dict[str, Any] = {"prefix": [f.to_config() for f in self.prefix]}
        if self.tail is not None:
            config["tail"] = [f.to_config() for f in self.tail]
        return config

    def __repr__(self) -> str:
        return f"LetterMap({self.source.label} -> {self.target.label})"


def _function_from_entry(
    entry: Any,
    descriptor: FactorBase,
    pairings: Dict[Tuple[FactorBase, str], PairingBijection],
) -> LetterFunction:
    if entry == "identity":
        return IdentityFunction(descriptor)
    if isinstance(entry, str) and entry.startswith("pairing:"):
        kind = entry.split(":", 1)[1]
        key = (descriptor, kind)
        if key not in pairings:
            pairings[key] = PairingBijection(descriptor, pairing_target(kind))
        return PairingFunction(pairings[key], kind)
    if isinstance(entry, dict) and "table" in entry:
        target = descriptor_from_config(entry["target"]) if "target" in entry else descriptor
        default = entry.get("default", "identity")
        if default not in ("identity", None):
            raise ConfigException(
                message=f"Unknown table default {default!r}",
                details={"default": default},
            )
        table = {}
        for row in entry["table"]:
            if not isinstance(row, (list, tuple)) or len(row) != 2:
                raise ConfigException(
                    message="Table rows must be [source, target] literal pairs",
                    details={"row": repr(row)},
                )
            table[descriptor.parse_literal(str(row[0]))] = target.parse_literal(str(row[1]))
        return TableFunction(descriptor, target, table, default_identity=default == "identity")
    raise ConfigException(
        message=f"Unknown letter map entry {entry!r}",
        details={"entry": repr(entry)},
    )


def letter_map_from_config(source: FamilySpec, config: Any) -> LetterMap:
    """
    Build a LetterMap from {"prefix": [...], "tail": [...]}.

    Entries are "identity", "pairing:Z", "pairing:Z2" or
    {"table": [[src, dst], ...], "target": descriptor, "default": "identity" | null}.
    Pairings are shared between indices with equal factors.
    """
    if not isinstance(config, dict) or not set(config) <= {"prefix", "tail"}:
        raise ConfigException(
            message="Letter map config must be an object with prefix/tail lists",
            details={"keys": sorted(config) if isinstance(config, dict) else None},
        )
    prefix_entries = list(config.get("prefix", []))
    tail_entries = config.get("tail")
    if tail_entries is not None and not tail_entries:
        raise ConfigException(message="Letter map tail must not be empty", details={})

    if source.is_finite:
        window, period = source.size or 0, 0
    else:
        if tail_entries is None:
            raise ConfigException(
                message="A letter map over an infinite family needs a tail pattern",
                details={"family": source.label},
            )
        window = max(len(prefix_entries), len(source.prefix))
        period = lcm(len(tail_entries), len(source.tail or ()))

    def entry(i: int) -> Any:
        if i <= len(prefix_entries):
            return prefix_entries[i - 1]
        if tail_entries is None:
            raise ConfigException(
                message=f"Letter map has no entry for index {i}",
                details={"index": i},
            )
        return tail_entries[(i - len(prefix_entries) - 1) % len(tail_entries)]

    pairings: Dict[Tuple[FactorBase, str], PairingBijection] = {}
    functions = [
        _function_from_entry(entry(i), source.descriptor(i), pairings)
        for i in range(1, window + period + 1)
    ]
    return LetterMap(source, functions[:window], functions[window:] or None)


def letter_map_from_json(source: FamilySpec, text: str) -> LetterMap:
    try:
        config = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigException(
            message="Invalid JSON in letter map",
            details={"error": str(e), "line": e.lineno, "column": e.colno},
        )
    return letter_map_from_config(source, config)


def load_letter_map(path: Path, source: FamilySpec) -> LetterMap:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigException(
            message=f"Cannot read letter map file {path}",
            details={"error": str(e)},
        )
    return letter_map_from_json(source, text)


def identity_map(spec: FamilySpec) -> LetterMap:
    if spec.is_finite:
        return letter_map_from_config(spec, {"prefix": ["identity"] * (spec.size or 0)})
    return letter_map_from_config(spec, {"prefix": [], "tail": ["identity"]})


def inverse_map(m: LetterMap) -> LetterMap:
    """Two-sided inverse of a bijective letter map."""
    return LetterMap(
        m.target,
        [f.inverse() for f in m.prefix],
        [f.inverse() for f in m.tail] if m.tail else None,
    )


# Induced maps

def apply_letter_map(m: LetterMap, u: FiniteWord) -> FiniteWord:
    """Replace every letter by its image, then reduce over the target family."""
    raw = []
    for letter in u:
        f = m.function(letter.index)
        if letter.element.descriptor is not f.source and letter.element.descriptor != f.source:
            raise ContractViolation(
                message=f"Letter {letter} is not over the map's source family",
                details={"index": letter.index, "expected": f.source.label},
            )
        raw.append((letter.index, f(letter.element)))
    return fw.reduce(raw)


def lift_phi(m: LetterMap, w: ProjectiveWord) -> DepthFamily:
    """Depth-wise image phi(p_n(w)); compatibility across depths is not guaranteed."""
    if w.spec is not m.source and w.spec != m.source:
        raise ContractViolation(
            message="Word is not over the map's source family",
            details={"word_family": w.spec.label, "map_family": m.source.label},
        )
    return DepthFamily(
        w.base_index,
        lambda n: apply_letter_map(m, projection(w, n)),
        label=f"phi({describe(w)})",
    )


def claim_certify(
    m: LetterMap,
    u: ProjectiveWord,
    v: ProjectiveWord,
    max_level: int,
    max_depth: int,
) -> Verdict:
    """
    Compare phi(uv) with phi(u)phi(v): the first level j whose bonding map
    makes both families agree at every depth up to max_depth.
    """
    joint = lift_phi(m, product(u, v))
    left, right = lift_phi(m, u), lift_phi(m, v)
    outcomes: List[LevelOutcome] = []
    for j in range(u.base_index - 1, max_level + 1):
        keep = fw.keep_above(j)
        mismatch = next(
            (
                n
                for n in range(u.base_index, max_depth + 1)
                if fw.project_keep(joint.at(n), keep)
                != fw.project_keep(fw.concat(left.at(n), right.at(n)), keep)
            ),
            None,
        )
        if mismatch is None:
            outcomes.append(LevelOutcome(level=j, status=VerdictStatus.EQUAL_CERTIFIED, depth=max_depth))
            return Verdict.depth_checked(
                level=j,
                depth=max_depth,
                max_level=max_level,
                max_depth=max_depth,
                per_level=outcomes,
            )
        outcomes.append(LevelOutcome(level=j, status=VerdictStatus.DISTINCT_WITNESS, depth=mismatch))
    return Verdict.unknown(
        max_depth=max_depth,
        max_level=max_level,
        per_level=outcomes,
        all_levels_distinct=bool(outcomes),
    )


# Reindexing

def permuted_family(spec: FamilySpec, permutation: IndexPermutation) -> FamilySpec:
    """The family with G'_{f(i)} = G_i."""
    inverse = permutation.inverse()
    width = max([len(spec.prefix), *permutation.support])
    if spec.is_finite:
        if width > len(spec.prefix):
            raise ContractViolation(
                message="Permutation moves indices beyond the finite family",
                details={"support": list(permutation.support), "size": len(spec.prefix)},
            )
        return FamilySpec(prefix=tuple(spec.descriptor(inverse(i)) for i in range(1, width + 1)))
    shift = (width - len(spec.prefix)) % len(spec.tail)
    return FamilySpec(
        prefix=tuple(spec.descriptor(inverse(i)) for i in range(1, width + 1)),
        tail=spec.tail[shift:] + spec.tail[:shift],
    )


def permute_indices(permutation: IndexPermutation | Dict[int, int], w: ProjectiveWord) -> ProjectiveWord:
    """Relabel letter indices by a finitely supported permutation."""
    if isinstance(permutation, dict):
        permutation = IndexPermutation.from_mapping(permutation)
    spec = permuted_family(w.spec, permutation)
    first_fixed = w.base_index
    while first_fixed in permutation.support:
        first_fixed += 1
    base = min([first_fixed] + [permutation(i) for i in permutation.support if i >= w.base_index])
    return ProjectiveWord(spec, base, Relabel(permutation, w))


def regrouped_family(spec: FamilySpec, partition: BlockPartition) -> FamilySpec:
    """The family H_m = free product of the G_i with i in block m."""
    explicit = len(partition.blocks)

    def factor(m: int) -> FreeProductFactor:
        return FreeProductFactor(components=tuple(spec.descriptor(i) for i in partition.block(m)))

    if spec.is_finite:
        rest = len(spec.prefix) - partition.covered
        if rest < 0 or rest % partition.width:
            raise ContractViolation(
                message="Blocks do not tile the finite family",
                details={"size": len(spec.prefix), "covered": partition.covered, "width": partition.width},
            )
        return FamilySpec(prefix=tuple(factor(m) for m in range(1, explicit + rest // partition.width + 1)))
    # first tail block lying wholly inside the repeating part of the old family
    r = 1
    while partition.covered + (r - 1) * partition.width < len(spec.prefix):
        r += 1
    period = lcm(partition.width, len(spec.tail)) // partition.width
    return FamilySpec(
        prefix=tuple(factor(m) for m in range(1, explicit + r)),
        tail=tuple(factor(m) for m in range(explicit + r, explicit + r + period)),
    )


def regroup(partition: BlockPartition, w: ProjectiveWord) -> ProjectiveWord:
    """Word over block factors: runs of letters from one block become one letter."""
    spec = regrouped_family(w.spec, partition)
    base = 1
    while max(partition.block(base)) < w.base_index:
        base += 1
    return ProjectiveWord(spec, base, Regroup(partition, w))


# Classification

def _cardinal_tag(descriptor: FactorBase) -> CardinalTag:
    size = descriptor.cardinality()
    return "countable" if size is None else size - 1


class ClassificationProfile(BaseModel):
    """
    kappa_n = |G_n minus identity| per index and lambda = number of indices whose
    factor contains an involution, in prefix/tail form.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    kappa_prefix: Tuple[CardinalTag, ...] = ()
    kappa_tail: Optional[Tuple[CardinalTag, ...]] = None
    involution_prefix: Tuple[bool, ...] = ()
    involution_tail: Optional[Tuple[bool, ...]] = None
    lambda_: Optional[CardinalTag] = Field(None, alias="lambda")

    @model_validator(mode="after")
    def check_consistency(self) -> "ClassificationProfile":
        if len(self.kappa_prefix) != len(self.involution_prefix):
            raise ValueError("kappa_prefix and involution_prefix differ in length")
        if (self.kappa_tail is None) != (self.involution_tail is None) or (
            self.kappa_tail is not None and len(self.kappa_tail) != len(self.involution_tail or ())
        ):
            raise ValueError("kappa_tail and involution_tail differ in shape")
        if self.kappa_tail is not None and not self.kappa_tail:
            raise ValueError("Tail pattern must not be empty")
        flags = zip(
            self.kappa_prefix + (self.kappa_tail or ()),
            self.involution_prefix + (self.involution_tail or ()),
        )
        for kappa, involution in flags:
            if kappa == 0 and involution:
                raise ValueError("A trivial factor cannot contain an involution")
            if isinstance(kappa, int) and kappa % 2 == 1 and not involution:
                raise ValueError("A factor of even order contains an involution")
        derived = self.derived_lambda()
        if self.lambda_ is None:
            object.__setattr__(self, "lambda_", derived)
        elif self.lambda_ != derived:
            raise ValueError(f"lambda {self.lambda_} disagrees with involution flags ({derived})")
        return self

    def derived_lambda(self) -> CardinalTag:
        if self.involution_tail and any(self.involution_tail):
            return "countable"
        return sum(self.involution_prefix)

    @property
    def kappa(self) -> List[CardinalTag]:
        return list(self.kappa_prefix + (self.kappa_tail or ()))


def profile_from_family(spec: FamilySpec) -> ClassificationProfile:
    return ClassificationProfile(
        kappa_prefix=tuple(_cardinal_tag(d) for d in spec.prefix),
        kappa_tail=tuple(_cardinal_tag(d) for d in spec.tail) if spec.tail else None,
        involution_prefix=tuple(d.has_involution() for d in spec.prefix),
        involution_tail=tuple(d.has_involution() for d in spec.tail) if spec.tail else None,
    )


def check_profile(profile: ClassificationProfile, spec: FamilySpec) -> None:
    """Raise ContractViolation when the profile disagrees with the family's factors."""
    observed = profile_from_family(spec)
    if observed.lambda_ != profile.lambda_:
        raise ContractViolation(
            message=f"Profile lambda {profile.lambda_} disagrees with the family ({observed.lambda_})",
            details={"profile": profile.lambda_, "family": observed.lambda_},
        )
    size = max(len(profile.kappa), len(observed.kappa))

    def tag(p: ClassificationProfile, i: int) -> CardinalTag:
        if i <= len(p.kappa_prefix):
            return p.kappa_prefix[i - 1]
        tail = p.kappa_tail or ()
        return tail[(i - len(p.kappa_prefix) - 1) % len(tail)] if tail else 0

    for i in range(1, size + 1):
        if tag(profile, i) != tag(observed, i):
            raise ContractViolation(
                message=f"Profile kappa_{i} = {tag(profile, i)} disagrees with the family ({tag(observed, i)})",
                details={"index": i},
            )


Prototype = Literal["A_Z", "A_Z2", "Trivial", "Unsupported"]


def classify(profile: ClassificationProfile) -> Prototype:
    """
    Decide the prototype: A(G_n) is A(Z) when lambda is finite and A(Z/2)
    otherwise; finitely many nontrivial factors give the trivial group.
    """
    if "uncountable" in profile.kappa:
        return "Unsupported"
    if not any(k != 0 for k in profile.kappa_tail or ()):
        return "Trivial"
    return "A_Z" if isinstance(profile.lambda_, int) else "A_Z2"


def validate_function(
    index: int,
    f: LetterFunction,
    limit: Optional[int] = None,
) -> ValidationReport:
    """Check identity, inverse and involution preservation and injectivity on enumerated elements."""
    elements = enumerate_elements(f.source, limit or get_settings().validation_limit)
    failures: List[str] = []
    seen: Dict[Payload, Payload] = {}
    identity_ok = inverse_ok = involution_ok = injective = True
    for a in elements:
        try:
            b = f(a)
            b_inv = f(group_inverse(a))
        except MappingException as e:
            failures.append(f"{a}: {e.message}")
            inverse_ok = False
            continue
        if a.is_identity and not b.is_identity:
            identity_ok = False
            failures.append(f"identity maps to {b}")
        if b_inv != group_inverse(b):
            inverse_ok = False
            failures.append(f"{a}^-1 maps to {b_inv}, not {group_inverse(b)}")
        if is_involution(a) != is_involution(b):
            involution_ok = False
            failures.append(f"{a} and its image {b} differ in involution type")
        if seen.setdefault(b.payload, a.payload) != a.payload:
            injective = False
            failures.append(f"{a} and {f.source.format_literal(seen[b.payload])} share the image {b}")
    return ValidationReport(
        index=index,
        source=f.source.label,
        target=f.target.label,
        checked=len(elements),
        identity_preserved=identity_ok,
        inverse_preserved=inverse_ok,
        involutions_preserved=involution_ok,
        injective=injective,
        failures=failures[:10],
    )


def validate_letter_map(
    m: LetterMap,
    indices: Sequence[int],
    limit: Optional[int] = None,
) -> List[ValidationReport]:
    return [validate_function(i, m.function(i), limit) for i in indices]


def classify_family(
    spec: FamilySpec,
    witness_indices: int = 0,
    limit: Optional[int] = None,
) -> ClassificationReport:
    """
    Classify A(G_n) and, for the first `witness_indices` factors, build and
    validate the pairings behind the isomorphism with the prototype.
    """
    profile = profile_from_family(spec)
    prototype = classify(profile)
    witnesses: List[WitnessMap] = []
    if prototype in ("A_Z", "A_Z2"):
        pairings: Dict[Tuple[FactorBase, str], PairingBijection] = {}
        count = witness_indices if spec.size is None else min(witness_indices, spec.size)
        for i in range(1, count + 1):
            descriptor = spec.descriptor(i)
            if prototype == "A_Z" and descriptor.has_involution():
                witnesses.append(WitnessMap(index=i, source=descriptor.label, rule="dropped"))
                continue
            kind = "Z" if prototype == "A_Z" else "Z2"
            f = _function_from_entry(f"pairing:{kind}", descriptor, pairings)
            report = validate_function(i, f, limit)
            sample = [
                [descriptor.format_literal(x), f.target.format_literal(y)]
                for x, y in f.bijection.pairs()[1:5]
            ]
            witnesses.append(
                WitnessMap(
                    index=i,
                    source=descriptor.label,
                    rule=f"pairing:{kind}",
                    target=f.target.label,
                    sample=sample,
                    validation=report,
                )
            )
    logger.info(
        "classification_decided",
        family=spec.label,
        prototype=prototype,
        lambda_=profile.lambda_,
        witnesses=len(witnesses),
    )
    return ClassificationReport(
        prototype=prototype,
        lambda_=profile.lambda_,
        kappa=profile.kappa,
        kappa_repeats_from=len(spec.prefix) + 1 if spec.tail else None,
        witness_maps=witnesses,
    )

