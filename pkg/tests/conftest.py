import random
from itertools import permutations

import pytest

from archipelago.core.config import get_settings
from archipelago.core.logging import setup_logging
from archipelago.services.factor_groups import (
    FamilySpec,
    TableFactor,
    constant_family,
    finite_family,
)
from archipelago.services.projective import clear_projection_cache


setup_logging()


def s3_table() -> list:
    """Multiplication table of the symmetric group on three points."""
    perms = list(permutations(range(3)))
    index = {p: i for i, p in enumerate(perms)}
    return [
        [index[tuple(a[b[k]] for k in range(3))] for b in perms]
        for a in perms
    ]


@pytest.fixture(autouse=True)
def fresh_caches():
    get_settings.cache_clear()
    clear_projection_cache()
    yield
    get_settings.cache_clear()
    clear_projection_cache()


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240611)


@pytest.fixture
def z_family() -> FamilySpec:
    return constant_family("Z")


@pytest.fixture
def c3c2_family() -> FamilySpec:
    """Z/3 * Z/2, with x = g1:1 and y = g2:1."""
    return finite_family({"cyclic": 3}, {"cyclic": 2})


@pytest.fixture
def s3() -> TableFactor:
    return TableFactor(table=tuple(tuple(row) for row in s3_table()))


@pytest.fixture
def mixed_family(s3) -> FamilySpec:
    """Z, Z/2, Z/3, Z/5, S3, Q as G_1..G_6."""
    return finite_family("Z", {"cyclic": 2}, {"cyclic": 3}, {"cyclic": 5}, s3, "Q")
