from __future__ import annotations

import random
from fractions import Fraction

import pytest

from okcf.field import FieldSpec, KElement


@pytest.fixture(scope="session")
def k5() -> FieldSpec:
    return FieldSpec(5)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240517)


def random_k(rng: random.Random, spec: FieldSpec, bound: int = 8,
             integral: bool = True, nonzero: bool = False) -> KElement:
    while True:
        if integral:
            x = spec.element(rng.randint(-bound, bound), rng.randint(-bound, bound))
        else:
            x = spec.element(
                Fraction(rng.randint(-bound, bound), rng.randint(1, 4)),
                Fraction(rng.randint(-bound, bound), rng.randint(1, 4)),
            )
        if not nonzero or not x.is_zero:
            return x


@pytest.fixture
def rand_k(k5):
    def make(rng: random.Random, bound: int = 8, integral: bool = True,
             nonzero: bool = False) -> KElement:
        return random_k(rng, k5, bound, integral, nonzero)

    return make
