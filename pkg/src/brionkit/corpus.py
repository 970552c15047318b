"""Bundled test instances: small polytopes, alternative lattices and
functionals that are constant on some faces."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction as F

from .exact_linalg import Lattice
from .polytope_core import Polytope
from .xi_structure import Xi


@dataclass(frozen=True)
class Instance:
    name: str
    polytope: Polytope
    degenerate_xis: tuple = field(default=())

    @property
    def dim(self) -> int:
        return self.polytope.ambient_dim


def _xi(re, im2pi=None):
    return Xi.of(re, im2pi if im2pi is not None else [0] * len(re))


PENTAGON = ((0, 0), (2, -1), (3, 1), (1, 3), (0, 2))
SKEW_TRIANGLE = ((0, 0), (0, 3), (2, 1))


def corpus() -> list[Instance]:
    """Fresh list of the bundled instances (cheap to rebuild)."""
    P = Polytope.from_vertices
    return [
        Instance("interval", P([(0,), (1,)]), (_xi([0]),)),
        Instance("interval_even", P([(0,), (2,)]), (_xi([0], [F(1, 2)]),)),
        Instance("interval_rational", P([(F(-1, 3),), (F(5, 2),)]), (_xi([0], [F(1, 3)]),)),
        Instance("unit_square", P([(0, 0), (1, 0), (0, 1), (1, 1)]), (_xi([0, 1]),)),
        Instance("square_2", P([(0, 0), (2, 0), (0, 2), (2, 2)]),
                 (_xi([0, -1]), _xi([1, 0], [0, F(1, 2)]))),
        Instance("pentagon", P(PENTAGON), (_xi([1, 0]), _xi([0, 0], [F(1, 3), F(1, 3)]))),
        Instance("skew_triangle", P(SKEW_TRIANGLE), (_xi([1, 0]),)),
        Instance("standard_triangle", P([(0, 0), (1, 0), (0, 1)]), (_xi([1, 1]),)),
        Instance("triangle_2", P([(0, 0), (2, 0), (0, 2)]), (_xi([1, 1]), _xi([0, 0], [F(1, 2), 0]))),
        Instance("half_triangle", P([(0, 0), (F(1, 2), 0), (0, F(1, 2))]), (_xi([0, 1]),)),
        Instance("rational_triangle", P([(0, 0), (F(3, 2), 0), (0, 1)]), (_xi([0, 1]),)),
        Instance("simplex_3d", P([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]), (_xi([1, 1, 1]),)),
        Instance("cube_3d", P([(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)]),
                 (_xi([1, 0, 0]),)),
    ]


def by_name(name: str) -> Instance:
    for inst in corpus():
        if inst.name == name:
            return inst
    raise KeyError(name)


def nonstandard_lattice(n: int) -> Lattice:
    """A full-rank lattice different from Z^n (index 2, or 1/2 Z in 1D)."""
    if n == 1:
        return Lattice(1, ((F(1, 2),),))
    if n == 2:
        return Lattice(2, ((1, 1), (1, -1)))
    basis = [tuple(int(i == j or j == (i + 1) % n) for j in range(n)) for i in range(n)]
    return Lattice(n, tuple(basis))


def generic_xis(n: int, count: int = 5, seed: int = 0, complex_part: bool = True) -> list[Xi]:
    """Pseudo-random rational functionals (generic with probability one)."""
    rng = random.Random(1000 + seed)
    out = []
    for _ in range(count):
        re = [F(rng.randint(-20, 20), rng.randint(1, 7)) for _ in range(n)]
        im = [F(rng.randint(-9, 9), rng.randint(7, 19)) for _ in range(n)] if complex_part else [0] * n
        out.append(Xi.of(re, im))
    return out


__all__ = ["Instance", "corpus", "by_name", "nonstandard_lattice", "generic_xis", "PENTAGON",
           "SKEW_TRIANGLE"]
