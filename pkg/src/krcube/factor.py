"""Coordinate-dependence analysis of total maps on finite cubes.

Dependence detection is the single-coordinate flip test, which for total maps
on products of two-point factors yields the minimal factorization set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import InvalidInput
from .model import ClosedSet, Cube, project


@dataclass(frozen=True)
class ProductMap:
    """Total map between cube atom sets, tabulated explicitly."""

    domain_cube: Cube
    codomain_cube: Cube
    table: tuple[tuple[str, str], ...]

    @staticmethod
    def build(domain_cube: Cube, codomain_cube: Cube,
              table: Mapping[str, str]) -> "ProductMap":
        atoms = frozenset(domain_cube.atoms())
        if set(table.keys()) != atoms:
            raise InvalidInput("table is not total on the domain cube")
        for v in table.values():
            if len(v) != codomain_cube.width or any(c not in "01" for c in v):
                raise InvalidInput(f"bad output word {v!r}")
        return ProductMap(domain_cube, codomain_cube, tuple(sorted(table.items())))

    @staticmethod
    def identity(cube: Cube) -> "ProductMap":
        return ProductMap.build(cube, cube, {a: a for a in cube.atoms()})

    @cached_property
    def mapping(self) -> dict[str, str]:
        return dict(self.table)

    def apply(self, word: str) -> str:
        return self.mapping[word]

    @cached_property
    def is_bijection(self) -> bool:
        return (self.domain_cube.width == self.codomain_cube.width
                and len(set(self.mapping.values())) == len(self.table))

    def inverse(self) -> "ProductMap":
        if not self.is_bijection:
            raise InvalidInput("map is not a bijection")
        return ProductMap.build(self.codomain_cube, self.domain_cube,
                                {v: k for k, v in self.table})


@dataclass(frozen=True)
class AdmissibleSet:
    """A coordinate set through which a homeomorphism factors, with the
    induced map on the sub-cube."""

    coords: tuple[str, ...]
    induced: ProductMap


def map_support(g: ProductMap) -> tuple[str, ...]:
    """Minimal D with pi_D(x) = pi_D(y) implying g(x) = g(y) (flip test)."""
    cube = g.domain_cube
    support = []
    for i, coord in enumerate(cube.coords):
        for x, gx in g.table:
            flipped = x[:i] + ("1" if x[i] == "0" else "0") + x[i + 1:]
            if g.mapping[flipped] != gx:
                support.append(coord)
                break
    return tuple(support)


def _component(f: ProductMap, coords: Sequence[str]) -> ProductMap:
    """pi_coords o f, as a map into the sub-cube."""
    sub = f.codomain_cube.subcube(coords)
    pos = sorted(f.codomain_cube.positions_of(coords))
    table = {x: "".join(y[i] for i in pos) for x, y in f.table}
    return ProductMap.build(f.domain_cube, sub, table)


def induced_map(f: ProductMap, coords: Sequence[str]) -> ProductMap | None:
    """The map f_B on the sub-cube when f factors through B, else None."""
    cube = f.domain_cube
    comp = _component(f, coords)
    pos = sorted(cube.positions_of(coords))
    table: dict[str, str] = {}
    for x, y in comp.table:
        key = "".join(x[i] for i in pos)
        if table.setdefault(key, y) != y:
            return None
    sub = cube.subcube(coords)
    return ProductMap.build(sub, comp.codomain_cube, table)


def is_admissible(f: ProductMap, coords: Sequence[str]) -> AdmissibleSet | None:
    """Check pi_B o f = f_B o pi_B extensionally; None when it fails."""
    ind = induced_map(f, coords)
    if ind is None:
        return None
    ordered = tuple(c for c in f.domain_cube.coords if c in set(coords))
    return AdmissibleSet(ordered, ind)


def admissible_closure(f: ProductMap, seed: Iterable[str]) -> AdmissibleSet:
    """Least B containing the seed with B containing the supports of
    pi_B o f and pi_B o f^{-1}; returns B with the induced bijection."""
    if f.domain_cube != f.codomain_cube:
        raise InvalidInput("admissible closure needs an autohomeomorphism")
    if not f.is_bijection:
        raise InvalidInput("map is not a bijection")
    cube = f.domain_cube
    cube.positions_of(tuple(seed))
    g = f.inverse()
    b = set(seed)
    while True:
        grown = set(b)
        if b:
            grown |= set(map_support(_component(f, _ordered(cube, b))))
            grown |= set(map_support(_component(g, _ordered(cube, b))))
        if grown == b:
            break
        b = grown
    result = is_admissible(f, _ordered(cube, b))
    if result is None:
        raise InvalidInput("closure failed to induce a map; inputs corrupted")
    return result


def _ordered(cube: Cube, coords: Iterable[str]) -> tuple[str, ...]:
    chosen = set(coords)
    return tuple(c for c in cube.coords if c in chosen)


def union_admissible(f: ProductMap, b1: AdmissibleSet, b2: AdmissibleSet) -> AdmissibleSet:
    """Union of two f-admissible sets, re-verified."""
    for b in (b1, b2):
        check = is_admissible(f, b.coords)
        if check is None or check.induced != b.induced:
            raise InvalidInput(f"input set {b.coords!r} is not admissible for the map")
    merged = is_admissible(f, _ordered(f.domain_cube, set(b1.coords) | set(b2.coords)))
    if merged is None:
        raise InvalidInput("union is not admissible; inputs corrupted")
    return merged


@dataclass(frozen=True)
class DefectBlocks:
    """Disjoint coordinate sets with proper projections; ``exhausted`` set
    when fewer than requested exist at the given size."""

    blocks: tuple[tuple[str, ...], ...]
    exhausted: bool


def find_defect_blocks(p: ClosedSet, avoid: Iterable[str], count: int,
                       size: int) -> DefectBlocks:
    """Greedily pick up to ``count`` disjoint blocks of size <= ``size`` in
    the complement of ``avoid`` whose projections of P are proper.

    Candidates are scanned by (size, position order), smallest first.
    """
    if p.is_empty:
        raise InvalidInput("defect blocks of the empty set are undefined")
    if size < 1 or count < 0:
        raise InvalidInput("count must be >= 0 and size >= 1")
    cube = p.cube
    cube.positions_of(tuple(avoid))
    pool = [c for c in cube.coords if c not in set(avoid)]
    found: list[tuple[str, ...]] = []
    while len(found) < count:
        hit = None
        for s in range(1, size + 1):
            for combo in itertools.combinations(pool, s):
                if not project(p, combo).is_full:
                    hit = combo
                    break
            if hit:
                break
        if hit is None:
            return DefectBlocks(tuple(found), True)
        found.append(hit)
        pool = [c for c in pool if c not in set(hit)]
    return DefectBlocks(tuple(found), False)


def common_admissible_chain(cube: Cube, maps: Sequence[ProductMap],
                            seeds: Sequence[Iterable[str]]) -> tuple[tuple[str, ...], ...]:
    """Increasing chain of coordinate sets covering the cube, each admissible
    for every map and every inverse; built by iterating the closure over the
    seeds in order.  A final entry covering leftover coordinates is appended
    when the seeds do not already cover the cube."""
    for f in maps:
        if f.domain_cube != f.codomain_cube or f.domain_cube != cube:
            raise InvalidInput("maps must be autohomeomorphisms of the given cube")
        if not f.is_bijection:
            raise InvalidInput("map is not a bijection")
    chain: list[tuple[str, ...]] = []
    current: set[str] = set()
    for seed in seeds:
        cube.positions_of(tuple(seed))
        current |= set(seed)
        while True:
            before = set(current)
            for f in maps:
                current |= set(admissible_closure(f, _ordered(cube, current)).coords)
            if current == before:
                break
        chain.append(_ordered(cube, current))
    if set(cube.coords) != current:
        chain.append(tuple(cube.coords))
    return tuple(chain)
