"""Homeomorphism representations and algebra.

Two carriers:

* PartialHomeo -- a prefix-compatible tower of level bijections between two
  closed sets; the exact, level-preserving form in which partial
  homeomorphisms are supplied.
* BlockMapChain -- a mesh-decreasing chain of matched clopen partitions whose
  final stage pairs single full-depth cylinders, i.e. an autohomeomorphism at
  the cube's resolution (a finite Knaster-Reichbach system).  Chains are not
  restricted to level-preserving maps.

Chains are presented in a canonical staging: stage k groups atoms by the pair
(depth-k cell, depth-k cell of the image).  Any atom bijection admits this
staging, and it reproduces the native staging of the extension algorithms.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import InvalidInput, ResolutionInsufficiency, RestrictionError
from .model import (
    UNSET,
    ClopenSet,
    ClosedSet,
    Cube,
    assigned_positions,
    covers,
    expand,
)
from .report import Report


# ---------------------------------------------------------------------------
# Partial homeomorphisms (towers)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PartialHomeo:
    """A tower of level bijections f_n between the level sets of two closed sets.

    Level words are full-width masks assigning exactly the coordinates of
    depth <= n.  Levels run 1..max_depth; the deepest level is the atom map.
    """

    domain: ClosedSet
    codomain: ClosedSet
    levels: tuple[tuple[tuple[str, str], ...], ...]

    @staticmethod
    def build(domain: ClosedSet, codomain: ClosedSet,
              levels: Sequence[Mapping[str, str]]) -> "PartialHomeo":
        cube = domain.cube
        if codomain.cube != cube:
            raise InvalidInput("tower endpoints live on different cubes")
        n_levels = cube.max_depth
        if len(levels) != n_levels:
            raise InvalidInput(f"expected {n_levels} levels, got {len(levels)}")
        packed = []
        prev: dict[str, str] = {}
        for n, lvl in enumerate(levels, start=1):
            want = set(cube.mesh_positions(n))
            for w, v in lvl.items():
                if set(assigned_positions(w)) != want or set(assigned_positions(v)) != want:
                    raise InvalidInput(f"level {n} word of wrong shape: {w!r} -> {v!r}")
            if set(lvl.keys()) != domain.level(n):
                raise InvalidInput(f"level {n} domain does not match the set's level")
            vals = set(lvl.values())
            if vals != codomain.level(n):
                raise InvalidInput(f"level {n} image does not match the codomain's level")
            if len(vals) != len(lvl):
                raise InvalidInput(f"level {n} map is not a bijection")
            if n > 1:
                for w, v in lvl.items():
                    wt = cube.mesh_trunc(w, n - 1)
                    if prev[wt] != cube.mesh_trunc(v, n - 1):
                        raise InvalidInput(
                            f"prefix compatibility fails at level {n}: {w!r}")
            prev = dict(lvl)
            packed.append(tuple(sorted(lvl.items())))
        return PartialHomeo(domain, codomain, tuple(packed))

    @staticmethod
    def from_atom_map(domain: ClosedSet, codomain: ClosedSet,
                      mapping: Mapping[str, str]) -> "PartialHomeo":
        """Build the tower induced by an atom bijection, checking level-wise
        well-definedness and injectivity (witnessed failures)."""
        cube = domain.cube
        if set(mapping.keys()) != domain.atoms:
            raise InvalidInput("atom map keys differ from the domain's atoms")
        if set(mapping.values()) != codomain.atoms:
            raise InvalidInput("atom map values differ from the codomain's atoms")
        levels: list[dict[str, str]] = []
        for n in range(1, cube.max_depth + 1):
            lvl: dict[str, str] = {}
            back: dict[str, str] = {}
            for a, b in mapping.items():
                w, v = cube.mesh_trunc(a, n), cube.mesh_trunc(b, n)
                if lvl.setdefault(w, v) != v:
                    raise RestrictionError(
                        f"level {n} image not well-defined under {w!r}", witness=w)
                if back.setdefault(v, w) != w:
                    raise RestrictionError(
                        f"level {n} map not injective at {v!r}", witness=v)
            levels.append(lvl)
        return PartialHomeo.build(domain, codomain, levels)

    @staticmethod
    def identity(p: ClosedSet) -> "PartialHomeo":
        return PartialHomeo.from_atom_map(p, p, {a: a for a in p.atoms})

    @staticmethod
    def empty(cube: Cube) -> "PartialHomeo":
        e = ClosedSet.empty(cube)
        return PartialHomeo.build(e, e, [{} for _ in range(cube.max_depth)])

    @property
    def cube(self) -> Cube:
        return self.domain.cube

    @property
    def is_empty(self) -> bool:
        return self.domain.is_empty

    def level_map(self, n: int) -> dict[str, str]:
        return dict(self.levels[n - 1])

    @cached_property
    def atom_map(self) -> dict[str, str]:
        if not self.levels:
            return {}
        return dict(self.levels[-1])

    def inverse(self) -> "PartialHomeo":
        swapped = [tuple(sorted((v, w) for w, v in lvl)) for lvl in self.levels]
        return PartialHomeo(self.codomain, self.domain, tuple(swapped))


# ---------------------------------------------------------------------------
# Matchings and chains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Matching:
    """Matched clopen partitions of the two supports; all pieces non-empty."""

    pairs: tuple[tuple[ClopenSet, ClopenSet], ...]


@dataclass(frozen=True)
class BlockMapChain:
    """A refinement chain of matchings denoting an atom bijection.

    Full chains have both supports equal to the whole cube; relative chains
    (from/onto proper clopen sets) carry their supports explicitly.
    """

    cube: Cube
    domain_support: ClopenSet
    codomain_support: ClopenSet
    stages: tuple[Matching, ...]
    pairs_map: tuple[tuple[str, str], ...]

    @cached_property
    def mapping(self) -> dict[str, str]:
        return dict(self.pairs_map)

    @cached_property
    def inverse_mapping(self) -> dict[str, str]:
        return {v: k for k, v in self.pairs_map}

    def apply(self, atom: str) -> str:
        return self.mapping[atom]

    @property
    def is_relative(self) -> bool:
        return not self.domain_support.is_full or not self.codomain_support.is_full


def chain_from_mapping(cube: Cube, mapping: Mapping[str, str],
                       domain_support: ClopenSet | None = None,
                       codomain_support: ClopenSet | None = None) -> BlockMapChain:
    """Canonical chain for an atom bijection (stages by cell-pair grouping)."""
    if cube.width == 0:
        raise InvalidInput("chains need at least one coordinate")
    if not mapping:
        raise InvalidInput("chains need non-empty supports")
    dom = domain_support or ClopenSet(cube, frozenset(mapping.keys()))
    cod = codomain_support or ClopenSet(cube, frozenset(mapping.values()))
    if set(mapping.keys()) != dom.atoms:
        raise InvalidInput("mapping keys differ from the domain support")
    vals = set(mapping.values())
    if len(vals) != len(mapping) or vals != cod.atoms:
        raise InvalidInput("mapping is not a bijection onto the codomain support")
    stages = []
    for k in range(1, cube.max_depth + 1):
        groups: dict[tuple[str, str], list[str]] = {}
        for a, b in mapping.items():
            groups.setdefault((cube.mesh_trunc(a, k), cube.mesh_trunc(b, k)), []).append(a)
        pairs = []
        for (_, _), atoms in groups.items():
            u = ClopenSet(cube, frozenset(atoms))
            v = ClopenSet(cube, frozenset(mapping[a] for a in atoms))
            pairs.append((u, v))
        pairs.sort(key=lambda uv: min(uv[0].atoms))
        stages.append(Matching(tuple(pairs)))
    return BlockMapChain(cube, dom, cod, tuple(stages), tuple(sorted(mapping.items())))


def identity_chain(cube: Cube) -> BlockMapChain:
    return chain_from_mapping(cube, {a: a for a in cube.atoms()})


def validate_chain(h: BlockMapChain) -> list[tuple[str, str]]:
    """All violated chain invariants, each with a witness.  Empty list = valid."""
    cube = h.cube
    bad: list[tuple[str, str]] = []
    if not h.stages:
        return [("stages", "chain has no stages")]
    for k, stage in enumerate(h.stages, start=1):
        seen_u: set[str] = set()
        seen_v: set[str] = set()
        for u, v in stage.pairs:
            if u.is_empty or v.is_empty:
                bad.append((f"stage {k} non-empty", "empty piece"))
                continue
            if seen_u & u.atoms or seen_v & v.atoms:
                bad.append((f"stage {k} disjoint", min(u.atoms)))
            seen_u |= u.atoms
            seen_v |= v.atoms
            if len({cube.mesh_trunc(a, k) for a in u.atoms}) != 1:
                bad.append((f"stage {k} mesh", min(u.atoms)))
            if len({cube.mesh_trunc(a, k) for a in v.atoms}) != 1:
                bad.append((f"stage {k} mesh", min(v.atoms)))
        if seen_u != h.domain_support.atoms:
            bad.append((f"stage {k} partition", "domain support not covered exactly"))
        if seen_v != h.codomain_support.atoms:
            bad.append((f"stage {k} partition", "codomain support not covered exactly"))
    for k in range(1, len(h.stages)):
        parents = h.stages[k - 1].pairs
        for u, v in h.stages[k].pairs:
            owners = [i for i, (pu, pv) in enumerate(parents)
                      if u.atoms <= pu.atoms and v.atoms <= pv.atoms]
            if len(owners) != 1:
                bad.append((f"stage {k + 1} refinement", min(u.atoms)))
    final = h.stages[-1]
    mapping: dict[str, str] = {}
    for u, v in final.pairs:
        if len(u.atoms) != 1 or len(v.atoms) != 1:
            bad.append(("final stage atomic", min(u.atoms)))
        else:
            mapping[next(iter(u.atoms))] = next(iter(v.atoms))
    if not bad and mapping != h.mapping:
        bad.append(("final stage bijection", "stored mapping disagrees with final stage"))
    if not bad:
        for k, stage in enumerate(h.stages, start=1):
            for u, v in stage.pairs:
                if {h.mapping[a] for a in u.atoms} != v.atoms:
                    bad.append((f"stage {k} coherence", min(u.atoms)))
    return bad


# ---------------------------------------------------------------------------
# Chain algebra
# ---------------------------------------------------------------------------

def compose(g: BlockMapChain, h: BlockMapChain) -> BlockMapChain:
    """The composite g o h, restaged from the composed atom bijection."""
    if g.cube != h.cube:
        raise InvalidInput("cube mismatch in composition")
    if h.codomain_support != g.domain_support:
        raise InvalidInput("codomain support of h differs from domain support of g")
    mapping = {a: g.mapping[b] for a, b in h.mapping.items()}
    return chain_from_mapping(g.cube, mapping, h.domain_support, g.codomain_support)


def invert(h: BlockMapChain) -> BlockMapChain:
    """Swap every pair and re-sort; an involution on the nose."""
    stages = []
    for stage in h.stages:
        pairs = [(v, u) for u, v in stage.pairs]
        pairs.sort(key=lambda uv: min(uv[0].atoms))
        stages.append(Matching(tuple(pairs)))
    inv = tuple(sorted((v, k) for k, v in h.pairs_map))
    return BlockMapChain(h.cube, h.codomain_support, h.domain_support,
                         tuple(stages), inv)


def restrict(h: BlockMapChain, p: ClosedSet) -> PartialHomeo:
    """The level-bijection tower induced by h on P, onto its image h(P).

    Fails with the offending cylinder when h does not respect P's tree
    structure level-wise.
    """
    if p.cube != h.cube:
        raise InvalidInput("set and chain live on different cubes")
    if not p.atoms <= h.domain_support.atoms:
        raise InvalidInput("set is not contained in the chain's domain support")
    image = ClosedSet(p.cube, frozenset(h.mapping[a] for a in p.atoms))
    return PartialHomeo.from_atom_map(p, image, {a: h.mapping[a] for a in p.atoms})


def verify_extension(h: BlockMapChain, f: PartialHomeo) -> Report:
    """Check that h is a valid chain extending f; failures carry witnesses."""
    t0 = time.perf_counter()
    report = Report()
    for check, witness in validate_chain(h):
        report.fail(check, witness)
    if f.cube != h.cube:
        report.fail("cube", "tower and chain live on different cubes")
        report.timing = time.perf_counter() - t0
        return report
    try:
        induced = restrict(h, f.domain)
    except (RestrictionError, InvalidInput) as e:
        report.fail("restriction", getattr(e, "witness", None) or str(e))
        report.timing = time.perf_counter() - t0
        return report
    if induced.codomain != f.codomain:
        extra = induced.codomain.atoms ^ f.codomain.atoms
        report.fail("image", f"image differs from codomain at {min(extra)!r}")
    else:
        for n in range(1, f.cube.max_depth + 1):
            got, want = induced.level_map(n), f.level_map(n)
            for w in sorted(want):
                if got[w] != want[w]:
                    report.fail("extension",
                                f"level {n}: {w!r} -> {got[w]!r}, expected {want[w]!r}")
                    break
            if not report.ok:
                break
    report.timing = time.perf_counter() - t0
    return report


# ---------------------------------------------------------------------------
# Canonical clopen homeomorphisms and retractions
# ---------------------------------------------------------------------------

def clopen_homeo(u: ClopenSet, v: ClopenSet) -> BlockMapChain:
    """Canonical relative chain from U onto V.

    Both sides descend independently through forced coordinates to their next
    genuine split (mesh order); non-empty halves pair in bit order.  When one
    side reaches a single full-depth cylinder while the other still splits,
    the matching is forced below the depth budget: resolution insufficiency.
    """
    if u.cube != v.cube:
        raise InvalidInput("clopen sets live on different cubes")
    if u.is_empty or v.is_empty:
        raise InvalidInput("clopen_homeo needs non-empty sets")
    cube = u.cube
    mapping: dict[str, str] = {}

    def split_pos(atoms: frozenset[str]) -> int | None:
        for p in cube.mesh_order:
            bits = {a[p] for a in atoms}
            if len(bits) == 2:
                return p
        return None

    def rec(xs: frozenset[str], ys: frozenset[str]) -> None:
        px, py = split_pos(xs), split_pos(ys)
        if px is None and py is None:
            mapping[next(iter(xs))] = next(iter(ys))
            return
        if px is None or py is None:
            raise ResolutionInsufficiency(
                "pieces cannot biject: one side is a single depth-budget cylinder "
                "while the other still splits")
        for b in "01":
            rec(frozenset(a for a in xs if a[px] == b),
                frozenset(a for a in ys if a[py] == b))

    rec(u.atoms, v.atoms)
    return chain_from_mapping(cube, mapping, u, v)


def clopen_retraction(q: ClosedSet) -> dict[str, str]:
    """Retraction of the cube's atoms onto Q's atoms.

    Identity on Q; elsewhere, descend in mesh order keeping the longest
    realizable run of the input's bits, falling back to the 0-branch first.
    """
    if q.is_empty:
        raise InvalidInput("cannot retract onto the empty set")
    cube = q.cube
    out: dict[str, str] = {}
    for w in cube.atoms():
        if w in q.atoms:
            out[w] = w
            continue
        chars = [UNSET] * cube.width
        for p in cube.mesh_order:
            for bit in (w[p], "0", "1"):
                chars[p] = bit
                if q.meets("".join(chars)):
                    break
        out[w] = "".join(chars)
    return out


def project_tower(f: PartialHomeo, coords: Sequence[str]) -> PartialHomeo:
    """Tower induced on a sub-cube when f factors through those coordinates.

    Raises RestrictionError (with the offending word) when the projection of
    the image depends on dropped coordinates, i.e. f is not compatible with
    the sub-coordinate set.
    """
    from .model import project  # local import to keep module load order simple

    p_sub = project(f.domain, coords)
    k_sub = project(f.codomain, coords)
    cube = f.cube
    pos = sorted(cube.positions_of(coords))
    sub_map: dict[str, str] = {}
    for a, b in f.atom_map.items():
        sa = "".join(a[i] for i in pos)
        sb = "".join(b[i] for i in pos)
        if sub_map.setdefault(sa, sb) != sb:
            raise RestrictionError(
                f"map does not factor through {tuple(coords)!r} at {sa!r}", witness=sa)
    return PartialHomeo.from_atom_map(p_sub, k_sub, sub_map)
