"""Coordinate blocks, cylinders, clopen algebra, and closed sets.

A cube is an ordered list of named blocks; each block is an ordered list of
binary coordinates, and a coordinate's depth is its 1-based index within its
block.  All sets are computed exactly at the cube's resolution: a "point" is a
total assignment, written as a word over {0,1} in declared order (block
order, then coordinate order within the block).  Partial assignments
(cylinders, level words) are the same strings with '_' at unassigned
positions.

Two coordinate orders coexist and must not be confused:

* the declared order -- used for word layout, canonical forms, lexicographic
  tie-breaks;
* the mesh order -- positions sorted by (depth, block index); a set has mesh
  <= 2^-k iff it lies in a cylinder assigning every coordinate of depth <= k.

For a single block the two coincide.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import InvalidInput

UNSET = "_"


# ---------------------------------------------------------------------------
# Coordinate structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Block:
    """A named Cantor block: ordered binary coordinates, depth budget = len."""

    ident: str
    coords: tuple[str, ...]

    def __post_init__(self):
        if not self.coords:
            raise InvalidInput(f"block {self.ident!r} has no coordinates")
        if len(set(self.coords)) != len(self.coords):
            raise InvalidInput(f"block {self.ident!r} repeats a coordinate")

    @property
    def depth(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class Cube:
    """An ordered product of blocks.

    The block order is total; prefixes of it play the role of an increasing
    chain of index sets.  The degenerate cube with no blocks has the single
    point "" and is allowed as a projection target.
    """

    blocks: tuple[Block, ...]

    def __post_init__(self):
        ids = [b.ident for b in self.blocks]
        if len(set(ids)) != len(ids):
            raise InvalidInput("duplicate block ids")
        coords = [c for b in self.blocks for c in b.coords]
        if len(set(coords)) != len(coords):
            raise InvalidInput("coordinate repeated across blocks")

    @cached_property
    def coords(self) -> tuple[str, ...]:
        return tuple(c for b in self.blocks for c in b.coords)

    @cached_property
    def width(self) -> int:
        return len(self.coords)

    @cached_property
    def coord_pos(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.coords)}

    @cached_property
    def depth_at(self) -> tuple[int, ...]:
        """Depth (1-based index within its block) of each position."""
        out = []
        for b in self.blocks:
            out.extend(range(1, len(b.coords) + 1))
        return tuple(out)

    @cached_property
    def block_at(self) -> tuple[int, ...]:
        out = []
        for i, b in enumerate(self.blocks):
            out.extend([i] * len(b.coords))
        return tuple(out)

    @cached_property
    def max_depth(self) -> int:
        return max((b.depth for b in self.blocks), default=0)

    @cached_property
    def mesh_order(self) -> tuple[int, ...]:
        """Positions sorted by (depth, block index)."""
        return tuple(sorted(range(self.width),
                            key=lambda i: (self.depth_at[i], self.block_at[i])))

    def mesh_positions(self, n: int) -> tuple[int, ...]:
        """Positions of depth <= n, in declared order."""
        return tuple(i for i in range(self.width) if self.depth_at[i] <= n)

    def mesh_trunc(self, word: str, n: int) -> str:
        keep = set(self.mesh_positions(n))
        return "".join(c if i in keep else UNSET for i, c in enumerate(word))

    def mesh_key(self, word: str) -> str:
        """Word re-read in mesh order; sorting atoms by this key is mesh-lex."""
        return "".join(word[i] for i in self.mesh_order)

    def atoms(self) -> Iterator[str]:
        """All total assignments in declared lexicographic order."""
        for bits in itertools.product("01", repeat=self.width):
            yield "".join(bits)

    @cached_property
    def n_atoms(self) -> int:
        return 1 << self.width

    def block(self, ident: str) -> Block:
        for b in self.blocks:
            if b.ident == ident:
                return b
        raise InvalidInput(f"no block named {ident!r}")

    def prefix(self, j: int) -> "Cube":
        """Sub-cube of the first j blocks."""
        return Cube(self.blocks[:j])

    def positions_of(self, coords: Sequence[str]) -> tuple[int, ...]:
        try:
            return tuple(self.coord_pos[c] for c in coords)
        except KeyError as e:
            raise InvalidInput(f"unknown coordinate {e.args[0]!r}") from None

    def subcube(self, coords: Sequence[str]) -> "Cube":
        """Sub-cube on a subset of coordinates, preserving declared order."""
        chosen = set(coords)
        unknown = chosen - set(self.coords)
        if unknown:
            raise InvalidInput(f"unknown coordinate {sorted(unknown)[0]!r}")
        blocks = []
        for b in self.blocks:
            kept = tuple(c for c in b.coords if c in chosen)
            if kept:
                blocks.append(Block(b.ident, kept))
        return Cube(tuple(blocks))

    def block_union_coords(self, idents: Iterable[str]) -> tuple[str, ...]:
        wanted = set(idents)
        known = {b.ident for b in self.blocks}
        missing = wanted - known
        if missing:
            raise InvalidInput(f"no block named {sorted(missing)[0]!r}")
        return tuple(c for b in self.blocks if b.ident in wanted for c in b.coords)


def single_block_cube(n: int, ident: str = "B1", prefix: str = "c") -> Cube:
    """Convenience constructor for one block of depth n."""
    return Cube((Block(ident, tuple(f"{prefix}{i}" for i in range(1, n + 1))),))


# ---------------------------------------------------------------------------
# Masked words (partial assignments)
# ---------------------------------------------------------------------------

def meet(a: str, b: str) -> str | None:
    """Conjunction of two masks, or None if they conflict."""
    out = []
    for x, y in zip(a, b):
        if x == UNSET:
            out.append(y)
        elif y == UNSET or x == y:
            out.append(x)
        else:
            return None
    return "".join(out)


def covers(mask: str, word: str) -> bool:
    """True when every assigned position of ``mask`` agrees with ``word``."""
    return all(m == UNSET or m == w for m, w in zip(mask, word))


def refines(a: str, b: str) -> bool:
    """True when mask ``a`` assigns everything ``b`` does, compatibly."""
    return all(y == UNSET or x == y for x, y in zip(a, b))


def expand(mask: str) -> Iterator[str]:
    """All total words covered by a mask."""
    free = [i for i, c in enumerate(mask) if c == UNSET]
    chars = list(mask)
    for bits in itertools.product("01", repeat=len(free)):
        for i, b in zip(free, bits):
            chars[i] = b
        yield "".join(chars)


def assigned_positions(mask: str) -> tuple[int, ...]:
    return tuple(i for i, c in enumerate(mask) if c != UNSET)


def transplant(atom: str, src: str, dst: str) -> str:
    """Move an atom of cylinder ``src`` to cylinder ``dst``, keeping the suffix.

    Requires the two cylinders to leave the same positions free.
    """
    out = []
    for i, (s, d) in enumerate(zip(src, dst)):
        if (s == UNSET) != (d == UNSET):
            raise InvalidInput("transplant between cylinders of different shape")
        out.append(atom[i] if d == UNSET else d)
    return "".join(out)


def mask_from_assignment(cube: Cube, assignment: dict[str, int]) -> str:
    chars = [UNSET] * cube.width
    for coord, bit in assignment.items():
        if bit not in (0, 1):
            raise InvalidInput(f"coordinate {coord!r} assigned non-bit {bit!r}")
        chars[cube.positions_of([coord])[0]] = str(bit)
    return "".join(chars)


def mask_to_assignment(cube: Cube, mask: str) -> dict[str, int]:
    return {cube.coords[i]: int(mask[i]) for i in assigned_positions(mask)}


@dataclass(frozen=True)
class Point:
    """A total assignment on a cube."""

    cube: Cube
    word: str

    def __post_init__(self):
        if len(self.word) != self.cube.width or any(c not in "01" for c in self.word):
            raise InvalidInput(f"not a total assignment: {self.word!r}")

    @property
    def assignment(self) -> dict[str, int]:
        return {c: int(b) for c, b in zip(self.cube.coords, self.word)}

    def flip(self, coord: str) -> "Point":
        i = self.cube.positions_of([coord])[0]
        w = self.word
        return Point(self.cube, w[:i] + ("1" if w[i] == "0" else "0") + w[i + 1:])


# ---------------------------------------------------------------------------
# Clopen sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClopenSet:
    """A clopen subset of a cube, canonically a set of disjoint cylinders.

    Extensional equality: two ClopenSets are equal iff their atom sets are,
    and the canonical cylinder decomposition is unique per extensional set.
    """

    cube: Cube
    atoms: frozenset[str]

    @staticmethod
    def from_atoms(cube: Cube, atoms: Iterable[str]) -> "ClopenSet":
        atoms = frozenset(atoms)
        for a in atoms:
            if len(a) != cube.width or any(c not in "01" for c in a):
                raise InvalidInput(f"bad atom {a!r} for width {cube.width}")
        return ClopenSet(cube, atoms)

    @staticmethod
    def from_cylinders(cube: Cube, masks: Iterable[str]) -> "ClopenSet":
        atoms: set[str] = set()
        for m in masks:
            if len(m) != cube.width or any(c not in "01_" for c in m):
                raise InvalidInput(f"bad cylinder {m!r} for width {cube.width}")
            atoms.update(expand(m))
        return ClopenSet(cube, frozenset(atoms))

    @staticmethod
    def full(cube: Cube) -> "ClopenSet":
        return ClopenSet(cube, frozenset(cube.atoms()))

    @staticmethod
    def empty(cube: Cube) -> "ClopenSet":
        return ClopenSet(cube, frozenset())

    @cached_property
    def cylinders(self) -> tuple[str, ...]:
        """Canonical disjoint decomposition.

        Computed by splitting on coordinates in declared order and merging a
        sibling pair whenever both halves decompose identically; greedy
        pairwise sibling merging is order-dependent, this scheme is not.
        Sorted with '0' < '1' < '_'.
        """
        w = self.cube.width

        def rec(suffixes: frozenset[str], i: int) -> frozenset[str]:
            if not suffixes:
                return frozenset()
            if i == w:
                return frozenset({""})
            s0 = frozenset(s[1:] for s in suffixes if s[0] == "0")
            s1 = frozenset(s[1:] for s in suffixes if s[0] == "1")
            c0 = rec(s0, i + 1)
            c1 = rec(s1, i + 1)
            both = c0 & c1
            return frozenset(
                {UNSET + y for y in both}
                | {"0" + y for y in c0 - both}
                | {"1" + y for y in c1 - both}
            )

        return tuple(sorted(rec(self.atoms, 0)))

    @property
    def is_empty(self) -> bool:
        return not self.atoms

    @property
    def is_full(self) -> bool:
        return len(self.atoms) == self.cube.n_atoms

    def __contains__(self, atom: str) -> bool:
        return atom in self.atoms

    def union(self, other: "ClopenSet") -> "ClopenSet":
        self._same_cube(other)
        return ClopenSet(self.cube, self.atoms | other.atoms)

    def intersection(self, other: "ClopenSet") -> "ClopenSet":
        self._same_cube(other)
        return ClopenSet(self.cube, self.atoms & other.atoms)

    def difference(self, other: "ClopenSet") -> "ClopenSet":
        self._same_cube(other)
        return ClopenSet(self.cube, self.atoms - other.atoms)

    def complement(self) -> "ClopenSet":
        return ClopenSet(self.cube, frozenset(self.cube.atoms()) - self.atoms)

    def issubset(self, other: "ClopenSet") -> bool:
        self._same_cube(other)
        return self.atoms <= other.atoms

    def _same_cube(self, other: "ClopenSet") -> None:
        if self.cube != other.cube:
            raise InvalidInput("clopen sets live on different cubes")


# ---------------------------------------------------------------------------
# Safety automata and closed sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SafetyAutomaton:
    """Deterministic partial automaton on labels {0,1}.

    Its infinite runs' label sequences form a closed subset of the sequence
    space; bits are read in the owning cube's declared coordinate order.
    Construction prunes nodes that are unreachable or admit no infinite
    continuation, so every surviving node lies on an infinite path.
    """

    nodes: tuple[int, ...]
    initial: int | None
    edges: tuple[tuple[int, int, int], ...]  # (from, label, to)

    @staticmethod
    def build(nodes: Iterable[int], initial: int | None,
              edges: Iterable[tuple[int, int, int]]) -> "SafetyAutomaton":
        nodes = list(dict.fromkeys(nodes))
        edges = list(edges)
        if initial is None:
            if nodes or edges:
                raise InvalidInput("empty automaton must have no nodes or edges")
            return SafetyAutomaton((), None, ())
        node_set = set(nodes)
        if initial not in node_set:
            raise InvalidInput(f"initial node {initial} not among nodes")
        trans: dict[tuple[int, int], int] = {}
        for f, lbl, t in edges:
            if f not in node_set or t not in node_set or lbl not in (0, 1):
                raise InvalidInput(f"bad edge {(f, lbl, t)}")
            if (f, lbl) in trans:
                raise InvalidInput(f"nondeterministic on node {f}, label {lbl}")
            trans[(f, lbl)] = t
        # live = greatest fixpoint of "has an edge into a live node"
        live = set(node_set)
        changed = True
        while changed:
            changed = False
            for q in list(live):
                if not any((q, b) in trans and trans[(q, b)] in live for b in (0, 1)):
                    live.discard(q)
                    changed = True
        if initial not in live:
            raise InvalidInput(
                "automaton denotes the empty set; use the explicit empty form")
        reach = {initial}
        frontier = [initial]
        while frontier:
            q = frontier.pop()
            for b in (0, 1):
                t = trans.get((q, b))
                if t is not None and t in live and t not in reach:
                    reach.add(t)
                    frontier.append(t)
        keep = sorted(reach)
        kept_edges = tuple(sorted(
            (f, lbl, t) for (f, lbl), t in trans.items()
            if f in reach and t in reach and t in live))
        return SafetyAutomaton(tuple(keep), initial, kept_edges)

    @staticmethod
    def empty() -> "SafetyAutomaton":
        return SafetyAutomaton((), None, ())

    @cached_property
    def transition(self) -> dict[tuple[int, int], int]:
        return {(f, lbl): t for f, lbl, t in self.edges}

    @property
    def is_empty(self) -> bool:
        return self.initial is None

    def run(self, word: str) -> int | None:
        """State after reading ``word``, or None if the run dies."""
        q = self.initial
        for c in word:
            if q is None:
                return None
            q = self.transition.get((q, int(c)))
        return q

    def unroll(self, depth: int) -> frozenset[str]:
        """Label sequences of length ``depth`` along live paths."""
        if self.initial is None:
            return frozenset()
        level = {self.initial: {""}}
        for _ in range(depth):
            nxt: dict[int, set[str]] = {}
            for q, words in level.items():
                for b in (0, 1):
                    t = self.transition.get((q, b))
                    if t is not None:
                        nxt.setdefault(t, set()).update(w + str(b) for w in words)
            level = nxt
        return frozenset(w for ws in level.values() for w in ws)

    @cached_property
    def full_states(self) -> frozenset[int]:
        """States whose sub-language is all of {0,1}^omega.

        A state is full iff every state reachable from it has both outgoing
        transitions; then every cylinder below it lies inside the set.
        """
        complete = {q for q in self.nodes
                    if (q, 0) in self.transition and (q, 1) in self.transition}
        full = set(complete)
        changed = True
        while changed:
            changed = False
            for q in list(full):
                for b in (0, 1):
                    if self.transition[(q, b)] not in full:
                        full.discard(q)
                        changed = True
                        break
        return frozenset(full)


@dataclass(frozen=True)
class ClosedSet:
    """A closed subset of a cube at the cube's resolution.

    ``atoms`` is the depth-budget level set (the working approximation); when
    the set came from a safety automaton that automaton is retained as the
    exact carrier, which is what makes cylinder-containment queries exact.
    Equality is extensional at resolution: same cube, same atoms.
    """

    cube: Cube
    atoms: frozenset[str]
    automaton: SafetyAutomaton | None = field(default=None, compare=False)

    @staticmethod
    def from_words(cube: Cube, words: Iterable[str]) -> "ClosedSet":
        words = frozenset(words)
        for w in words:
            if len(w) != cube.width or any(c not in "01" for c in w):
                raise InvalidInput(f"bad word {w!r} for width {cube.width}")
        return ClosedSet(cube, words)

    @staticmethod
    def from_automaton(cube: Cube, aut: SafetyAutomaton) -> "ClosedSet":
        return ClosedSet(cube, aut.unroll(cube.width), aut)

    @staticmethod
    def full(cube: Cube) -> "ClosedSet":
        aut = SafetyAutomaton.build([0], 0, [(0, 0, 0), (0, 1, 0)])
        return ClosedSet.from_automaton(cube, aut)

    @staticmethod
    def empty(cube: Cube) -> "ClosedSet":
        return ClosedSet(cube, frozenset(), SafetyAutomaton.empty())

    @staticmethod
    def single_point(cube: Cube, word: str) -> "ClosedSet":
        return ClosedSet.from_words(cube, [word])

    @property
    def is_empty(self) -> bool:
        return not self.atoms

    @property
    def is_full(self) -> bool:
        return len(self.atoms) == self.cube.n_atoms

    def level(self, n: int) -> frozenset[str]:
        """Mesh-level-n words (masks assigning all coordinates of depth <= n)."""
        return frozenset(self.cube.mesh_trunc(w, n) for w in self.atoms)

    def tower(self) -> tuple[frozenset[str], ...]:
        """Levels 1..max_depth; consistent by construction (truncations)."""
        return tuple(self.level(n) for n in range(1, self.cube.max_depth + 1))

    def meets(self, mask: str) -> bool:
        return any(covers(mask, w) for w in self.atoms)

    def as_clopen(self) -> ClopenSet:
        return ClopenSet(self.cube, self.atoms)

    def _same_cube(self, other: "ClosedSet") -> None:
        if self.cube != other.cube:
            raise InvalidInput("closed sets live on different cubes")


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def project(s, coords: Sequence[str]):
    """Exact image under coordinate projection (drops are existential).

    Works on ClosedSet and ClopenSet; the result lives on the sub-cube of the
    chosen coordinates.  Automaton carriers are not transported: the image is
    returned in level form, which is exact at the sub-cube's resolution and is
    already pruned (a level set is its own pruned tree).
    """
    cube = s.cube
    pos = cube.positions_of(coords)
    if len(set(pos)) != len(pos):
        raise InvalidInput("projection coordinates repeat")
    sub = cube.subcube(coords)
    order = sorted(pos)
    image = frozenset("".join(w[i] for i in order) for w in s.atoms)
    if isinstance(s, ClopenSet):
        return ClopenSet(sub, image)
    return ClosedSet(sub, image)


def interior(p: ClosedSet) -> ClopenSet:
    """Largest clopen subset at the block's resolution (the 0-interior).

    With an automaton carrier the test "[w] inside P" is exact.  For bare
    level sets the deepest level is boundary-uncertain, so an atom counts as
    interior only when its whole penultimate-level sibling family is present.
    """
    cube = p.cube
    if p.is_empty:
        return ClopenSet.empty(cube)
    if p.automaton is not None:
        aut = p.automaton
        full = aut.full_states
        keep = [w for w in p.atoms if aut.run(w) in full]
        return ClopenSet(cube, frozenset(keep))
    n = cube.max_depth
    if n <= 0:
        return ClopenSet(cube, p.atoms)
    keep = []
    for w in p.atoms:
        parent = cube.mesh_trunc(w, n - 1)
        if all(a in p.atoms for a in expand(parent)):
            keep.append(w)
    return ClopenSet(cube, frozenset(keep))


def block_interior(p: ClosedSet, block_ids: Iterable[str]) -> ClosedSet:
    """Points of P whose full fiber over the complement of the block union lies in P.

    The block union stands for a cardinal below the weight; fixing its
    coordinates carves the finite-scale analogue of a G_lambda set.
    """
    cube = p.cube
    pos = set(cube.positions_of(cube.block_union_coords(block_ids)))
    keep = []
    for w in p.atoms:
        mask = "".join(c if i in pos else UNSET for i, c in enumerate(w))
        if all(a in p.atoms for a in expand(mask)):
            keep.append(w)
    return ClosedSet(cube, frozenset(keep))


def is_negligible(p: ClosedSet) -> bool:
    """Empty interior and empty block interior for every proper block union.

    For a single block this is nowhere-density at resolution; for products it
    additionally rules out cylinders over proper block unions.
    """
    if p.is_empty:
        return True
    if not interior(p).is_empty:
        return False
    ids = [b.ident for b in p.cube.blocks]
    for r in range(len(ids)):
        for combo in itertools.combinations(ids, r):
            if not block_interior(p, combo).is_empty:
                return False
    return True


def set_support(p: ClosedSet) -> tuple[str, ...]:
    """Minimal coordinate set D with P = pi_D^{-1}(pi_D(P)), by flip testing."""
    if p.is_empty:
        raise InvalidInput("support of the empty set is undefined")
    cube = p.cube
    support = []
    for i, coord in enumerate(cube.coords):
        for w in p.atoms:
            flipped = w[:i] + ("1" if w[i] == "0" else "0") + w[i + 1:]
            if flipped not in p.atoms:
                support.append(coord)
                break
    return tuple(support)
