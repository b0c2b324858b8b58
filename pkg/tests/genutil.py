"""Shared instance generators and brute-force oracles for the test suite.

Randomness that must be stable when the depth budget grows (the refinement
stability corpus) is keyed by tree-node words through a hash, never by draw
order.
"""

from __future__ import annotations

import hashlib
import random

from krcube import (
    ClosedSet,
    Cube,
    PartialHomeo,
    SafetyAutomaton,
    single_block_cube,
)
from krcube.kr import NwdCertificate, certify_nwd


def node_bit(seed: str, word: str) -> int:
    digest = hashlib.sha256(f"{seed}:{word}".encode()).digest()
    return digest[0] & 1


def golden_mean_automaton() -> SafetyAutomaton:
    """No two consecutive 1s."""
    return SafetyAutomaton.build([0, 1], 0, [(0, 0, 0), (0, 1, 1), (1, 0, 0)])


def random_automaton(rng: random.Random, n_states: int) -> SafetyAutomaton:
    """Pruned nonempty automaton: every state keeps at least one edge."""
    states = list(range(n_states))
    edges = []
    for q in states:
        labels = rng.choice([(0,), (1,), (0, 1)])
        for lbl in labels:
            edges.append((q, lbl, rng.choice(states)))
    return SafetyAutomaton.build(states, 0, edges)


def twisted_image(seed: str, atoms: frozenset[str]) -> dict[str, str]:
    """Tree isomorphism built from per-node child-label swaps.

    Keying swaps by domain tree nodes makes the map extend itself when the
    same carrier is unrolled one level deeper.
    """
    mapping = {}
    for a in sorted(atoms):
        out = []
        for i, c in enumerate(a):
            s = node_bit(seed, a[:i])
            out.append(str(int(c) ^ s))
        mapping[a] = "".join(out)
    return mapping


def kr_instance(seed: str, n_states: int, depth: int
                ) -> tuple[Cube, ClosedSet, PartialHomeo]:
    """Single-block instance: automaton-backed P, twisted K, tower f."""
    rng = random.Random(seed)
    cube = single_block_cube(depth)
    aut = random_automaton(rng, n_states)
    p = ClosedSet.from_automaton(cube, aut)
    mapping = twisted_image(seed, p.atoms)
    k = ClosedSet.from_words(cube, mapping.values())
    f = PartialHomeo.from_atom_map(p, k, mapping)
    return cube, p, f


def best_certificate(p: ClosedSet) -> NwdCertificate | None:
    for depth in range(1, p.cube.width + 1):
        got = certify_nwd(p, depth)
        if isinstance(got, NwdCertificate):
            return got
    return None


def certified_kr_instance(seed: str, max_states: int, depth: int
                          ) -> tuple[Cube, ClosedSet, PartialHomeo,
                                     NwdCertificate, NwdCertificate] | None:
    """A kr instance whose P and K both carry certificates, else None."""
    rng = random.Random(seed + "#states")
    n_states = rng.randint(1, max_states)
    cube, p, f = kr_instance(seed, n_states, depth)
    cert_p = best_certificate(p)
    cert_k = best_certificate(f.codomain)
    if cert_p is None or cert_k is None:
        return None
    return cube, p, f, cert_p, cert_k


def product_instance(seed: str, widths: list[int], cylindrical_tail: int = 0
                     ) -> tuple[Cube, PartialHomeo]:
    """Multi-block instance built fiberwise, block-compatible by construction.

    Fiber twists at fiber-tree depth d are keyed by the base truncated to
    mesh depth d+1, which keeps the joint atom map a valid tower on the
    product.  The last ``cylindrical_tail`` blocks get full fibers with
    identity fiber action.
    """
    from krcube.model import Block

    blocks = tuple(
        Block(f"B{i+1}", tuple(f"b{i+1}x{d}" for d in range(1, w + 1)))
        for i, w in enumerate(widths))
    cube = Cube(blocks)
    rng = random.Random(seed)

    def base_atoms(width: int, tag: str) -> list[str]:
        all_atoms = ["".join(f"{i >> (width - 1 - b) & 1}" for b in range(width))
                     for i in range(1 << width)]
        size = rng.randint(1, max(1, (1 << width) - 1))
        return sorted(rng.sample(all_atoms, size))

    part = cube.prefix(1)
    atoms = base_atoms(widths[0], "base")
    mapping = twisted_image(seed + "|B1", frozenset(atoms))
    for j in range(1, len(widths)):
        part = cube.prefix(j + 1)
        fiber_width = widths[j]
        fiber_atoms = ["".join(f"{i >> (fiber_width - 1 - b) & 1}" for b in range(fiber_width))
                       for i in range(1 << fiber_width)]
        cylindrical = j >= len(widths) - cylindrical_tail
        new_atoms = []
        new_mapping = {}
        base_cube = cube.prefix(j)
        for x in sorted(atoms):
            if cylindrical:
                trace = fiber_atoms
            else:
                size = rng.randint(1, max(1, len(fiber_atoms) - 1))
                trace = sorted(rng.sample(fiber_atoms, size))
            for e in trace:
                if cylindrical:
                    img_fiber = e
                else:
                    bits = []
                    for d, c in enumerate(e):
                        key = base_cube.mesh_trunc(x, d + 1)
                        s = node_bit(f"{seed}|B{j+1}|{key}", e[:d])
                        bits.append(str(int(c) ^ s))
                    img_fiber = "".join(bits)
                new_atoms.append(x + e)
                new_mapping[x + e] = mapping[x] + img_fiber
        atoms = new_atoms
        mapping = new_mapping
    domain = ClosedSet.from_words(cube, atoms)
    codomain = ClosedSet.from_words(cube, mapping.values())
    return cube, PartialHomeo.from_atom_map(domain, codomain, mapping)


# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------

def enumerate_paths(aut: SafetyAutomaton, depth: int) -> set[str]:
    """Naive path enumeration, independent of SafetyAutomaton.unroll."""
    if aut.initial is None:
        return set()
    out = set()

    def walk(q: int, word: str) -> None:
        if len(word) == depth:
            out.add(word)
            return
        for f, lbl, t in aut.edges:
            if f == q:
                walk(t, word + str(lbl))

    walk(aut.initial, "")
    return out


def cylinder_inside_oracle(aut: SafetyAutomaton, word: str, slack: int) -> bool:
    """[word] inside the language, by unrolling ``slack`` levels deeper.

    Exact once slack >= number of automaton nodes: a safety automaton whose
    sub-language is full to that depth is full outright.
    """
    target = len(word) + slack
    deep = enumerate_paths(aut, target)
    suffixes = {w[len(word):] for w in deep if w.startswith(word)}
    return len(suffixes) == 1 << slack
