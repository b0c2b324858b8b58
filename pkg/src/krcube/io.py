"""JSON schemas for every artifact kind.

Single-file artifacts with a "kind" discriminator.  Emitted artifacts embed
their coordinate context under "blocks" (a list of block definitions) so they
re-parse standalone; loaders accept an explicit cube instead, and fall back
to synthesizing a single default block where the form determines the width.
Words within a block follow the declared coordinate order; multi-block words
are lists of per-block strings.
"""

from __future__ import annotations

import json
from typing import Any, Mapping

from .errors import InvalidInput
from .factor import AdmissibleSet, DefectBlocks, ProductMap
from .homeo import BlockMapChain, Matching, PartialHomeo, validate_chain
from .kr import NwdCertificate
from .model import (
    UNSET,
    Block,
    ClopenSet,
    ClosedSet,
    Cube,
    SafetyAutomaton,
    mask_from_assignment,
    mask_to_assignment,
)


def _expect(data: Any, kind: str) -> dict:
    if not isinstance(data, dict):
        raise InvalidInput(f"expected a JSON object for {kind!r}")
    got = data.get("kind")
    if got != kind:
        raise InvalidInput(f"expected kind {kind!r}, found {got!r}")
    return data


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Blocks / cubes
# ---------------------------------------------------------------------------

def dump_blocks(cube: Cube) -> list[dict]:
    return [{"id": b.ident, "coords": list(b.coords)} for b in cube.blocks]


def load_blocks(data: Any) -> Cube:
    if isinstance(data, dict):
        data = _expect(data, "blocks")["blocks"]
    if not isinstance(data, list):
        raise InvalidInput("block definitions must be a list")
    blocks = []
    for entry in data:
        try:
            blocks.append(Block(str(entry["id"]), tuple(str(c) for c in entry["coords"])))
        except (KeyError, TypeError) as e:
            raise InvalidInput(f"bad block definition {entry!r}") from e
    return Cube(tuple(blocks))


def _context_cube(data: dict, cube: Cube | None, default_width: int | None = None) -> Cube:
    if cube is not None:
        return cube
    if "blocks" in data and isinstance(data["blocks"], list) \
            and data["blocks"] and isinstance(data["blocks"][0], dict):
        return load_blocks(data["blocks"])
    if default_width is not None:
        return Cube((Block(str(data.get("block", "B1")),
                           tuple(f"c{i}" for i in range(1, default_width + 1))),))
    raise InvalidInput("no coordinate context: pass --blocks or embed block definitions")


def _split_word(cube: Cube, word: Any, key: str) -> str:
    """Accept a single-block string or a per-block list; return a full mask."""
    if isinstance(word, str):
        parts = [word] if len(cube.blocks) == 1 else None
        if parts is None:
            raise InvalidInput(f"{key}: multi-block words must be per-block lists")
    elif isinstance(word, list):
        parts = [str(p) for p in word]
    else:
        raise InvalidInput(f"{key}: bad word {word!r}")
    if len(parts) != len(cube.blocks):
        raise InvalidInput(f"{key}: expected {len(cube.blocks)} block parts")
    out = []
    for part, block in zip(parts, cube.blocks):
        if len(part) > block.depth or any(c not in "01" for c in part):
            raise InvalidInput(f"{key}: bad part {part!r} for block {block.ident!r}")
        out.append(part.ljust(block.depth, UNSET))
    return "".join(out)


def _join_word(cube: Cube, mask: str):
    """Inverse of _split_word: per-block assigned prefixes."""
    parts = []
    i = 0
    for block in cube.blocks:
        seg = mask[i:i + block.depth]
        parts.append(seg.rstrip(UNSET))
        i += block.depth
    if len(cube.blocks) == 1:
        return parts[0]
    return parts


# ---------------------------------------------------------------------------
# Sets
# ---------------------------------------------------------------------------

def dump_closed(s: ClosedSet) -> dict:
    out: dict[str, Any] = {"kind": "closed", "blocks": dump_blocks(s.cube)}
    if len(s.cube.blocks) == 1:
        out["block"] = s.cube.blocks[0].ident
    if s.automaton is not None:
        aut = s.automaton
        out["form"] = "automaton"
        out["nodes"] = list(aut.nodes)
        out["edges"] = [list(e) for e in aut.edges]
        out["initial"] = aut.initial
    else:
        out["form"] = "levels"
        out["depth"] = s.cube.max_depth
        out["words"] = sorted(_join_word(s.cube, w) for w in s.atoms)
    return out


def load_closed(data: Any, cube: Cube | None = None) -> ClosedSet:
    data = _expect(data, "closed")
    form = data.get("form")
    if form == "automaton":
        edges = data.get("edges", [])
        nodes = data.get("nodes", [])
        initial = data.get("initial")
        cube = _context_cube(data, cube, default_width=data.get("depth"))
        if initial is None and not nodes:
            return ClosedSet.empty(cube)
        aut = SafetyAutomaton.build([int(q) for q in nodes],
                                    int(initial) if initial is not None else None,
                                    [(int(f), int(l), int(t)) for f, l, t in edges])
        return ClosedSet.from_automaton(cube, aut)
    if form == "levels":
        words = data.get("words", [])
        width = None
        if words and isinstance(words[0], str):
            width = len(words[0])
        elif "depth" in data:
            width = int(data["depth"])
        cube = _context_cube(data, cube, default_width=width)
        masks = [_split_word(cube, w, "words") for w in words]
        for m in masks:
            if UNSET in m:
                raise InvalidInput(f"level word {m!r} does not reach the depth budget")
        return ClosedSet.from_words(cube, masks)
    raise InvalidInput(f"unknown closed-set form {form!r}")


def dump_clopen(s: ClopenSet) -> dict:
    return {
        "kind": "clopen",
        "blocks": dump_blocks(s.cube),
        "cylinders": [mask_to_assignment(s.cube, m) for m in s.cylinders],
    }


def load_clopen(data: Any, cube: Cube | None = None) -> ClopenSet:
    data = _expect(data, "clopen")
    cube = _context_cube(data, cube)
    masks = []
    for cyl in data.get("cylinders", []):
        if not isinstance(cyl, dict):
            raise InvalidInput(f"bad cylinder {cyl!r}")
        masks.append(mask_from_assignment(cube, {str(k): v for k, v in cyl.items()}))
    return ClopenSet.from_cylinders(cube, masks)


# ---------------------------------------------------------------------------
# Towers and chains
# ---------------------------------------------------------------------------

def dump_tower(f: PartialHomeo) -> dict:
    levels = []
    for n, lvl in enumerate(f.levels, start=1):
        pairs = [[_join_word(f.cube, w), _join_word(f.cube, v)] for w, v in lvl]
        levels.append({"n": n, "pairs": pairs})
    return {"kind": "tower", "blocks": dump_blocks(f.cube), "levels": levels}


def load_tower(data: Any, cube: Cube | None = None) -> PartialHomeo:
    data = _expect(data, "tower")
    raw = data.get("levels", [])
    if cube is None and "blocks" not in data:
        depth = max((int(e.get("n", 0)) for e in raw), default=0)
        cube = _context_cube(data, cube, default_width=depth or None)
    else:
        cube = _context_cube(data, cube)
    by_n: dict[int, dict[str, str]] = {}
    for entry in raw:
        n = int(entry["n"])
        lvl = {}
        for pair in entry.get("pairs", []):
            if not isinstance(pair, list) or len(pair) != 2:
                raise InvalidInput(f"bad tower pair {pair!r}")
            lvl[_split_word(cube, pair[0], "tower")] = _split_word(cube, pair[1], "tower")
        by_n[n] = lvl
    n_levels = cube.max_depth
    if set(by_n) != set(range(1, n_levels + 1)):
        raise InvalidInput(f"tower must list levels 1..{n_levels}")
    top = by_n[n_levels]
    domain = ClosedSet.from_words(cube, top.keys())
    codomain = ClosedSet.from_words(cube, top.values())
    return PartialHomeo.build(domain, codomain, [by_n[n] for n in range(1, n_levels + 1)])


def _clopen_body(s: ClopenSet) -> dict:
    return {"cylinders": [mask_to_assignment(s.cube, m) for m in s.cylinders]}


def dump_chain(h: BlockMapChain) -> dict:
    stages = [[{"U": _clopen_body(u), "V": _clopen_body(v)} for u, v in stage.pairs]
              for stage in h.stages]
    return {"kind": "chain", "blocks": dump_blocks(h.cube), "stages": stages}


def load_chain(data: Any, cube: Cube | None = None) -> BlockMapChain:
    data = _expect(data, "chain")
    cube = _context_cube(data, cube)
    raw = data.get("stages")
    if not raw:
        raise InvalidInput("chain has no stages")
    stages = []
    for stage in raw:
        pairs = []
        for pair in stage:
            u = load_clopen({"kind": "clopen", **pair["U"]}, cube)
            v = load_clopen({"kind": "clopen", **pair["V"]}, cube)
            pairs.append((u, v))
        stages.append(Matching(tuple(pairs)))
    dom_atoms = frozenset(a for u, _ in stages[0].pairs for a in u.atoms)
    cod_atoms = frozenset(a for _, v in stages[0].pairs for a in v.atoms)
    mapping: dict[str, str] = {}
    for u, v in stages[-1].pairs:
        if len(u.atoms) != 1 or len(v.atoms) != 1:
            raise InvalidInput("final stage pieces must be single depth-budget cylinders")
        mapping[next(iter(u.atoms))] = next(iter(v.atoms))
    chain = BlockMapChain(cube, ClopenSet(cube, dom_atoms), ClopenSet(cube, cod_atoms),
                          tuple(stages), tuple(sorted(mapping.items())))
    bad = validate_chain(chain)
    if bad:
        check, witness = bad[0]
        raise InvalidInput(f"invalid chain: {check} (witness {witness!r})")
    return chain


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

def dump_certificate(cert: NwdCertificate) -> dict:
    out: dict[str, Any] = {
        "kind": "nwd-cert",
        "blocks": dump_blocks(cert.cube),
        "block": cert.block_id,
        "depth": cert.depth,
        "witnesses": [[w, wp] for w, wp in cert.witnesses],
    }
    if cert.within is not None:
        out["within"] = _clopen_body(cert.within)
    return out


def load_certificate(data: Any, cube: Cube | None = None) -> NwdCertificate:
    data = _expect(data, "nwd-cert")
    cube = _context_cube(data, cube)
    if len(cube.blocks) != 1:
        raise InvalidInput("certificates live on a single block")
    witnesses = []
    for pair in data.get("witnesses", []):
        if not isinstance(pair, list) or len(pair) != 2:
            raise InvalidInput(f"bad witness pair {pair!r}")
        witnesses.append((str(pair[0]), str(pair[1])))
    within = None
    if data.get("within") is not None:
        within = load_clopen({"kind": "clopen", **data["within"]}, cube)
    return NwdCertificate(cube, int(data["depth"]), tuple(witnesses), within)


# ---------------------------------------------------------------------------
# Product maps and factor results
# ---------------------------------------------------------------------------

def dump_map(m: ProductMap) -> dict:
    return {
        "kind": "map",
        "inputs": list(m.domain_cube.coords),
        "outputs": list(m.codomain_cube.coords),
        "input_blocks": dump_blocks(m.domain_cube),
        "output_blocks": dump_blocks(m.codomain_cube),
        "table": {k: v for k, v in m.table},
    }


def load_map(data: Any, domain_cube: Cube | None = None,
             codomain_cube: Cube | None = None) -> ProductMap:
    data = _expect(data, "map")
    inputs = [str(c) for c in data.get("inputs", [])]
    outputs = [str(c) for c in data.get("outputs", [])]
    if domain_cube is None:
        if "input_blocks" in data:
            domain_cube = load_blocks(data["input_blocks"])
        else:
            domain_cube = Cube((Block("A", tuple(inputs)),))
    if codomain_cube is None:
        if "output_blocks" in data:
            codomain_cube = load_blocks(data["output_blocks"])
        elif outputs == inputs:
            codomain_cube = domain_cube
        else:
            codomain_cube = Cube((Block("B", tuple(outputs)),))
    if list(domain_cube.coords) != inputs or list(codomain_cube.coords) != outputs:
        raise InvalidInput("inputs/outputs disagree with the coordinate context")
    table = data.get("table")
    if not isinstance(table, dict):
        raise InvalidInput("map table must be an object")
    return ProductMap.build(domain_cube, codomain_cube,
                            {str(k): str(v) for k, v in table.items()})


def dump_admissible(a: AdmissibleSet) -> dict:
    return {"kind": "admissible", "coords": list(a.coords), "map": dump_map(a.induced)}


def dump_defect_blocks(d: DefectBlocks) -> dict:
    return {"kind": "defect-blocks", "blocks": [list(b) for b in d.blocks],
            "exhausted": d.exhausted}


# ---------------------------------------------------------------------------
# Jobs
# ---------------------------------------------------------------------------

def load_cube_job(data: Any) -> tuple[Cube, PartialHomeo, dict[str, tuple[NwdCertificate, NwdCertificate]]]:
    data = _expect(data, "cube-extend")
    cube = load_blocks(data["blocks"])
    f = load_tower(data["f"], cube)
    p = load_closed(data["P"], cube)
    k = load_closed(data["K"], cube)
    if f.domain != p:
        raise InvalidInput("tower domain differs from P")
    if f.codomain != k:
        raise InvalidInput("tower codomain differs from K")
    certs: dict[str, tuple[NwdCertificate, NwdCertificate]] = {}
    for entry in data.get("certs", []):
        ident = str(entry["block"])
        sub = Cube((cube.block(ident),))
        certs[ident] = (load_certificate(entry["P"], sub),
                        load_certificate(entry["K"], sub))
    return cube, f, certs
