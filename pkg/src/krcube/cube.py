"""Block-inductive extension pipeline on multi-block cubes.

The fold walks the cube's block chain left to right, maintaining an
autohomeomorphism of the prefix cube that extends the partial map's prefix
projection and commutes with every earlier prefix projection.  Each successor
block is handled one of two ways:

* fiber route -- the block's projections of the two closed sets carry
  nowhere-density certificates; the fiber traces over every base point are
  then nowhere dense, each trace's partial map extends by the single-block
  extension, and the resulting homeomorphism-valued assignment on the base
  projection is extended to the whole base by the clopen retraction before
  being assembled as a skew product;
* skew route -- neither set's support touches the block (their fibers over
  it are full), so each fiber already carries a total level tower which
  converts to a chain directly; the retraction extension and skew-product
  assembly are the same.

Local constancy of the fiber assignment is automatic at finite resolution:
base points with identical fiber data receive bit-identical fiber chains.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

from .errors import CertificateInvalid, InvalidInput, RestrictionError
from .homeo import (
    BlockMapChain,
    PartialHomeo,
    chain_from_mapping,
    clopen_retraction,
    identity_chain,
    project_tower,
)
from .kr import NwdCertificate, certify_nwd, kr_extend, validate_certificate
from .model import ClopenSet, ClosedSet, Cube, project, set_support


# ---------------------------------------------------------------------------
# Homeomorphism-valued maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HomeoValuedMap:
    """Assignment of a fiber-block chain to each base cylinder meeting Q,
    locally constant on the clopen partition grouping equal assignments."""

    base: ClosedSet
    fiber: Cube
    assignment: tuple[tuple[str, BlockMapChain], ...]

    @staticmethod
    def build(base: ClosedSet, fiber: Cube,
              assignment: Mapping[str, BlockMapChain]) -> "HomeoValuedMap":
        if set(assignment.keys()) != base.atoms:
            raise InvalidInput("assignment keys differ from the base set's cylinders")
        for w, chain in assignment.items():
            if chain.cube != fiber:
                raise InvalidInput(f"chain at {w!r} lives on the wrong fiber cube")
            if chain.is_relative:
                raise InvalidInput(f"chain at {w!r} is not an autohomeomorphism")
        return HomeoValuedMap(base, fiber, tuple(sorted(assignment.items())))

    @cached_property
    def mapping(self) -> dict[str, BlockMapChain]:
        return dict(self.assignment)

    @cached_property
    def partition(self) -> tuple[ClopenSet, ...]:
        groups: dict[BlockMapChain, set[str]] = {}
        for w, chain in self.assignment:
            groups.setdefault(chain, set()).add(w)
        pieces = [ClopenSet(self.base.cube, frozenset(atoms)) for atoms in groups.values()]
        return tuple(sorted(pieces, key=lambda c: min(c.atoms)))

    @property
    def is_total(self) -> bool:
        return len(self.assignment) == self.base.cube.n_atoms


def extend_homeo_valued(phi: HomeoValuedMap) -> HomeoValuedMap:
    """Total extension through the retraction onto the base set.

    Agrees with phi on the base set, is locally constant on the retraction's
    fiber partition, and is idempotent; an empty base yields the constant
    identity assignment.
    """
    base_cube = phi.base.cube
    if phi.base.is_empty:
        ident = identity_chain(phi.fiber)
        total = {w: ident for w in base_cube.atoms()}
    else:
        r = clopen_retraction(phi.base)
        total = {w: phi.mapping[r[w]] for w in base_cube.atoms()}
    return HomeoValuedMap.build(ClosedSet.full(base_cube), phi.fiber, total)


# ---------------------------------------------------------------------------
# Fiber families (the fiberwise extension data)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiberFamily:
    """Closed sets over a base-times-fiber product with full base projections,
    a base tower, and per-fiber partial maps carrying nowhere-density
    certificates."""

    base: Cube
    fiber: Cube
    product: Cube
    x_set: ClosedSet
    y_set: ClosedSet
    p_total: ClosedSet
    k_total: ClosedSet
    g: PartialHomeo
    fiber_towers: tuple[tuple[str, PartialHomeo], ...]
    cert_p: NwdCertificate
    cert_k: NwdCertificate

    @staticmethod
    def build(f: PartialHomeo,
              certs: tuple[NwdCertificate, NwdCertificate] | None = None,
              g: PartialHomeo | None = None) -> "FiberFamily":
        """Derive the family from a partial map on a product cube whose last
        block is the fiber.  Certificates default to the canonical minimal-lag
        certificates of the fiber-block projections."""
        product = f.cube
        if len(product.blocks) < 2:
            raise InvalidInput("a fiber family needs a base block and a fiber block")
        if f.is_empty:
            raise InvalidInput("fiber families need non-empty sets (the base "
                               "projection must be onto)")
        base = product.prefix(len(product.blocks) - 1)
        fiber = Cube((product.blocks[-1],))
        bw = base.width
        try:
            derived_g = project_tower(f, base.coords)
        except RestrictionError as e:
            raise InvalidInput(f"base map does not factor: {e}") from e
        if g is None:
            g = derived_g
        elif g != derived_g:
            raise InvalidInput("supplied base map disagrees with the projection of f")
        towers = _fiber_towers(f, bw, fiber)
        proj_p = project(f.domain, fiber.coords)
        proj_k = project(f.codomain, fiber.coords)
        if certs is None:
            cert_p = _auto_certificate(proj_p)
            cert_k = _auto_certificate(proj_k)
        else:
            cert_p, cert_k = certs
            validate_certificate(cert_p, proj_p)
            validate_certificate(cert_k, proj_k)
        for x, tower in towers:
            validate_certificate(cert_p, tower.domain)
            validate_certificate(cert_k, tower.codomain)
        return FiberFamily(base, fiber, product, g.domain, g.codomain,
                           f.domain, f.codomain, g, towers, cert_p, cert_k)

    @cached_property
    def tower_map(self) -> dict[str, PartialHomeo]:
        return dict(self.fiber_towers)


def _auto_certificate(p: ClosedSet) -> NwdCertificate:
    for depth in range(1, p.cube.width + 1):
        got = certify_nwd(p, depth)
        if isinstance(got, NwdCertificate):
            return got
    raise CertificateInvalid(
        "fiber projection admits no nowhere-density certificate at any lag")


def _fiber_towers(f: PartialHomeo, base_width: int,
                  fiber: Cube) -> tuple[tuple[str, PartialHomeo], ...]:
    """Per-base-point towers between the fiber traces of domain and codomain."""
    traces: dict[str, dict[str, str]] = {}
    for a, b in f.atom_map.items():
        traces.setdefault(a[:base_width], {})[a[base_width:]] = b[base_width:]
    out = []
    for x in sorted(traces):
        m = traces[x]
        dom = ClosedSet.from_words(fiber, m.keys())
        cod = ClosedSet.from_words(fiber, m.values())
        out.append((x, PartialHomeo.from_atom_map(dom, cod, m)))
    return tuple(out)


def _fiber_assignments(towers: Mapping[str, PartialHomeo],
                       cert_p: NwdCertificate | None,
                       cert_k: NwdCertificate | None,
                       workers: int = 1) -> dict[str, BlockMapChain]:
    """Extend every fiber tower; equal fiber data yields the identical chain."""

    def extend_one(tower: PartialHomeo) -> BlockMapChain:
        if tower.domain.is_full:
            return chain_from_mapping(tower.cube, tower.atom_map)
        if cert_p is None or cert_k is None:
            raise InvalidInput("proper fiber trace without a certificate")
        return kr_extend(tower, cert_p, cert_k)

    distinct: dict[PartialHomeo, BlockMapChain] = {}
    keys = sorted(set(towers.values()), key=lambda t: sorted(t.atom_map.items()))
    if workers > 1 and len(keys) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for tower, chain in zip(keys, pool.map(extend_one, keys)):
                distinct[tower] = chain
    else:
        for tower in keys:
            distinct[tower] = extend_one(tower)
    return {x: distinct[t] for x, t in towers.items()}


def fiberwise_extend(family: FiberFamily, workers: int = 1) -> BlockMapChain:
    """Fiberwise homeomorphism from X x fiber onto Y x fiber extending the
    family's partial map; commutes with the base projection by construction."""
    assignments = _fiber_assignments(family.tower_map, family.cert_p,
                                     family.cert_k, workers)
    g_map = family.g.atom_map
    sigma: dict[str, str] = {}
    for x in sorted(family.x_set.atoms):
        chain = assignments[x]
        gx = g_map[x]
        for e, img in chain.mapping.items():
            sigma[x + e] = gx + img
    dom = ClopenSet(family.product,
                    frozenset(x + e for x in family.x_set.atoms
                              for e in family.fiber.atoms()))
    cod = ClopenSet(family.product,
                    frozenset(y + e for y in family.y_set.atoms
                              for e in family.fiber.atoms()))
    return chain_from_mapping(family.product, sigma, dom, cod)


def assemble_product_homeo(base_chain: BlockMapChain,
                           phi: HomeoValuedMap) -> BlockMapChain:
    """Skew product (w, v) -> (base_chain(w), phi(w)(v)) as a chain on the
    base-plus-fiber cube."""
    if base_chain.is_relative:
        raise InvalidInput("base chain must be an autohomeomorphism of the base cube")
    if base_chain.cube != phi.base.cube:
        raise InvalidInput("base chain and assignment live on different cubes")
    if not phi.is_total:
        raise InvalidInput("assignment must be total on the base cube")
    product = Cube(base_chain.cube.blocks + phi.fiber.blocks)
    sigma = {}
    for w, fw in base_chain.mapping.items():
        fiber_map = phi.mapping[w].mapping
        for v, fv in fiber_map.items():
            sigma[w + v] = fw + fv
    return chain_from_mapping(product, sigma)


# ---------------------------------------------------------------------------
# The full pipeline
# ---------------------------------------------------------------------------

def cube_extend(f: PartialHomeo,
                certs: Mapping[str, tuple[NwdCertificate, NwdCertificate]] | None = None,
                chain: Sequence[str] | None = None,
                workers: int = 1) -> BlockMapChain:
    """Extend f between closed subsets of a multi-block cube to an
    autohomeomorphism whose prefix projections all commute with f's.

    ``certs`` maps block ids to certificate pairs for the block projections
    of domain and codomain; blocks untouched by either support need none
    (their fibers are full).  ``chain`` optionally restates the block order
    and must match the cube's.
    """
    cube = f.cube
    certs = dict(certs or {})
    idents = [b.ident for b in cube.blocks]
    if chain is not None and list(chain) != idents:
        raise InvalidInput("block chain must list the cube's blocks in order")
    unknown = set(certs) - set(idents)
    if unknown:
        raise InvalidInput(f"certificate for unknown block {sorted(unknown)[0]!r}")
    if f.is_empty:
        return identity_chain(cube)
    sup = set(set_support(f.domain)) | set(set_support(f.codomain))

    def route(i: int) -> str:
        block = cube.blocks[i]
        if not sup & set(block.coords):
            return "skew"
        if block.ident not in certs:
            raise InvalidInput(f"missing certificate for block {block.ident!r}")
        cert_p, cert_k = certs[block.ident]
        try:
            validate_certificate(cert_p, project(f.domain, block.coords))
            validate_certificate(cert_k, project(f.codomain, block.coords))
        except CertificateInvalid as e:
            raise CertificateInvalid(f"block {block.ident!r}: {e}") from e
        return "fiber"

    def prefix_tower(j: int) -> PartialHomeo:
        try:
            return project_tower(f, cube.prefix(j).coords)
        except RestrictionError as e:
            raise InvalidInput(
                f"partial map is block-incompatible with the chain prefix of "
                f"length {j}: {e}") from e

    f1 = prefix_tower(1)
    if route(0) == "fiber":
        cert_p, cert_k = certs[idents[0]]
        result = kr_extend(f1, cert_p, cert_k)
    else:
        result = chain_from_mapping(f1.cube, f1.atom_map)
    for j in range(1, len(cube.blocks)):
        f_next = prefix_tower(j + 1)
        fiber = Cube((cube.blocks[j],))
        towers = dict(_fiber_towers(f_next, cube.prefix(j).width, fiber))
        if route(j) == "fiber":
            cert_p, cert_k = certs[idents[j]]
            for x, tower in towers.items():
                validate_certificate(cert_p, tower.domain)
                validate_certificate(cert_k, tower.codomain)
            assignments = _fiber_assignments(towers, cert_p, cert_k, workers)
        else:
            assignments = _fiber_assignments(towers, None, None, workers)
        q = project(f.domain, cube.prefix(j).coords)
        phi = HomeoValuedMap.build(q, fiber, assignments)
        result = assemble_product_homeo(result, extend_homeo_valued(phi))
    return result
