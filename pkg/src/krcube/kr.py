"""Nowhere-density certificates and homeomorphism extension on a single block.

A certificate witnesses nowhere-density with a uniform lag: every set-meeting
word of length at most N-D owns an extension, at most D letters longer, whose
cylinder misses the set.  A refusal names a word all of whose extensions by up
to D letters meet the set -- at the block's resolution only, which is all a
finite unrolling can prove.

The extension algorithm maintains matched territory pairs down the towers of
the two closed sets: set-meeting cells split in lockstep and pair through the
level bijections; the free remainders left behind on the two sides always
have equal atom counts (the level maps are bijections on every subtree) and
are matched canonically in lexicographic order, which on the equal-depth
sibling cells of a full extension is exactly the suffix-preserving matching
of clopen_homeo's bisection.  Relative extensions between ragged clopen sets
additionally rebalance children by moving free atoms to the remainder pool;
the certificates guarantee such free territory exists, the algorithm reads it
off the level sets directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import CertificateInvalid, InvalidInput, ResolutionInsufficiency
from .homeo import BlockMapChain, PartialHomeo, chain_from_mapping, identity_chain
from .model import UNSET, ClopenSet, ClosedSet, Cube, expand


def _require_single_block(cube: Cube, what: str) -> None:
    if len(cube.blocks) != 1:
        raise InvalidInput(f"{what} operates on a single Cantor block")


def _pad(cube: Cube, prefix: str) -> str:
    return prefix.ljust(cube.width, UNSET)


@dataclass(frozen=True)
class NwdCertificate:
    """Per-cylinder avoidance witnesses for a closed set in one block.

    ``witnesses`` pairs each covered set-meeting word w with an extension w'
    (|w'| <= |w| + depth) whose cylinder misses the set; when ``within`` is
    given the witnesses additionally stay inside that clopen set (the
    relative form used under a matched pair).
    """

    cube: Cube
    depth: int
    witnesses: tuple[tuple[str, str], ...]
    within: ClopenSet | None = None

    @property
    def block_id(self) -> str:
        return self.cube.blocks[0].ident

    def witness_for(self, word: str) -> str | None:
        for w, wp in self.witnesses:
            if w == word:
                return wp
        return None


@dataclass(frozen=True)
class NwdRefusal:
    """A word whose depth-D extensions all meet the set, at this resolution."""

    cube: Cube
    depth: int
    word: str


def _meeting_prefixes(p: ClosedSet) -> set[str]:
    out: set[str] = set()
    for a in p.atoms:
        for n in range(len(a) + 1):
            out.add(a[:n])
    return out


def certify_nwd(p: ClosedSet, depth: int,
                within: ClopenSet | None = None) -> NwdCertificate | NwdRefusal:
    """Certificate for P at witness lag ``depth``, or a refusal naming a word.

    Search order is breadth-first (length, then lexicographic) on both the
    covered words and the candidate witnesses, so certificates are canonical.
    """
    cube = p.cube
    _require_single_block(cube, "certify_nwd")
    n = cube.width
    if not 1 <= depth <= n:
        raise InvalidInput(f"certificate depth must lie in 1..{n}")
    if within is not None and not p.atoms <= within.atoms:
        raise InvalidInput("set is not contained in the relative clopen set")
    meeting = _meeting_prefixes(p)

    def witness_ok(w: str) -> bool:
        if w in meeting:
            return False
        if within is not None:
            if not set(expand(_pad(cube, w))) <= within.atoms:
                return False
        return True

    covered = sorted((w for w in meeting if len(w) <= n - depth),
                     key=lambda w: (len(w), w))
    witnesses = []
    for w in covered:
        found = None
        frontier = [w]
        for _ in range(depth):
            nxt = []
            for q in frontier:
                for b in "01":
                    cand = q + b
                    if len(cand) > n:
                        continue
                    if witness_ok(cand):
                        found = cand
                        break
                    nxt.append(cand)
                if found:
                    break
            if found:
                break
            frontier = nxt
        if found is None:
            return NwdRefusal(cube, depth, w)
        witnesses.append((w, found))
    return NwdCertificate(cube, depth, tuple(witnesses), within)


def validate_certificate(cert: NwdCertificate, p: ClosedSet,
                         within: ClopenSet | None = None) -> None:
    """Raise CertificateInvalid unless the certificate is valid for P."""
    cube = p.cube
    _require_single_block(cube, "certificate validation")
    if cert.cube != cube:
        raise CertificateInvalid("certificate names a different block")
    n = cube.width
    if not 1 <= cert.depth <= n:
        raise CertificateInvalid(f"certificate depth must lie in 1..{n}")
    scope = within if within is not None else cert.within
    if scope is not None and not p.atoms <= scope.atoms:
        raise CertificateInvalid("set is not contained in the relative clopen set")
    meeting = _meeting_prefixes(p)
    listed: dict[str, str] = {}
    for w, wp in cert.witnesses:
        if not wp.startswith(w) or len(wp) <= len(w):
            raise CertificateInvalid(f"witness {wp!r} does not properly extend {w!r}")
        if len(wp) > min(n, len(w) + cert.depth):
            raise CertificateInvalid(f"witness {wp!r} exceeds the depth budget")
        if wp in meeting:
            raise CertificateInvalid(f"witness {wp!r} meets the set")
        if scope is not None and not set(expand(_pad(cube, wp))) <= scope.atoms:
            raise CertificateInvalid(f"witness {wp!r} escapes the relative clopen set")
        listed[w] = wp
    for w in meeting:
        if len(w) <= n - cert.depth and w not in listed:
            raise CertificateInvalid(f"no witness for the set-meeting word {w!r}")


# ---------------------------------------------------------------------------
# Extension
# ---------------------------------------------------------------------------

def _extension_mapping(f: PartialHomeo, u_atoms: frozenset[str],
                       v_atoms: frozenset[str]) -> dict[str, str]:
    cube = f.cube
    n = cube.width
    p_atoms = f.domain.atoms
    levels = [dict(f.levels[i]) for i in range(n)]
    sigma: dict[str, str] = {}

    def transport(xs: Iterable[str], ys: Iterable[str]) -> None:
        for a, b in zip(sorted(xs), sorted(ys)):
            sigma[a] = b

    if not p_atoms:
        transport(u_atoms, v_atoms)
        return sigma

    def process(u: str, v: str, xs: frozenset[str], ys: frozenset[str], k: int) -> None:
        if k == n:
            sigma[u] = v
            return
        lvl = levels[k]
        children = []
        taken_x: set[str] = set()
        taken_y: set[str] = set()
        for b in "01":
            ub = u + b
            vm = lvl.get(_pad(cube, ub))
            if vm is None:
                continue
            vb = vm[: k + 1]
            xb = set(a for a in xs if a.startswith(ub))
            yb = set(a for a in ys if a.startswith(vb))
            surplus = len(xb) - len(yb)
            if surplus > 0:
                free = sorted(xb - p_atoms)
                xb -= set(free[:surplus])
            elif surplus < 0:
                free = sorted(yb - f.codomain.atoms)
                yb -= set(free[:-surplus])
            children.append((ub, vb, frozenset(xb), frozenset(yb)))
            taken_x |= xb
            taken_y |= yb
        transport(xs - taken_x, ys - taken_y)
        for ub, vb, xb, yb in children:
            process(ub, vb, xb, yb, k + 1)

    process("", "", u_atoms, v_atoms, 0)
    return sigma


def kr_extend(f: PartialHomeo, cert_p: NwdCertificate,
              cert_k: NwdCertificate) -> BlockMapChain:
    """Extend f: P -> K to an autohomeomorphism of the block at resolution N.

    The certificates are the nowhere-density hypothesis and are validated
    against P and K; the empty partial homeomorphism extends to the identity.
    """
    cube = f.cube
    _require_single_block(cube, "kr_extend")
    validate_certificate(cert_p, f.domain)
    validate_certificate(cert_k, f.codomain)
    if f.is_empty:
        return identity_chain(cube)
    full = frozenset(cube.atoms())
    sigma = _extension_mapping(f, full, full)
    return chain_from_mapping(cube, sigma)


def kr_extend_relative(f: PartialHomeo, u: ClopenSet, v: ClopenSet,
                       cert_p: NwdCertificate, cert_k: NwdCertificate) -> BlockMapChain:
    """Extend f: P -> K to a relative chain from U onto V (P in U, K in V)."""
    cube = f.cube
    _require_single_block(cube, "kr_extend_relative")
    if u.cube != cube or v.cube != cube:
        raise InvalidInput("clopen sets live on a different cube")
    if u.is_empty or v.is_empty:
        raise InvalidInput("relative extension needs non-empty clopen sets")
    if not f.domain.atoms <= u.atoms:
        raise InvalidInput("domain of f is not contained in U")
    if not f.codomain.atoms <= v.atoms:
        raise InvalidInput("codomain of f is not contained in V")
    validate_certificate(cert_p, f.domain, within=u)
    validate_certificate(cert_k, f.codomain, within=v)
    if len(u.atoms) != len(v.atoms):
        raise ResolutionInsufficiency(
            f"cardinality obstruction at the block's resolution: "
            f"{len(u.atoms)} versus {len(v.atoms)} depth-budget cylinders")
    sigma = _extension_mapping(f, u.atoms, v.atoms)
    return chain_from_mapping(cube, sigma, u, v)
