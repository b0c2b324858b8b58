import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from krcube import (
    ClopenSet,
    ClosedSet,
    InvalidInput,
    PartialHomeo,
    ResolutionInsufficiency,
    RestrictionError,
    chain_from_mapping,
    clopen_homeo,
    clopen_retraction,
    compose,
    identity_chain,
    invert,
    project_tower,
    restrict,
    single_block_cube,
    validate_chain,
    verify_extension,
)

C2 = single_block_cube(2)
C3 = single_block_cube(3)


def bitflip_chain(cube, position=0):
    def flip(a):
        return a[:position] + ("1" if a[position] == "0" else "0") + a[position + 1:]
    return chain_from_mapping(cube, {a: flip(a) for a in cube.atoms()})


def complement_chain(cube):
    comp = {a: "".join("1" if c == "0" else "0" for c in a) for a in cube.atoms()}
    return chain_from_mapping(cube, comp)


def permutations_of_atoms(cube):
    atoms = sorted(cube.atoms())
    return st.permutations(atoms).map(lambda ys: chain_from_mapping(
        cube, dict(zip(atoms, ys))))


# ---------------------------------------------------------------------------
# Towers
# ---------------------------------------------------------------------------

def test_tower_build_and_inverse():
    p = ClosedSet.from_words(C2, ["00"])
    k = ClosedSet.from_words(C2, ["11"])
    f = PartialHomeo.from_atom_map(p, k, {"00": "11"})
    assert f.level_map(1) == {"0_": "1_"}
    assert f.inverse().level_map(2) == {"11": "00"}
    assert f.inverse().inverse() == f


def test_tower_rejects_level_incompatibility():
    p = ClosedSet.from_words(C2, ["00", "01"])
    k = ClosedSet.from_words(C2, ["10", "01"])
    # 00 and 01 share the depth-1 cell but their images do not
    with pytest.raises(RestrictionError):
        PartialHomeo.from_atom_map(p, k, {"00": "10", "01": "01"})


def test_tower_rejects_non_bijection():
    p = ClosedSet.from_words(C2, ["00", "11"])
    k = ClosedSet.from_words(C2, ["00", "11"])
    with pytest.raises(InvalidInput):
        PartialHomeo.build(p, k, [{"0_": "0_", "1_": "0_"},
                                  {"00": "00", "11": "11"}])


def test_empty_tower():
    f = PartialHomeo.empty(C2)
    assert f.is_empty and f.atom_map == {}


# ---------------------------------------------------------------------------
# Chain construction and validity
# ---------------------------------------------------------------------------

def test_identity_chain_stages():
    h = identity_chain(C2)
    assert validate_chain(h) == []
    stage1 = h.stages[0]
    assert [(min(u.atoms), min(v.atoms)) for u, v in stage1.pairs] == \
        [("00", "00"), ("10", "10")]
    assert len(h.stages) == 2
    assert all(len(u.atoms) == 1 for u, v in h.stages[1].pairs)


def test_chain_requires_bijection():
    with pytest.raises(InvalidInput):
        chain_from_mapping(C2, {"00": "00", "01": "00", "10": "10", "11": "11"})


@settings(max_examples=60)
@given(permutations_of_atoms(C3))
def test_random_chains_are_valid(h):
    assert validate_chain(h) == []


# ---------------------------------------------------------------------------
# Group laws
# ---------------------------------------------------------------------------

def test_compose_identity_laws():
    h = bitflip_chain(C2)
    e = identity_chain(C2)
    assert compose(e, h) == h
    assert compose(h, e) == h


def test_compose_inverse_law():
    h = bitflip_chain(C2, 1)
    assert compose(h, invert(h)) == identity_chain(C2)
    assert compose(invert(h), h) == identity_chain(C2)


def test_bitflip_squares_to_identity():
    h = bitflip_chain(C2)
    want = {a: a for a in C2.atoms()}
    assert compose(h, h).mapping == want


def test_invert_examples():
    assert invert(identity_chain(C2)) == identity_chain(C2)
    h = chain_from_mapping(C2, {"00": "11", "01": "10", "10": "00", "11": "01"})
    assert invert(invert(h)) == h
    assert invert(h).mapping == {"11": "00", "10": "01", "00": "10", "01": "11"}


@settings(max_examples=40)
@given(permutations_of_atoms(C2), permutations_of_atoms(C2), permutations_of_atoms(C2))
def test_compose_associative(f, g, h):
    assert compose(compose(f, g), h) == compose(f, compose(g, h))


@settings(max_examples=40)
@given(permutations_of_atoms(C2))
def test_invert_is_two_sided_inverse(h):
    assert compose(h, invert(h)) == identity_chain(C2)
    assert compose(invert(h), h) == identity_chain(C2)


def test_compose_cube_mismatch():
    with pytest.raises(InvalidInput):
        compose(identity_chain(C2), identity_chain(C3))


# ---------------------------------------------------------------------------
# Restriction and verification
# ---------------------------------------------------------------------------

def test_restrict_identity():
    p = ClosedSet.from_words(C2, ["00", "11"])
    got = restrict(identity_chain(C2), p)
    assert got == PartialHomeo.identity(p)


def test_restrict_complement_chain_on_zero_ray():
    p = ClosedSet.from_words(C3, ["000"])
    got = restrict(complement_chain(C3), p)
    assert got.level_map(1) == {"0__": "1__"}
    assert got.level_map(2) == {"00_": "11_"}
    assert got.level_map(3) == {"000": "111"}


def test_restrict_empty_set():
    got = restrict(identity_chain(C2), ClosedSet.empty(C2))
    assert got.is_empty


def test_restrict_reports_offender():
    # 00 -> 00 but 01 -> 10 breaks the depth-1 cell [0]
    h = chain_from_mapping(C2, {"00": "00", "01": "10", "10": "01", "11": "11"})
    p = ClosedSet.from_words(C2, ["00", "01"])
    with pytest.raises(RestrictionError) as exc:
        restrict(h, p)
    assert exc.value.witness == "0_"


def test_verify_extension_pass_and_fail():
    p = ClosedSet.from_words(C2, ["00"])
    ident_tower = PartialHomeo.identity(p)
    assert verify_extension(identity_chain(C2), ident_tower).ok

    k = ClosedSet.from_words(C2, ["11"])
    ray = PartialHomeo.from_atom_map(p, k, {"00": "11"})
    assert verify_extension(complement_chain(C2), ray).ok

    report = verify_extension(identity_chain(C2), ray)
    assert not report.ok
    assert any("0" in w for _, w in report.entries)


# ---------------------------------------------------------------------------
# Canonical clopen homeomorphisms
# ---------------------------------------------------------------------------

def test_clopen_homeo_identity_piece():
    u = ClopenSet.from_cylinders(C2, ["0_"])
    h = clopen_homeo(u, u)
    assert h.mapping == {"00": "00", "01": "01"}
    assert h.domain_support == u and h.codomain_support == u


def test_clopen_homeo_suffix_transplant():
    u = ClopenSet.from_cylinders(C3, ["1__"])
    v = ClopenSet.from_cylinders(C3, ["0__"])
    h = clopen_homeo(u, v)
    assert h.mapping == {"1" + s: "0" + s for s in ("00", "01", "10", "11")}


def test_clopen_homeo_resolution_insufficiency():
    cube = single_block_cube(1)
    with pytest.raises(ResolutionInsufficiency):
        clopen_homeo(ClopenSet.full(cube), ClopenSet.from_cylinders(cube, ["0"]))


def test_clopen_homeo_ragged_but_aligned():
    u = ClopenSet.from_atoms(C2, {"00", "11"})
    v = ClopenSet.from_atoms(C2, {"01", "10"})
    h = clopen_homeo(u, v)
    assert h.mapping == {"00": "01", "11": "10"}
    # deterministic: repeated runs agree bit for bit
    assert h == clopen_homeo(u, v)
    assert validate_chain(h) == []


def test_clopen_homeo_equal_measure_can_still_be_forced_below_depth():
    # equal atom counts do not rescue the bisection rule when the split
    # cardinalities disagree; the mismatch persists at every depth
    u = ClopenSet.from_atoms(C2, {"00", "01", "10"})
    v = ClopenSet.from_atoms(C2, {"00", "10", "11"})
    with pytest.raises(ResolutionInsufficiency):
        clopen_homeo(u, v)


def test_clopen_homeo_rejects_empty():
    with pytest.raises(InvalidInput):
        clopen_homeo(ClopenSet.empty(C2), ClopenSet.full(C2))


# ---------------------------------------------------------------------------
# Retraction
# ---------------------------------------------------------------------------

def test_retraction_identity_on_full():
    r = clopen_retraction(ClosedSet.full(C2))
    assert r == {a: a for a in C2.atoms()}


def test_retraction_single_point():
    q = ClosedSet.from_words(C2, ["00"])
    r = clopen_retraction(q)
    assert set(r.values()) == {"00"}


def test_retraction_halfcube_example():
    q = ClosedSet.from_words(C2, ["00", "01"])
    r = clopen_retraction(q)
    assert r["10"] == "00"
    assert r["11"] == "01"
    assert r["00"] == "00" and r["01"] == "01"


def test_retraction_idempotent_fixes_q():
    q = ClosedSet.from_words(C3, ["000", "011", "110"])
    r = clopen_retraction(q)
    for w, v in r.items():
        assert v in q.atoms
        assert r[v] == v


def test_retraction_errors_on_empty():
    with pytest.raises(InvalidInput):
        clopen_retraction(ClosedSet.empty(C2))


# ---------------------------------------------------------------------------
# Tower projection
# ---------------------------------------------------------------------------

def test_project_tower_factoring():
    from krcube import Block, Cube
    cube = Cube((Block("A", ("a",)), Block("B", ("b",))))
    p = ClosedSet.from_words(cube, ["00", "10"])
    k = ClosedSet.from_words(cube, ["01", "11"])
    f = PartialHomeo.from_atom_map(p, k, {"00": "01", "10": "11"})
    g = project_tower(f, ["a"])
    assert g.atom_map == {"0": "0", "1": "1"}


def test_project_tower_detects_non_factoring():
    # a valid tower whose second A-coordinate is twisted by the B-coordinate:
    # word layout a1 a2 b1
    from krcube import Block, Cube
    cube = Cube((Block("A", ("a1", "a2")), Block("B", ("b1",))))
    full = ClosedSet.full(cube)
    twist = {}
    for w in cube.atoms():
        a1, a2, b1 = w
        twist[w] = a1 + str(int(a2) ^ int(b1)) + b1
    f = PartialHomeo.from_atom_map(full, full, twist)
    with pytest.raises(RestrictionError):
        project_tower(f, ["a1", "a2"])
