"""Molecular descriptors and reward functions.

Implements a self-contained property stack: Wildman-Crippen style logP from
atom-contribution sums, Ertl N/O polar surface area fragments, a documented
complexity-only synthetic-accessibility surrogate, QED from the published
desirability curves, and circular fingerprints with Tanimoto similarity.

Simplifications relative to full cheminformatics toolkits (documented here,
relied on nowhere as exact):
  * HBA counts all N and O atoms except pyrrole-type aromatic N; HBD counts
    N/O atoms carrying at least one hydrogen.
  * Rotatable bonds are non-ring single bonds between two non-terminal
    heavy atoms, excluding bonds adjacent to a triple bond.
  * Structural-alert count is fixed at 0 (no substructure library).
  * Aromaticity: a ring is aromatic when every member is sp2-capable under
    a kekule alternation and the pi-electron count satisfies 4n+2.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import lru_cache
from hashlib import blake2b

from .molgraph import Molecule, MoleculeError

NEG_INF = float("-inf")


# --------------------------------------------------------------- aromaticity


@lru_cache(maxsize=131_072)
def aromatic_rings(mol: Molecule) -> tuple[tuple[int, ...], ...]:
    """Rings that pass the simplified Hueckel test."""
    return tuple(ring for ring in mol.rings if _ring_is_aromatic(mol, ring))


def aromatic_atoms(mol: Molecule) -> frozenset[int]:
    atoms: set[int] = set()
    for ring in aromatic_rings(mol):
        atoms.update(ring)
    return frozenset(atoms)


def _ring_is_aromatic(mol: Molecule, ring: tuple[int, ...]) -> bool:
    members = set(ring)
    pi = 0
    for i in ring:
        in_ring_double = 0
        exo_multiple = False
        for j, order in mol.adjacency[i]:
            if order >= 2:
                if j in members:
                    in_ring_double += 1
                else:
                    exo_multiple = True
        if in_ring_double == 1:
            pi += 1  # one electron from the in-ring double bond
        elif in_ring_double == 0 and not exo_multiple:
            # lone-pair donor: heteroatom with only single bonds
            if mol.atoms[i] in ("N", "O", "S"):
                pi += 2
            else:
                return False
        else:
            return False  # cumulated doubles or exocyclic multiple bond
    return pi % 4 == 2


# --------------------------------------------------------------- descriptors


@dataclass(frozen=True)
class DescriptorVector:
    molecular_weight: float
    alogp: float
    hba: int
    hbd: int
    tpsa: float
    rotatable_bonds: int
    aromatic_rings: int
    ring_sizes: tuple[int, ...]
    alerts: int = 0


def descriptors(mol: Molecule) -> DescriptorVector:
    if len(mol) == 0:
        raise MoleculeError("no descriptors for the empty molecule")
    arom = aromatic_rings(mol)
    arom_atoms = {i for ring in arom for i in ring}
    hba = 0
    hbd = 0
    for i, sym in enumerate(mol.atoms):
        if sym not in ("N", "O"):
            continue
        h = mol.implicit_h(i)
        if h > 0:
            hbd += 1
        pyrrole_like = (
            i in arom_atoms
            and sym == "N"
            and not any(o >= 2 for _, o in mol.adjacency[i])
        )
        if not pyrrole_like:
            hba += 1
    return DescriptorVector(
        molecular_weight=mol.molecular_weight,
        alogp=crippen_logp(mol),
        hba=hba,
        hbd=hbd,
        tpsa=tpsa(mol),
        rotatable_bonds=_rotatable_bonds(mol),
        aromatic_rings=len(arom),
        ring_sizes=tuple(sorted(len(r) for r in mol.rings)),
    )


def _rotatable_bonds(mol: Molecule) -> int:
    ring_bonds = mol.ring_bonds
    triple_atoms = {
        i for i in range(len(mol)) if any(o == 3 for _, o in mol.adjacency[i])
    }
    count = 0
    for a, b, order in mol.bonds:
        if order != 1 or (a, b) in ring_bonds:
            continue
        if mol.degree(a) < 2 or mol.degree(b) < 2:
            continue
        if a in triple_atoms or b in triple_atoms:
            continue
        count += 1
    return count


# ------------------------------------------------------- polar surface area

# Ertl fragment contributions for N and O environments (A^2).
_TPSA_N = {
    "N3": 3.24,  # N(-*)(-*)-*
    "N2=": 12.36,  # N(-*)=*
    "N#": 23.79,  # N#*
    "NH2=": 23.85,  # NH=*
    "NH": 12.03,  # NH(-*)-*
    "NH2": 26.02,  # NH2-*
    "n2": 12.89,  # aromatic :n:
    "n3": 4.41,  # aromatic n with three ring connections
    "n-sub": 4.93,  # aromatic n with exocyclic single bond
    "nH": 15.79,  # aromatic nH
}
_TPSA_O = {
    "O2": 9.23,  # O(-*)-*
    "O=": 17.07,  # O=*
    "OH": 20.23,  # OH-*
    "o": 13.14,  # aromatic o
}


def tpsa(mol: Molecule) -> float:
    arom = aromatic_atoms(mol)
    total = 0.0
    for i, sym in enumerate(mol.atoms):
        h = mol.implicit_h(i)
        deg = mol.degree(i)
        orders = sorted(o for _, o in mol.adjacency[i])
        if sym == "N":
            if i in arom:
                if h > 0:
                    total += _TPSA_N["nH"]
                elif deg == 3:
                    ring_deg = sum(1 for j, _ in mol.adjacency[i] if j in arom)
                    total += _TPSA_N["n3"] if ring_deg == 3 else _TPSA_N["n-sub"]
                else:
                    total += _TPSA_N["n2"]
            elif 3 in orders:
                total += _TPSA_N["N#"]
            elif 2 in orders:
                total += _TPSA_N["NH2="] if h > 0 else _TPSA_N["N2="]
            elif h == 0:
                total += _TPSA_N["N3"]
            elif h == 1:
                total += _TPSA_N["NH"]
            else:
                total += _TPSA_N["NH2"]
        elif sym == "O":
            if i in arom:
                total += _TPSA_O["o"]
            elif 2 in orders:
                total += _TPSA_O["O="]
            elif h > 0:
                total += _TPSA_O["OH"]
            else:
                total += _TPSA_O["O2"]
    return total


# -------------------------------------------------------------- crippen logp

# Wildman-Crippen atom-contribution values for the neutral, stereo-free
# subset of atom types this model can produce or parse.
CRIPPEN = {
    "C1": 0.1441, "C2": 0.0000, "C3": -0.2035, "C4": -0.2051,
    "C5": -0.2783, "C6": 0.1551, "C7": 0.0017, "C8": 0.08452,
    "C9": -0.1444, "C10": -0.0516, "C11": 0.1193, "C12": -0.0967,
    "C18": 0.1581, "C19": 0.2955, "C20": 0.2713, "C21": 0.1360,
    "C22": 0.4619, "C23": 0.5437, "C24": 0.1893, "CS": 0.08129,
    "H1": 0.1230, "H2": -0.2677, "H3": 0.2142, "H4": 0.2980,
    "N1": -1.0190, "N2": -0.7096, "N3": -1.0270, "N4": -0.5188,
    "N5": 0.08387, "N6": 0.1836, "N7": -0.3187, "N8": -0.4458,
    "N9": 0.01508, "N11": -0.3239, "NS": -0.4806,
    "O1": 0.1552, "O2": -0.2893, "O3": -0.0684, "O4": 0.4833,
    "O5": 0.0335, "O9": -0.1526, "O10": 0.1129, "OS": -0.1188,
    "F": 0.4202, "Cl": 0.6895, "Br": 0.8456, "I": 0.8857,
    "S1": 0.6482, "S3": 0.6237, "P": 0.8612, "B": 0.1800,
}


def crippen_logp(mol: Molecule) -> float:
    """Atom-contribution logP over heavy atoms and their implicit hydrogens."""
    if len(mol) == 0:
        raise MoleculeError("no logP for the empty molecule")
    rings = aromatic_rings(mol)
    arom = frozenset(i for ring in rings for i in ring)
    arom_bonds: set[tuple[int, int]] = set()
    for ring in rings:
        for k in range(len(ring)):
            u, v = ring[k], ring[(k + 1) % len(ring)]
            arom_bonds.add((min(u, v), max(u, v)))
    total = 0.0
    for i in range(len(mol)):
        atom_type, h_type = _crippen_type(mol, i, arom, arom_bonds)
        total += CRIPPEN[atom_type]
        total += CRIPPEN[h_type] * mol.implicit_h(i)
    return total


def _crippen_type(
    mol: Molecule,
    i: int,
    arom: frozenset[int],
    arom_bonds: set[tuple[int, int]],
) -> tuple[str, str]:
    sym = mol.atoms[i]
    adj = mol.adjacency[i]
    h = mol.implicit_h(i)
    nbr_syms = [mol.atoms[j] for j, _ in adj]
    max_order = max((o for _, o in adj), default=1)
    hetero = [s for s in nbr_syms if s not in ("C", "H")]
    multiple_to_hetero = any(
        o >= 2 and mol.atoms[j] not in ("C",) for j, o in adj
    )
    arom_nbrs = [j for j, _ in adj if j in arom]

    if sym == "C":
        if i in arom:
            if h > 0:
                return "C18", "H1"
            exo = [
                (j, o)
                for j, o in adj
                if (min(i, j), max(i, j)) not in arom_bonds
            ]
            if len(adj) - len(exo) >= 3:
                return "C19", "H1"  # ring-fusion carbon
            if not exo:
                return "C18", "H1"
            j, _ = exo[0]
            exo_sym = mol.atoms[j]
            if exo_sym == "C":
                return ("C20" if j in arom else "C21"), "H1"
            if exo_sym == "N":
                return "C22", "H1"
            if exo_sym == "O":
                return "C23", "H1"
            if exo_sym == "S":
                return "C24", "H1"
            return "CS", "H1"
        if max_order == 3:
            return "C7", "H1"
        if max_order == 2:
            return ("C5" if multiple_to_hetero else "C6"), "H1"
        # sp3 carbon; heteroatom attachment outranks aromatic attachment
        if hetero:
            return ("C3" if h >= 1 else "C4"), "H1"
        if arom_nbrs:
            if h >= 3:
                j = arom_nbrs[0]
                return ("C8" if mol.atoms[j] == "C" else "C9"), "H1"
            if h == 2:
                return "C10", "H1"
            if h == 1:
                return "C11", "H1"
            return "C12", "H1"
        if len(adj) >= 3:
            return "C2", "H1"
        return "C1", "H1"

    if sym == "N":
        if i in arom:
            return "N11", "H3"
        if max_order == 3:
            return "N9", "H3"
        if max_order == 2:
            return ("N5" if h > 0 else "N6"), "H3"
        aryl = bool(arom_nbrs)
        if h >= 2:
            return ("N3" if aryl else "N1"), "H3"
        if h == 1:
            return ("N4" if aryl else "N2"), "H3"
        return ("N8" if aryl else "N7"), "H3"

    if sym == "O":
        if i in arom:
            return "O1", "H2"
        if max_order >= 2:
            j, _ = next((j, o) for j, o in adj if o >= 2)
            if mol.atoms[j] == "N":
                return "O5", "H2"
            # carbonyl: aldehyde/formaldehyde O is O10, others O9
            if mol.atoms[j] == "C" and mol.implicit_h(j) >= 1:
                return "O10", "H2"
            return "O9", "H2"
        if h > 0:
            h_type = "H2"
            # hydroxyl on a carbonyl carbon (carboxylic acid) binds H tighter
            for j, _ in adj:
                if mol.atoms[j] == "C" and any(
                    o >= 2 and mol.atoms[k] in ("C", "N", "O", "S")
                    for k, o in mol.adjacency[j]
                ):
                    h_type = "H4"
            return "O2", h_type
        if arom_nbrs:
            return "O4", "H2"
        return "O3", "H2"

    if sym == "S":
        return ("S3" if i in arom else "S1"), "H2"
    if sym in ("F", "Cl", "Br", "I", "P", "B"):
        return sym if sym != "P" else "P", "H2"
    return "CS", "H1"


# ------------------------------------------------- synthetic accessibility


# Complexity-only surrogate constants (documented, not fitted): a floor of
# 1.0 for the simplest molecule, then monotone growth in size and ring
# complexity.
SA_SIZE_COEFF = 0.05  # per heavy atom beyond the first
SA_RING_COEFF = 0.25  # per ring
SA_FUSED_COEFF = 0.5  # per fused ring pair (sharing a bond)
SA_SPIRO_COEFF = 0.5  # per spiro ring pair (sharing one atom)
SA_MACRO_COEFF = 0.3  # per ring larger than 8 atoms


def sa_surrogate(mol: Molecule) -> float:
    if len(mol) == 0:
        raise MoleculeError("no SA score for the empty molecule")
    rings = [frozenset(r) for r in mol.rings]
    fused = spiro = 0
    for i in range(len(rings)):
        for j in range(i + 1, len(rings)):
            shared = len(rings[i] & rings[j])
            if shared == 2:
                fused += 1
            elif shared == 1:
                spiro += 1
    macro = sum(1 for r in mol.rings if len(r) > 8)
    return (
        1.0
        + SA_SIZE_COEFF * (len(mol) - 1)
        + SA_RING_COEFF * len(rings)
        + SA_FUSED_COEFF * fused
        + SA_SPIRO_COEFF * spiro
        + SA_MACRO_COEFF * macro
    )


def long_cycle_penalty(mol: Molecule) -> float:
    largest = max((len(r) for r in mol.rings), default=0)
    return float(max(0, largest - 6))


@lru_cache(maxsize=131_072)
def penalized_logp(mol: Molecule) -> float:
    return crippen_logp(mol) - sa_surrogate(mol) - long_cycle_penalty(mol)


# ------------------------------------------------------------------- QED

# Asymmetric double sigmoid desirability parameters (a, b, c, d, e, f, dmax)
# and geometric-mean weights, per descriptor, from the published QED model.
_ADS_PARAMS = {
    "MW": (2.817065973, 392.5754953, 290.7489764, 2.419764353, 49.22325677, 65.37051707, 104.9805561),
    "ALOGP": (3.172690585, 137.8624751, 2.534937431, 4.581497897, 0.822739154, 0.576295591, 131.3186604),
    "HBA": (2.948620388, 160.4605972, 3.615294657, 4.435986202, 0.290141953, 1.300669958, 148.7763046),
    "HBD": (1.618662227, 1010.051101, 0.985094388, 0.000000001, 0.713820843, 0.920922555, 258.1632616),
    "PSA": (1.876861559, 125.2232657, 62.90773554, 87.83366614, 12.01999824, 28.51324732, 104.5686167),
    "ROTB": (0.010000000, 272.4121427, 2.558379970, 1.565547684, 1.271567166, 2.758063707, 105.4420403),
    "AROM": (3.217788970, 957.7374108, 2.274627939, 0.000000001, 1.317690384, 0.375760881, 312.3372610),
    "ALERTS": (0.010000000, 1199.094025, -0.09002883, 0.000000001, 0.185904477, 0.875193782, 417.7253140),
}
_QED_WEIGHTS = {
    "MW": 0.66, "ALOGP": 0.46, "HBA": 0.05, "HBD": 0.61,
    "PSA": 0.06, "ROTB": 0.65, "AROM": 0.48, "ALERTS": 0.95,
}


def _ads(x: float, a, b, c, d, e, f, dmax) -> float:
    val = a + b / (1 + math.exp(-(x - c + d / 2) / e)) * (
        1 - 1 / (1 + math.exp(-(x - c - d / 2) / f))
    )
    return min(max(val / dmax, 1e-6), 1.0)


@lru_cache(maxsize=131_072)
def qed(mol: Molecule) -> float:
    """Weighted geometric mean of the eight desirability values, in [0, 1]."""
    d = descriptors(mol)
    values = {
        "MW": d.molecular_weight,
        "ALOGP": d.alogp,
        "HBA": float(d.hba),
        "HBD": float(d.hbd),
        "PSA": d.tpsa,
        "ROTB": float(d.rotatable_bonds),
        "AROM": float(d.aromatic_rings),
        "ALERTS": float(d.alerts),
    }
    num = 0.0
    for key, x in values.items():
        num += _QED_WEIGHTS[key] * math.log(_ads(x, *_ADS_PARAMS[key]))
    return math.exp(num / sum(_QED_WEIGHTS.values()))


# ------------------------------------------------------------- fingerprints


@dataclass(frozen=True)
class Fingerprint:
    bits: frozenset[int]
    width: int = 2048


@lru_cache(maxsize=131_072)
def fingerprint(mol: Molecule, radius: int = 2, width: int = 2048) -> Fingerprint:
    """Circular-neighborhood hashing over local atom invariants."""
    if len(mol) == 0:
        raise MoleculeError("no fingerprint for the empty molecule")
    in_ring = mol.ring_membership()
    current = []
    for i in range(len(mol)):
        seed = (
            mol.atoms[i],
            len(mol.adjacency[i]),
            mol.bond_order_sum(i),
            mol.implicit_h(i),
            1 if in_ring[i] else 0,
        )
        current.append(_hash_invariant(repr(seed).encode()))
    bits = set(current)
    for _ in range(radius):
        nxt = []
        for i in range(len(mol)):
            env = sorted((order, current[j]) for j, order in mol.adjacency[i])
            payload = struct.pack(
                f"<{1 + 2 * len(env)}Q",
                current[i],
                *(x for pair in env for x in pair),
            )
            nxt.append(_hash_invariant(payload))
        current = nxt
        bits.update(current)
    return Fingerprint(frozenset(h % width for h in bits), width)


def _hash_invariant(payload: bytes) -> int:
    return int.from_bytes(blake2b(payload, digest_size=8).digest(), "little")


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    if a.width != b.width:
        raise ValueError("fingerprint width mismatch")
    if not a.bits and not b.bits:
        return 1.0
    return len(a.bits & b.bits) / len(a.bits | b.bits)


# --------------------------------------------------------------- objectives


class Objective:
    """A scorer mapping molecules to rewards.

    ``bounds`` is a (lo, hi) pair for bounded objectives, else None; the
    search uses it to decide how rewards are normalized before scaling.
    """

    name: str = "objective"
    bounds: tuple[float, float] | None = None

    def score(self, mol: Molecule) -> float:
        raise NotImplementedError


class QedObjective(Objective):
    name = "qed"
    bounds = (0.0, 1.0)

    def score(self, mol: Molecule) -> float:
        if len(mol) == 0:
            return 0.0
        return qed(mol)


class PenalizedLogPObjective(Objective):
    name = "plogp"
    bounds = None

    def score(self, mol: Molecule) -> float:
        if len(mol) == 0:
            return NEG_INF
        return penalized_logp(mol)


class ConstrainedObjective(Objective):
    """Penalized logP gated by fingerprint similarity to a start molecule.

    Molecules below the similarity threshold score negative infinity and
    are excluded from tree expansion.
    """

    bounds = None

    def __init__(self, start: Molecule, delta: float):
        if not 0.0 <= delta <= 1.0:
            raise ValueError("delta must be in [0, 1]")
        self.start = start
        self.delta = delta
        self._start_fp = fingerprint(start)
        self.name = f"plogp@sim>={delta}"

    def similarity(self, mol: Molecule) -> float:
        if len(mol) == 0:
            return 0.0
        return tanimoto(fingerprint(mol), self._start_fp)

    def feasible(self, mol: Molecule) -> bool:
        return self.similarity(mol) >= self.delta

    def score(self, mol: Molecule) -> float:
        if len(mol) == 0 or not self.feasible(mol):
            return NEG_INF
        return penalized_logp(mol)


def constrained_objective(start: Molecule, delta: float) -> ConstrainedObjective:
    return ConstrainedObjective(start, delta)
