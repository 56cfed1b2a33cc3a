#!/usr/bin/env python3
"""One-time generator for the frozen logP golden file.

Recomputes atom-contribution logP for the bundled corpus with a second,
independently written atom typer (flat rule list over neighbor profiles,
separate from the production typer) and writes
``src/unitmcts/data/crippen_golden.csv``.  Run manually; tests read the
frozen CSV and never invoke this script.
"""

from __future__ import annotations

import csv
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from unitmcts import smiles  # noqa: E402
from unitmcts.harness import load_molecule_list  # noqa: E402
from unitmcts.molgraph import Molecule  # noqa: E402
from unitmcts.properties import aromatic_rings  # noqa: E402

# Published atom-contribution values, restated here on purpose (the golden
# generator must not import the production table).
VALUES = {
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


def profile(mol: Molecule, i: int, arom: set[int], arom_edges: set) -> dict:
    nbrs = [(j, o, mol.atoms[j]) for j, o in mol.adjacency[i]]
    return {
        "sym": mol.atoms[i],
        "h": mol.implicit_h(i),
        "arom": i in arom,
        "nbrs": nbrs,
        "arom_link": [
            (j, o, s) for j, o, s in nbrs if (min(i, j), max(i, j)) in arom_edges
        ],
        "plain": [
            (j, o, s) for j, o, s in nbrs if (min(i, j), max(i, j)) not in arom_edges
        ],
        "maxo": max((o for _, o, _ in nbrs), default=1),
    }


def type_atom(p: dict, mol: Molecule, arom: set[int]) -> tuple[str, str]:
    sym, h = p["sym"], p["h"]
    if sym == "C":
        if p["arom"]:
            if h:
                return "C18", "H1"
            if len(p["arom_link"]) >= 3:
                return "C19", "H1"
            if not p["plain"]:
                return "C18", "H1"
            j, _, s = p["plain"][0]
            if s == "C":
                return ("C20" if j in arom else "C21"), "H1"
            return {"N": "C22", "O": "C23", "S": "C24"}.get(s, "CS"), "H1"
        if p["maxo"] == 3:
            return "C7", "H1"
        if p["maxo"] == 2:
            hetero_multi = any(o >= 2 and s != "C" for _, o, s in p["nbrs"])
            return ("C5" if hetero_multi else "C6"), "H1"
        if any(s != "C" for _, _, s in p["nbrs"]):
            return ("C3" if h else "C4"), "H1"
        if any(j in arom for j, _, _ in p["nbrs"]):
            if h >= 3:
                j = next(j for j, _, _ in p["nbrs"] if j in arom)
                return ("C8" if mol.atoms[j] == "C" else "C9"), "H1"
            return {2: "C10", 1: "C11"}.get(h, "C12"), "H1"
        return ("C2" if len(p["nbrs"]) >= 3 else "C1"), "H1"
    if sym == "N":
        if p["arom"]:
            return "N11", "H3"
        if p["maxo"] == 3:
            return "N9", "H3"
        if p["maxo"] == 2:
            return ("N5" if h else "N6"), "H3"
        aryl = any(j in arom for j, _, _ in p["nbrs"])
        table = {2: ("N3", "N1"), 1: ("N4", "N2"), 0: ("N8", "N7")}
        pair = table.get(min(h, 2), ("N8", "N7"))
        return (pair[0] if aryl else pair[1]), "H3"
    if sym == "O":
        if p["arom"]:
            return "O1", "H2"
        if p["maxo"] >= 2:
            j = next(j for j, o, _ in p["nbrs"] if o >= 2)
            if mol.atoms[j] == "N":
                return "O5", "H2"
            if mol.atoms[j] == "C" and mol.implicit_h(j) >= 1:
                return "O10", "H2"
            return "O9", "H2"
        if h:
            acid = any(
                mol.atoms[j] == "C"
                and any(o2 >= 2 and mol.atoms[k] in "CNOS" for k, o2 in mol.adjacency[j])
                for j, _, _ in p["nbrs"]
            )
            return "O2", ("H4" if acid else "H2")
        if any(j in arom for j, _, _ in p["nbrs"]):
            return "O4", "H2"
        return "O3", "H2"
    if sym == "S":
        return ("S3" if p["arom"] else "S1"), "H2"
    if sym in ("F", "Cl", "Br", "I", "P", "B"):
        return sym, "H2"
    return "CS", "H1"


def logp(mol: Molecule) -> float:
    rings = aromatic_rings(mol)
    arom = {i for r in rings for i in r}
    edges = set()
    for r in rings:
        for k in range(len(r)):
            u, v = r[k], r[(k + 1) % len(r)]
            edges.add((min(u, v), max(u, v)))
    total = 0.0
    for i in range(len(mol)):
        p = profile(mol, i, arom, edges)
        atom_t, h_t = type_atom(p, mol, arom)
        total += VALUES[atom_t] + VALUES[h_t] * p["h"]
    return total


def main() -> None:
    root = Path(__file__).resolve().parents[1] / "src" / "unitmcts" / "data"
    loaded = load_molecule_list(root / "sample_start_set.smi")
    assert not loaded.errors, loaded.errors
    out = root / "crippen_golden.csv"
    with out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["canonical_smiles", "descriptor_name", "value"])
        for mol in loaded.molecules:
            writer.writerow([smiles.write_canonical(mol), "crippen_logp", f"{logp(mol):.6f}"])
    print(f"wrote {out} ({len(loaded.molecules)} molecules)")


if __name__ == "__main__":
    main()
