"""Subset SMILES reader and canonical writer.

Supported input: organic-subset atoms B C N O P S F Cl Br I, aromatic
b c n o p s, bonds ``- = # :``, branches, ring closures (``1``-``9`` and
``%nn``), and bracket atoms with H count and charge.  Charges, isotopes and
stereo markers are dropped with a warning; dot-disconnected inputs are
rejected.  Aromatic rings are kekulized at parse time, so stored molecules
only ever carry integer bond orders.

Output is always kekulized, written by DFS from the atom with the smallest
canonical rank, neighbors in ascending rank order.
"""

from __future__ import annotations

import re
import warnings
from functools import lru_cache

import networkx as nx

from .molgraph import MAX_VALENCE, Molecule, MoleculeError


class SmilesError(ValueError):
    """Malformed or unsupported SMILES input."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)
        self.offset = offset


class SmilesWarning(UserWarning):
    """Input feature (charge, isotope, stereo) dropped during parsing."""


_ORGANIC = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")
_AROMATIC = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S"}
_BOND_ORDER = {"-": 1, "=": 2, "#": 3}

_BRACKET_RE = re.compile(
    r"^(?P<isotope>\d+)?(?P<symbol>[A-Z][a-z]?|[bcnops])(?P<chiral>@{1,2})?"
    r"(?P<hcount>H\d*)?(?P<charge>[+-]\d*|[+]+|[-]+)?(?P<map>:\d+)?$"
)


def parse(text: str) -> Molecule:
    """Parse a single SMILES string into a kekulized Molecule."""
    atoms: list[str] = []  # element symbols
    aromatic: list[bool] = []
    explicit_h: list[int | None] = []  # bracket H counts, for kekulization only
    bonds: dict[tuple[int, int], int | None] = {}  # None = aromatic bond
    prev_stack: list[int | None] = []
    prev: int | None = None
    pending_bond: int | None | str = "none"  # "none" | explicit order | None(aromatic)
    ring_open: dict[int, tuple[int, int | None | str]] = {}

    def add_atom(symbol: str, is_aromatic: bool, offset: int, hcount: int | None = None) -> None:
        nonlocal prev, pending_bond
        idx = len(atoms)
        atoms.append(symbol)
        aromatic.append(is_aromatic)
        explicit_h.append(hcount)
        if prev is not None:
            order = _resolve_order(pending_bond, aromatic[prev] and is_aromatic)
            bonds[(min(prev, idx), max(prev, idx))] = order
        pending_bond = "none"
        prev = idx

    def close_ring(digit: int, offset: int) -> None:
        nonlocal pending_bond
        if prev is None:
            raise SmilesError("ring closure before any atom", offset)
        if digit in ring_open:
            other, opened_bond = ring_open.pop(digit)
            if other == prev:
                raise SmilesError(f"ring closure {digit} forms a self-loop", offset)
            spec = pending_bond if pending_bond != "none" else opened_bond
            if (
                pending_bond != "none"
                and opened_bond != "none"
                and pending_bond != opened_bond
            ):
                raise SmilesError(f"conflicting bond orders on ring closure {digit}", offset)
            key = (min(other, prev), max(other, prev))
            if key in bonds:
                raise SmilesError(f"duplicate bond via ring closure {digit}", offset)
            bonds[key] = _resolve_order(spec, aromatic[other] and aromatic[prev])
        else:
            ring_open[digit] = (prev, pending_bond)
        pending_bond = "none"

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in "-=#":
            if pending_bond != "none":
                raise SmilesError("two bond symbols in a row", i)
            pending_bond = _BOND_ORDER[ch]
            i += 1
        elif ch == ":":
            pending_bond = None
            i += 1
        elif ch in "/\\":
            warnings.warn("stereo bond marker dropped", SmilesWarning, stacklevel=2)
            i += 1
        elif ch == "(":
            if prev is None:
                raise SmilesError("branch before any atom", i)
            prev_stack.append(prev)
            i += 1
        elif ch == ")":
            if not prev_stack:
                raise SmilesError("unbalanced ')'", i)
            prev = prev_stack.pop()
            i += 1
        elif ch == ".":
            raise SmilesError("dot-disconnected input not supported", i)
        elif ch.isdigit():
            close_ring(int(ch), i)
            i += 1
        elif ch == "%":
            m = re.match(r"%(\d\d)", text[i:])
            if not m:
                raise SmilesError("bad %nn ring closure", i)
            close_ring(int(m.group(1)), i)
            i += 3
        elif ch == "[":
            end = text.find("]", i)
            if end < 0:
                raise SmilesError("unterminated bracket atom", i)
            symbol, is_arom, hcount = _parse_bracket(text[i + 1 : end], i)
            add_atom(symbol, is_arom, i, hcount)
            i = end + 1
        else:
            matched = False
            for sym in _ORGANIC:
                if text.startswith(sym, i):
                    add_atom(sym, False, i)
                    i += len(sym)
                    matched = True
                    break
            if not matched:
                if ch in _AROMATIC:
                    add_atom(_AROMATIC[ch], True, i)
                    i += 1
                elif ch.isspace():
                    break  # trailing whitespace / title field
                else:
                    raise SmilesError(f"unexpected character {ch!r}", i)
    if prev_stack:
        raise SmilesError("unbalanced '('")
    if ring_open:
        raise SmilesError(f"unpaired ring closure digits {sorted(ring_open)}")

    fixed = _kekulize(atoms, aromatic, explicit_h, bonds)
    mol = Molecule(tuple(atoms), tuple(sorted((a, b, o) for (a, b), o in fixed.items())))
    try:
        mol.validate()
    except MoleculeError as exc:
        raise SmilesError(f"parsed molecule invalid: {exc}") from exc
    return mol


def _resolve_order(spec: int | None | str, both_aromatic: bool) -> int | None:
    """Map a pending bond token to a stored order; None marks aromatic."""
    if spec == "none":
        return None if both_aromatic else 1
    return spec  # explicit order, or None for ':'


def _parse_bracket(body: str, offset: int) -> tuple[str, bool, int | None]:
    m = _BRACKET_RE.match(body)
    if not m:
        raise SmilesError(f"unsupported bracket atom [{body}]", offset)
    if m.group("isotope"):
        warnings.warn("isotope label dropped", SmilesWarning, stacklevel=3)
    if m.group("chiral"):
        warnings.warn("stereocenter marker dropped", SmilesWarning, stacklevel=3)
    if m.group("charge"):
        warnings.warn("formal charge dropped", SmilesWarning, stacklevel=3)
    sym = m.group("symbol")
    hfield = m.group("hcount")
    hcount: int | None = None
    if hfield is not None:
        hcount = int(hfield[1:]) if len(hfield) > 1 else 1
    if sym in _AROMATIC:
        return _AROMATIC[sym], True, hcount
    if sym == "H":
        raise SmilesError("bare hydrogen atoms not supported", offset)
    if sym not in MAX_VALENCE:
        raise SmilesError(f"unknown element {sym!r}", offset)
    # the H count informs kekulization; implicit H is recomputed from valence
    return sym, False, hcount


def _kekulize(
    atoms: list[str],
    aromatic: list[bool],
    explicit_h: list[int | None],
    bonds: dict[tuple[int, int], int | None],
) -> dict[tuple[int, int], int]:
    """Assign alternating single/double orders to aromatic bonds.

    Aromatic carbons need exactly one double bond; aromatic nitrogens need
    one unless they carry a substituent or hydrogen filling the third
    valence (pyrrole-type, detected by degree 3); aromatic O/S donate a
    lone pair and never take one.
    """
    arom_bonds = [key for key, order in bonds.items() if order is None]
    if not arom_bonds:
        return {k: (v if v is not None else 1) for k, v in bonds.items()}

    degree: dict[int, int] = {}
    for a, b in bonds:
        degree[a] = degree.get(a, 0) + 1
        degree[b] = degree.get(b, 0) + 1
    needs_double = set()
    for i, sym in enumerate(atoms):
        if not aromatic[i]:
            continue
        if sym in ("O", "S"):
            continue
        if sym == "N" and (degree.get(i, 0) >= 3 or (explicit_h[i] or 0) > 0):
            continue
        if sym == "B":
            continue
        needs_double.add(i)

    graph = nx.Graph()
    graph.add_nodes_from(needs_double)
    for a, b in arom_bonds:
        if a in needs_double and b in needs_double:
            graph.add_edge(a, b)
    matching = nx.max_weight_matching(graph, maxcardinality=True)
    matched = {a for pair in matching for a in pair}
    if matched != needs_double:
        missing = sorted(needs_double - matched)
        raise SmilesError(f"unkekulizable aromatic system (atoms {missing})")

    double = {(min(a, b), max(a, b)) for a, b in matching}
    out: dict[tuple[int, int], int] = {}
    for key, order in bonds.items():
        if order is None:
            out[key] = 2 if key in double else 1
        else:
            out[key] = order
    return out


# ------------------------------------------------------------------ writing


@lru_cache(maxsize=200_000)
def write_canonical(mol: Molecule) -> str:
    """Deterministic, relabeling-invariant SMILES for a valid molecule."""
    n = len(mol)
    if n == 0:
        return ""
    ranks = mol.canonical_ranks()
    by_rank = sorted(range(n), key=lambda i: ranks[i])
    root = by_rank[0]

    # pass 1: DFS tree in rank order
    children: dict[int, list[int]] = {i: [] for i in range(n)}
    preorder: dict[int, int] = {}
    tree_edges: set[tuple[int, int]] = set()

    def build(u: int) -> None:
        preorder[u] = len(preorder)
        for v, _ in sorted(mol.adjacency[u], key=lambda t: ranks[t[0]]):
            if v not in preorder:
                children[u].append(v)
                tree_edges.add((min(u, v), max(u, v)))
                build(v)

    build(root)

    # back edges become ring-closure digits, opened at the earlier atom
    closures: dict[int, list[tuple[int, int]]] = {i: [] for i in range(n)}  # atom -> [(other, order)]
    for a, b, order in mol.bonds:
        if (a, b) in tree_edges:
            continue
        first, second = (a, b) if preorder[a] < preorder[b] else (b, a)
        closures[first].append((second, order))
        closures[second].append((first, order))
    for i in closures:
        closures[i].sort(key=lambda t: preorder[t[0]])

    digit_of: dict[tuple[int, int], int] = {}
    free_digits = list(range(1, 100))
    out: list[str] = []

    def emit(u: int, bond_from_parent: int | None) -> None:
        if bond_from_parent is not None:
            out.append(_bond_char(bond_from_parent))
        out.append(mol.atoms[u])
        for v, order in closures[u]:
            key = (min(u, v), max(u, v))
            if key not in digit_of:
                digit = free_digits.pop(0)
                digit_of[key] = digit
                out.append(_bond_char(order) + _digit_str(digit))
            else:
                digit = digit_of.pop(key)
                free_digits.insert(0, digit)
                free_digits.sort()
                out.append(_digit_str(digit))
        kids = children[u]
        for v in kids[:-1]:
            out.append("(")
            emit(v, mol.bond_between(u, v))
            out.append(")")
        if kids:
            emit(kids[-1], mol.bond_between(u, kids[-1]))

    emit(root, None)
    return "".join(out)


def _bond_char(order: int) -> str:
    return {1: "", 2: "=", 3: "#"}[order]


def _digit_str(digit: int) -> str:
    return str(digit) if digit < 10 else f"%{digit:02d}"


def canonical(text: str) -> str:
    """Convenience: parse then write canonically."""
    return write_canonical(parse(text))
