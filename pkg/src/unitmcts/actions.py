"""Unit-edit action enumeration: the deterministic transition function.

Every legal successor of a molecule is produced by exactly one of four edit
kinds: atom addition, bond addition, bond removal, bond-order replacement.
Successors are deduplicated up to isomorphism and returned in a stable
order (sorted by the canonical SMILES of the result).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .molgraph import (
    DEFAULT_ELEMENTS,
    MAX_VALENCE,
    Molecule,
    RejectedActionError,
)
from . import smiles

ATOM_ADD = "atom_add"
BOND_ADD = "bond_add"
BOND_REMOVE = "bond_remove"
BOND_REPLACE = "bond_replace"


@dataclass(frozen=True)
class Action:
    """One unit modification together with the molecule it produces."""

    kind: str
    params: tuple
    result: Molecule = field(compare=False)

    @property
    def descriptor(self) -> tuple:
        return (self.kind, self.params)


def enumerate_actions(
    mol: Molecule,
    k_set: tuple[str, ...] = DEFAULT_ELEMENTS,
    max_atoms: int | None = None,
) -> list[Action]:
    """All legal unit edits of ``mol``, deduplicated and deterministically ordered.

    ``k_set`` is the element alphabet for atom additions; ``max_atoms``
    caps the heavy-atom count (no additions are generated at the cap).
    Ordered by the canonical SMILES of each result.
    """
    acts = successors(mol, k_set, max_atoms)
    return sorted(acts, key=lambda a: (smiles.write_canonical(a.result), a.descriptor))


def successors(
    mol: Molecule,
    k_set: tuple[str, ...] = DEFAULT_ELEMENTS,
    max_atoms: int | None = None,
) -> list[Action]:
    """Same action set as :func:`enumerate_actions`, ordered by descriptor.

    Skips canonical-SMILES generation for the results: candidates are
    pre-grouped by a cheap structural invariant and the exact isomorphism
    comparison only runs inside collision groups.
    """
    groups: dict[tuple, list[Action]] = {}
    for action in _raw_actions(mol, k_set, max_atoms):
        groups.setdefault(action.result.structure_invariant(), []).append(action)
    source_inv = mol.structure_invariant()
    out: list[Action] = []
    for inv, acts in groups.items():
        if inv == source_inv:
            acts = [a for a in acts if not a.result.is_isomorphic(mol)]
        if len(acts) <= 1:
            out.extend(acts)
            continue
        by_enc: dict[tuple, Action] = {}
        for action in acts:
            enc = action.result.canonical_encoding()
            prior = by_enc.get(enc)
            if prior is None or action.descriptor < prior.descriptor:
                by_enc[enc] = action
        out.extend(by_enc.values())
    out.sort(key=lambda a: a.descriptor)
    return out


def raw_successors(
    mol: Molecule,
    k_set: tuple[str, ...] = DEFAULT_ELEMENTS,
    max_atoms: int | None = None,
) -> list[Action]:
    """Legal unit edits without deduplication, in generation order."""
    return list(_raw_actions(mol, k_set, max_atoms))


def sample_random_action(
    mol: Molecule,
    rng,
    k_set: tuple[str, ...] = DEFAULT_ELEMENTS,
    max_atoms: int | None = None,
    max_tries: int = 200,
) -> Action | None:
    """Uniform draw over the raw (non-deduplicated) legal edits of ``mol``.

    Samples an edit descriptor from the full candidate grid and retries on
    illegal picks, which is uniform over the legal set without materializing
    it; falls back to exhaustive generation if rejections keep hitting.
    Returns None when no edit is legal.
    """
    n = len(mol)
    if n == 0:
        elem = k_set[rng.randrange(len(k_set))]
        if elem not in MAX_VALENCE:
            raise ValueError(f"unknown element {elem!r} in k_set")
        return Action(ATOM_ADD, (None, elem, 0), Molecule.single_atom(elem))
    can_add = max_atoms is None or n < max_atoms
    n_atom_add = n * len(k_set) * 3 if can_add else 0
    n_bond_add = (n * (n - 1) // 2) * 3
    n_remove = len(mol.bonds)
    n_replace = len(mol.bonds) * 2
    total = n_atom_add + n_bond_add + n_remove + n_replace
    if total == 0:
        return None
    for _ in range(max_tries):
        r = rng.randrange(total)
        try:
            if r < n_atom_add:
                anchor, r = divmod(r, len(k_set) * 3)
                elem_idx, order_off = divmod(r, 3)
                elem = k_set[elem_idx]
                if elem not in MAX_VALENCE:
                    raise ValueError(f"unknown element {elem!r} in k_set")
                order = order_off + 1
                if order > MAX_VALENCE[elem]:
                    continue
                return Action(
                    ATOM_ADD, (anchor, elem, order), mol.with_atom_added(anchor, elem, order)
                )
            r -= n_atom_add
            if r < n_bond_add:
                pair, order_off = divmod(r, 3)
                a, b = _pair_from_index(pair, n)
                order = order_off + 1
                return Action(BOND_ADD, (a, b, order), mol.with_bond_added(a, b, order))
            r -= n_bond_add
            if r < n_remove:
                a, b, _ = mol.bonds[r]
                return Action(BOND_REMOVE, (a, b), mol.with_bond_removed(a, b))
            r -= n_remove
            idx, alt = divmod(r, 2)
            a, b, order = mol.bonds[idx]
            new_order = [o for o in (1, 2, 3) if o != order][alt]
            return Action(
                BOND_REPLACE, (a, b, new_order), mol.with_bond_order(a, b, new_order)
            )
        except RejectedActionError:
            continue
    raw = raw_successors(mol, k_set, max_atoms)
    return rng.choice(raw) if raw else None


def _pair_from_index(index: int, n: int) -> tuple[int, int]:
    """Map a flat index to the index-th pair (a, b), a < b, in row order."""
    a = 0
    row = n - 1
    while index >= row:
        index -= row
        a += 1
        row -= 1
    return a, a + 1 + index


def _raw_actions(mol: Molecule, k_set, max_atoms):
    n = len(mol)
    if n == 0:
        for elem in k_set:
            if elem not in MAX_VALENCE:
                raise ValueError(f"unknown element {elem!r} in k_set")
            yield Action(ATOM_ADD, (None, elem, 0), Molecule.single_atom(elem))
        return

    if max_atoms is None or n < max_atoms:
        for anchor in range(n):
            fv = mol.free_valence(anchor)
            if fv == 0:
                continue
            for elem in k_set:
                if elem not in MAX_VALENCE:
                    raise ValueError(f"unknown element {elem!r} in k_set")
                for order in range(1, min(fv, MAX_VALENCE[elem], 3) + 1):
                    yield Action(
                        ATOM_ADD,
                        (anchor, elem, order),
                        mol.with_atom_added(anchor, elem, order),
                    )

    for a in range(n):
        fa = mol.free_valence(a)
        if fa == 0:
            continue
        for b in range(a + 1, n):
            if mol.bond_between(a, b) is not None:
                continue
            cap = min(fa, mol.free_valence(b), 3)
            for order in range(1, cap + 1):
                try:
                    yield Action(BOND_ADD, (a, b, order), mol.with_bond_added(a, b, order))
                except RejectedActionError:
                    break  # bridge rejection is order-independent

    for a, b, order in mol.bonds:
        try:
            yield Action(BOND_REMOVE, (a, b), mol.with_bond_removed(a, b))
        except RejectedActionError:
            pass
        for new_order in (1, 2, 3):
            if new_order == order:
                continue
            try:
                yield Action(
                    BOND_REPLACE, (a, b, new_order), mol.with_bond_order(a, b, new_order)
                )
            except RejectedActionError:
                pass


def transition(mol: Molecule, action: Action) -> Molecule:
    """Apply ``action`` to ``mol``; raises if the action does not fit."""
    kind, params = action.kind, action.params
    if kind == ATOM_ADD:
        anchor, elem, order = params
        if len(mol) == 0:
            return mol.with_atom_added(None, elem)
        return mol.with_atom_added(anchor, elem, order)
    if kind == BOND_ADD:
        return mol.with_bond_added(*params)
    if kind == BOND_REMOVE:
        return mol.with_bond_removed(*params)
    if kind == BOND_REPLACE:
        return mol.with_bond_order(*params)
    raise RejectedActionError(f"unknown action kind {kind!r}")
