"""Valence-checked molecular graphs.

Atoms are element symbols with fixed maximum valences; bonds carry integer
orders 1-3.  Unfilled valence is implicit hydrogen.  Molecules are immutable:
every edit returns a new value.  The module also provides ring perception
(a smallest-set-of-smallest-rings cycle basis), the bridged-ring test, and
Morgan-style canonical atom ranking used for canonical output and
deduplication.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

# Fixed maximum valences.  C/N/O are the construction alphabet; the rest
# exist so parsed input molecules can participate in valence checks.
MAX_VALENCE: dict[str, int] = {
    "B": 3,
    "C": 4,
    "N": 3,
    "O": 2,
    "P": 3,
    "S": 2,
    "F": 1,
    "Cl": 1,
    "Br": 1,
    "I": 1,
}

# Standard atomic weights (g/mol), implicit hydrogen included separately.
ATOMIC_WEIGHT: dict[str, float] = {
    "H": 1.008,
    "B": 10.81,
    "C": 12.011,
    "N": 14.007,
    "O": 15.999,
    "P": 30.974,
    "S": 32.06,
    "F": 18.998,
    "Cl": 35.45,
    "Br": 79.904,
    "I": 126.904,
}

DEFAULT_ELEMENTS: tuple[str, ...] = ("C", "N", "O")

# Cap on branches explored while breaking canonical-rank ties.  Tied classes
# that survive refinement are almost always automorphic orbits, for which
# every branch yields the same labeling, so a small cap is safe.
_MAX_TIE_BRANCHES = 64


class MoleculeError(Exception):
    """Invalid molecule construction or query."""


class RejectedActionError(MoleculeError):
    """An edit that would violate a molecule invariant."""


Bond = tuple[int, int, int]  # (a, b, order) with a < b


@dataclass(frozen=True)
class Molecule:
    """An immutable heavy-atom graph with typed bonds.

    ``atoms`` holds element symbols; ``bonds`` holds ``(a, b, order)``
    triples with ``a < b``, sorted.  The empty molecule is a legal value.
    """

    atoms: tuple[str, ...] = ()
    bonds: tuple[Bond, ...] = ()

    # ---------------------------------------------------------------- basics

    @staticmethod
    def empty() -> "Molecule":
        return Molecule()

    @staticmethod
    def single_atom(symbol: str) -> "Molecule":
        if symbol not in MAX_VALENCE:
            raise MoleculeError(f"unknown element {symbol!r}")
        return Molecule((symbol,), ())

    def __len__(self) -> int:
        return len(self.atoms)

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per-atom tuple of (neighbor index, bond order), ascending."""
        adj: list[list[tuple[int, int]]] = [[] for _ in self.atoms]
        for a, b, order in self.bonds:
            adj[a].append((b, order))
            adj[b].append((a, order))
        return tuple(tuple(sorted(nbrs)) for nbrs in adj)

    def _check_index(self, i: int) -> None:
        if not 0 <= i < len(self.atoms):
            raise MoleculeError(f"atom index {i} out of range (n={len(self.atoms)})")

    def degree(self, i: int) -> int:
        self._check_index(i)
        return len(self.adjacency[i])

    @cached_property
    def _order_sums(self) -> tuple[int, ...]:
        sums = [0] * len(self.atoms)
        for a, b, order in self.bonds:
            sums[a] += order
            sums[b] += order
        return tuple(sums)

    def bond_order_sum(self, i: int) -> int:
        self._check_index(i)
        return self._order_sums[i]

    def free_valence(self, i: int) -> int:
        """Remaining bond capacity of atom ``i``."""
        self._check_index(i)
        return MAX_VALENCE[self.atoms[i]] - self.bond_order_sum(i)

    def implicit_h(self, i: int) -> int:
        return self.free_valence(i)

    def bond_between(self, a: int, b: int) -> int | None:
        """Bond order between ``a`` and ``b``, or None."""
        self._check_index(a)
        self._check_index(b)
        for j, order in self.adjacency[a]:
            if j == b:
                return order
        return None

    @cached_property
    def molecular_weight(self) -> float:
        total = 0.0
        for i, sym in enumerate(self.atoms):
            total += ATOMIC_WEIGHT[sym] + ATOMIC_WEIGHT["H"] * self.implicit_h(i)
        return total

    # ------------------------------------------------------------ validation

    def is_connected(self) -> bool:
        n = len(self.atoms)
        if n <= 1:
            return True
        seen = {0}
        stack = [0]
        while stack:
            i = stack.pop()
            for j, _ in self.adjacency[i]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == n

    def validate(self) -> None:
        """Raise MoleculeError on any violated structural invariant."""
        n = len(self.atoms)
        for sym in self.atoms:
            if sym not in MAX_VALENCE:
                raise MoleculeError(f"unknown element {sym!r}")
        seen_pairs = set()
        for a, b, order in self.bonds:
            if not (0 <= a < b < n):
                raise MoleculeError(f"bad bond endpoints ({a}, {b})")
            if order not in (1, 2, 3):
                raise MoleculeError(f"bad bond order {order}")
            if (a, b) in seen_pairs:
                raise MoleculeError(f"parallel bond ({a}, {b})")
            seen_pairs.add((a, b))
        for i in range(n):
            if self.free_valence(i) < 0:
                raise MoleculeError(
                    f"valence overflow at atom {i} ({self.atoms[i]})"
                )
        if not self.is_connected():
            raise MoleculeError("molecule is not connected")
        if self.has_bridged_rings():
            raise MoleculeError("bridged ring system")

    # ----------------------------------------------------------------- edits

    def with_atom_added(self, anchor: int | None, symbol: str, order: int = 1) -> "Molecule":
        """Attach a new atom to ``anchor`` by a bond of ``order``.

        On the empty molecule ``anchor`` must be None and a lone atom is
        created.
        """
        if symbol not in MAX_VALENCE:
            raise RejectedActionError(f"unknown element {symbol!r}")
        if len(self.atoms) == 0:
            if anchor is not None:
                raise RejectedActionError("empty molecule takes no anchor")
            return Molecule((symbol,), ())
        if anchor is None:
            raise RejectedActionError("anchor required for non-empty molecule")
        self._check_index(anchor)
        if order > min(self.free_valence(anchor), MAX_VALENCE[symbol]):
            raise RejectedActionError("valence overflow")
        new_idx = len(self.atoms)
        bonds = self.bonds + ((anchor, new_idx, order),)
        return Molecule(self.atoms + (symbol,), tuple(sorted(bonds)))

    def with_bond_added(self, a: int, b: int, order: int) -> "Molecule":
        """Add a ring-closing bond between two existing atoms."""
        self._check_index(a)
        self._check_index(b)
        if a == b:
            raise RejectedActionError("self-loop")
        if self.bond_between(a, b) is not None:
            raise RejectedActionError("bond already exists")
        if order > min(self.free_valence(a), self.free_valence(b)):
            raise RejectedActionError("valence overflow")
        lo, hi = min(a, b), max(a, b)
        result = Molecule(self.atoms, tuple(sorted(self.bonds + ((lo, hi, order),))))
        if result.has_bridged_rings():
            raise RejectedActionError("bond would create a bridged ring system")
        return result

    def with_bond_removed(self, a: int, b: int) -> "Molecule":
        """Remove the a-b bond.

        Removal must keep the graph connected, except that a newly isolated
        single atom is deleted.  If both sides are single atoms (a diatomic),
        the atom with the smaller canonical rank is kept.
        """
        self._check_index(a)
        self._check_index(b)
        if self.bond_between(a, b) is None:
            raise RejectedActionError("no such bond")
        lo, hi = min(a, b), max(a, b)
        bonds = tuple(bd for bd in self.bonds if (bd[0], bd[1]) != (lo, hi))
        stripped = Molecule(self.atoms, bonds)
        if stripped.is_connected():
            return stripped
        comp_a = stripped._component_of(a)
        comp_b = stripped._component_of(b)
        if len(comp_a) == 1 and len(comp_b) == 1:
            ranks = self.canonical_ranks()
            keep = a if ranks[a] < ranks[b] else b
            return Molecule((self.atoms[keep],), ())
        if len(comp_a) == 1:
            return stripped._without_atom(a)
        if len(comp_b) == 1:
            return stripped._without_atom(b)
        raise RejectedActionError("removal would split the molecule")

    def with_bond_order(self, a: int, b: int, new_order: int) -> "Molecule":
        """Replace the order of an existing bond."""
        self._check_index(a)
        self._check_index(b)
        old = self.bond_between(a, b)
        if old is None:
            raise RejectedActionError("no such bond")
        if new_order == old:
            raise RejectedActionError("bond already has that order")
        if new_order not in (1, 2, 3):
            raise RejectedActionError(f"bad bond order {new_order}")
        delta = new_order - old
        if delta > 0 and delta > min(self.free_valence(a), self.free_valence(b)):
            raise RejectedActionError("valence overflow")
        lo, hi = min(a, b), max(a, b)
        bonds = tuple(
            (lo, hi, new_order) if (bd[0], bd[1]) == (lo, hi) else bd
            for bd in self.bonds
        )
        return Molecule(self.atoms, tuple(sorted(bonds)))

    def _component_of(self, start: int) -> set[int]:
        seen = {start}
        stack = [start]
        while stack:
            i = stack.pop()
            for j, _ in self.adjacency[i]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return seen

    def _without_atom(self, i: int) -> "Molecule":
        if self.adjacency[i]:
            raise MoleculeError("can only drop an isolated atom")
        remap = {old: new for new, old in enumerate(j for j in range(len(self.atoms)) if j != i)}
        atoms = tuple(sym for j, sym in enumerate(self.atoms) if j != i)
        bonds = tuple(
            sorted(
                (min(remap[a], remap[b]), max(remap[a], remap[b]), order)
                for a, b, order in self.bonds
            )
        )
        return Molecule(atoms, bonds)

    # ----------------------------------------------------------------- rings

    @cached_property
    def rings(self) -> tuple[tuple[int, ...], ...]:
        """A smallest-set-of-smallest-rings cycle basis.

        Greedily picks shortest cycles (shortest cycle through each bond),
        keeping only those independent over GF(2) on bond incidence, until
        the cyclomatic count |bonds| - |atoms| + components is reached.
        """
        n_rings = len(self.bonds) - len(self.atoms) + self._component_count()
        if n_rings <= 0:
            return ()
        # every cycle lives in the 2-core; strip leaves before any search
        core = self._two_core()
        edge_index = {(a, b): k for k, (a, b, _) in enumerate(self.bonds)}
        candidates = []
        for a, b, _ in self.bonds:
            if a not in core or b not in core:
                continue
            cycle = self._shortest_cycle_through(a, b, core)
            if cycle is not None:
                candidates.append(cycle)
        candidates.sort(key=lambda cyc: (len(cyc), cyc))
        basis_masks: list[int] = []
        chosen: list[tuple[int, ...]] = []
        for cycle in candidates:
            mask = 0
            for i in range(len(cycle)):
                u, v = cycle[i], cycle[(i + 1) % len(cycle)]
                mask |= 1 << edge_index[(min(u, v), max(u, v))]
            reduced = mask
            for bm in basis_masks:
                reduced = min(reduced, reduced ^ bm)
            if reduced:
                basis_masks.append(reduced)
                basis_masks.sort(reverse=True)
                chosen.append(cycle)
                if len(chosen) == n_rings:
                    break
        return tuple(chosen)

    def _component_count(self) -> int:
        n = len(self.atoms)
        seen: set[int] = set()
        count = 0
        for start in range(n):
            if start in seen:
                continue
            count += 1
            stack = [start]
            seen.add(start)
            while stack:
                i = stack.pop()
                for j, _ in self.adjacency[i]:
                    if j not in seen:
                        seen.add(j)
                        stack.append(j)
        return count

    def _two_core(self) -> frozenset[int]:
        """Atoms left after iteratively stripping degree-<=1 atoms."""
        deg = [len(nbrs) for nbrs in self.adjacency]
        queue = [i for i, d in enumerate(deg) if d <= 1]
        alive = [True] * len(self.atoms)
        while queue:
            i = queue.pop()
            if not alive[i]:
                continue
            alive[i] = False
            for j, _ in self.adjacency[i]:
                if alive[j]:
                    deg[j] -= 1
                    if deg[j] <= 1:
                        queue.append(j)
        return frozenset(i for i, a in enumerate(alive) if a)

    def _shortest_cycle_through(
        self, a: int, b: int, allowed: frozenset[int]
    ) -> tuple[int, ...] | None:
        """Shortest path a..b avoiding the a-b bond, normalized rotation."""
        prev: dict[int, int] = {a: -1}
        queue = [a]
        while queue:
            nxt: list[int] = []
            for i in queue:
                for j, _ in self.adjacency[i]:
                    if i == a and j == b:
                        continue
                    if j in allowed and j not in prev:
                        prev[j] = i
                        nxt.append(j)
            if b in prev:
                break
            queue = nxt
        if b not in prev:
            return None
        path = [b]
        while path[-1] != a:
            path.append(prev[path[-1]])
        return _normalize_cycle(tuple(path))

    def ring_membership(self) -> tuple[int, ...]:
        """Number of basis rings each atom belongs to."""
        counts = [0] * len(self.atoms)
        for cycle in self.rings:
            for i in cycle:
                counts[i] += 1
        return tuple(counts)

    @cached_property
    def ring_bonds(self) -> frozenset[tuple[int, int]]:
        out = set()
        for cycle in self.rings:
            for i in range(len(cycle)):
                u, v = cycle[i], cycle[(i + 1) % len(cycle)]
                out.add((min(u, v), max(u, v)))
        return frozenset(out)

    def cyclomatic_count(self) -> int:
        return len(self.bonds) - len(self.atoms) + self._component_count()

    def has_bridged_rings(self) -> bool:
        """True when two basis rings share three or more atoms.

        Fused pairs (one shared bond) and spiro pairs (one shared atom)
        are allowed; bridged bicyclics are not.
        """
        if self.cyclomatic_count() < 2:
            return False  # fewer than two rings cannot share atoms
        rings = self.rings
        sets = [frozenset(cyc) for cyc in rings]
        for i in range(len(sets)):
            for j in range(i + 1, len(sets)):
                if len(sets[i] & sets[j]) >= 3:
                    return True
        return False

    # ----------------------------------------------------- canonical ranking

    @cached_property
    def _canonical(self) -> tuple[tuple[int, ...], tuple]:
        """(ranks, encoding) minimizing the labeled-graph encoding."""
        n = len(self.atoms)
        if n == 0:
            return (), ()
        ranks = self._refine(self._initial_ranks())
        best: list[tuple | None] = [None]
        best_ranks: list[tuple[int, ...]] = [()]
        leaves = [0]

        def search(cur: tuple[int, ...]) -> None:
            if leaves[0] >= _MAX_TIE_BRANCHES:
                return
            tied = _first_tied_class(cur)
            if tied is None:
                leaves[0] += 1
                enc = self._encode(cur)
                if best[0] is None or enc < best[0]:
                    best[0] = enc
                    best_ranks[0] = cur
                return
            for member in tied:
                # promote one member ahead of its class, then re-densify
                promoted: list[float] = list(cur)
                promoted[member] -= 0.5
                search(self._refine(_densify(promoted)))

        search(ranks)
        return best_ranks[0], best[0] or ()

    @cached_property
    def _refined_invariant(self) -> tuple:
        if not self.atoms:
            return ()
        ranks = self._refine(self._initial_ranks())
        return tuple(
            sorted(
                (
                    self.atoms[i],
                    ranks[i],
                    tuple(sorted((order, ranks[j]) for j, order in self.adjacency[i])),
                )
                for i in range(len(self.atoms))
            )
        )

    def structure_invariant(self) -> tuple:
        """Cheap relabeling-invariant summary (refinement only, no branching).

        Equal for isomorphic molecules; *not* guaranteed distinct for
        non-isomorphic ones.  Used to pre-group candidates so the full
        canonical comparison only runs inside collision groups.
        """
        return self._refined_invariant

    def canonical_ranks(self) -> tuple[int, ...]:
        """Per-atom canonical ranks, a permutation of 0..n-1.

        Invariant under relabeling of the input atom order (up to the
        branch cap on tie resolution).
        """
        return self._canonical[0]

    def canonical_encoding(self) -> tuple:
        """Relabeling-invariant structural encoding; equal iff isomorphic."""
        return self._canonical[1]

    def _initial_ranks(self) -> tuple[int, ...]:
        in_ring = self.ring_membership()
        keys = [
            (
                self.atoms[i],
                len(self.adjacency[i]),
                self.bond_order_sum(i),
                self.free_valence(i),
                in_ring[i],
            )
            for i in range(len(self.atoms))
        ]
        order = sorted(set(keys))
        lookup = {k: r for r, k in enumerate(order)}
        return _densify([lookup[k] for k in keys])

    def _refine(self, ranks: tuple[int, ...]) -> tuple[int, ...]:
        n = len(self.atoms)
        current = ranks
        while True:
            keys = [
                (
                    current[i],
                    tuple(sorted((order, current[j]) for j, order in self.adjacency[i])),
                )
                for i in range(n)
            ]
            order = sorted(set(keys))
            lookup = {k: r for r, k in enumerate(order)}
            new = _densify([lookup[k] for k in keys])
            if new == current:
                return new
            current = new

    def _encode(self, ranks: tuple[int, ...]) -> tuple:
        inverse = [0] * len(ranks)
        for i, r in enumerate(ranks):
            inverse[r] = i
        atoms = tuple(self.atoms[i] for i in inverse)
        bonds = tuple(
            sorted(
                (min(ranks[a], ranks[b]), max(ranks[a], ranks[b]), order)
                for a, b, order in self.bonds
            )
        )
        return (atoms, bonds)

    def is_isomorphic(self, other: "Molecule") -> bool:
        return self.canonical_encoding() == other.canonical_encoding()


def _densify(ranks: list) -> tuple[int, ...]:
    order = sorted(set(ranks))
    lookup = {v: r for r, v in enumerate(order)}
    return tuple(lookup[v] for v in ranks)


def _first_tied_class(ranks: tuple[int, ...]) -> list[int] | None:
    by_rank: dict[int, list[int]] = {}
    for i, r in enumerate(ranks):
        by_rank.setdefault(r, []).append(i)
    for r in sorted(by_rank):
        if len(by_rank[r]) > 1:
            return by_rank[r]
    return None


def _normalize_cycle(cycle: tuple[int, ...]) -> tuple[int, ...]:
    """Rotate/reflect a cycle so it starts at its smallest atom index."""
    k = len(cycle)
    start = cycle.index(min(cycle))
    forward = tuple(cycle[(start + i) % k] for i in range(k))
    backward = tuple(cycle[(start - i) % k] for i in range(k))
    return min(forward, backward)
