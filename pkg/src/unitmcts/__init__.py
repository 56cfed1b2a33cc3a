"""Monte Carlo tree search over valence-valid molecular graphs.

States are molecules built from unit edits (atom addition, bond addition,
bond removal, bond-order replacement); the search maximizes pluggable
molecular objectives such as drug-likeness or penalized logP, optionally
under a similarity constraint to a start molecule.
"""

from .actions import (
    Action,
    enumerate_actions,
    raw_successors,
    sample_random_action,
    successors,
    transition,
)
from .mcts import EpisodeResult, SearchConfig, Searcher, run_episode
from .molgraph import Molecule, MoleculeError, RejectedActionError
from .properties import (
    ConstrainedObjective,
    Objective,
    PenalizedLogPObjective,
    QedObjective,
    fingerprint,
    penalized_logp,
    qed,
    tanimoto,
)
from .smiles import SmilesError, parse, write_canonical

__all__ = [
    "Action",
    "ConstrainedObjective",
    "EpisodeResult",
    "Molecule",
    "MoleculeError",
    "Objective",
    "PenalizedLogPObjective",
    "QedObjective",
    "RejectedActionError",
    "SearchConfig",
    "Searcher",
    "SmilesError",
    "enumerate_actions",
    "fingerprint",
    "parse",
    "penalized_logp",
    "qed",
    "raw_successors",
    "run_episode",
    "sample_random_action",
    "successors",
    "tanimoto",
    "transition",
    "write_canonical",
]
