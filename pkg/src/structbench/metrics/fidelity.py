"""Structural fidelity: CI tests on synthetic data scored against d-separation labels.

Each ground-truth statement is a binary example with label ``True`` for
independence. The CI test run on the synthetic table is the classifier, and
the score is balanced accuracy in percent, with independence as the positive
class.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Optional

from ..citests import DEFAULT_ALPHA, ci_test
from ..data.table import DataTable
from ..errors import SchemaError
from ..graph import CiRelationSet, CiStatement

# (table, x, y, z, alpha) -> independent?
Tester = Callable[[DataTable, str, str, tuple, float], bool]


def _default_tester(table: DataTable, x: str, y: str, z: tuple, alpha: float) -> bool:
    return ci_test(table, x, y, z, alpha).independent


@dataclass(frozen=True)
class Confusion:
    tp: int = 0  # independent, predicted independent
    tn: int = 0  # dependent, predicted dependent
    fp: int = 0  # dependent, predicted independent
    fn: int = 0  # independent, predicted dependent

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def add(self, label: bool, predicted: bool) -> "Confusion":
        if label:
            return Confusion(self.tp + predicted, self.tn, self.fp, self.fn + (not predicted))
        return Confusion(self.tp, self.tn + (not predicted), self.fp + predicted, self.fn)


def balanced_accuracy(c: Confusion) -> tuple[float, bool]:
    """Balanced accuracy in percent and whether only one label class was present.

    With a single class the score falls back to plain accuracy on that class.
    """
    pos, neg = c.tp + c.fn, c.tn + c.fp
    if pos and neg:
        return 50.0 * (c.tp / pos + c.tn / neg), False
    if pos:
        return 100.0 * c.tp / pos, True
    if neg:
        return 100.0 * c.tn / neg, True
    raise ValueError("balanced accuracy of an empty confusion matrix")


@dataclass(frozen=True)
class LevelScore:
    bacc: float
    confusion: Confusion
    statements: int
    single_class: bool

    def __post_init__(self) -> None:
        if not 0.0 <= self.bacc <= 100.0:
            raise ValueError(f"balanced accuracy {self.bacc} outside [0, 100]")


@dataclass(frozen=True)
class StructuralFidelityReport:
    global_: LevelScore
    local: Optional[LevelScore]
    alpha: float

    @property
    def global_bacc(self) -> float:
        return self.global_.bacc

    @property
    def local_bacc(self) -> Optional[float]:
        return None if self.local is None else self.local.bacc

    def to_dict(self) -> dict:
        return {
            "global": asdict(self.global_),
            "local": None if self.local is None else asdict(self.local),
            "alpha": self.alpha,
            "test_selection": "chi_square / partial_correlation / residualisation by column kinds",
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StructuralFidelityReport":
        def level(v):
            if v is None:
                return None
            return LevelScore(v["bacc"], Confusion(**v["confusion"]), v["statements"], v["single_class"])

        return cls(level(d["global"]), level(d["local"]), d["alpha"])


def score_predictions(statements, predictions) -> LevelScore:
    """Score a sequence of predicted independence flags against statement labels."""
    stmts = list(statements)
    preds = list(predictions)
    if len(stmts) != len(preds):
        raise ValueError("one prediction per statement is required")
    conf = Confusion()
    for s, p in zip(stmts, preds):
        conf = conf.add(bool(s.label), bool(p))
    bacc, single = balanced_accuracy(conf)
    return LevelScore(bacc, conf, len(stmts), single)


def structural_fidelity(
    global_relations: CiRelationSet,
    local_relations: Optional[CiRelationSet],
    syn: DataTable,
    alpha: float = DEFAULT_ALPHA,
    tester: Optional[Tester] = None,
) -> StructuralFidelityReport:
    """Run one CI test per statement on ``syn`` and score both levels.

    A statement shared by both levels is tested once.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    tester = tester or _default_tester
    names = set(syn.names)
    cache: dict[tuple, bool] = {}

    def predict(s: CiStatement) -> bool:
        if s.key not in cache:
            for v in (s.x, s.y, *s.z):
                if v not in names:
                    raise SchemaError("synthetic table lacks a variable of the relation set", column=v)
            cache[s.key] = bool(tester(syn, s.x, s.y, s.z, alpha))
        return cache[s.key]

    glob = score_predictions(global_relations, [predict(s) for s in global_relations])
    loc = None
    if local_relations is not None:
        loc = score_predictions(local_relations, [predict(s) for s in local_relations])
    return StructuralFidelityReport(glob, loc, alpha)


__all__ = [
    "Confusion",
    "LevelScore",
    "StructuralFidelityReport",
    "balanced_accuracy",
    "score_predictions",
    "structural_fidelity",
]
