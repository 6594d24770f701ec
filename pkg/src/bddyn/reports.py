from __future__ import annotations

import operator
from dataclasses import dataclass

_RELATIONS = {">": operator.gt, "<": operator.lt, ">=": operator.ge, "<=": operator.le}


@dataclass(frozen=True)
class ConditionReport:
    """One evaluated inequality ``lhs <relation> rhs``.

    ``satisfied`` is None when the condition could not be evaluated (a quantity
    it refers to does not exist); ``note`` then says why.
    """

    name: str
    lhs: float | None
    rhs: float | None
    satisfied: bool | None
    relation: str = ">"
    group: str = ""
    note: str = ""

    @classmethod
    def compare(cls, name, lhs, rhs, relation=">", group="", note=""):
        lhs, rhs = float(lhs), float(rhs)
        return cls(name, lhs, rhs, bool(_RELATIONS[relation](lhs, rhs)), relation, group, note)

    @classmethod
    def not_evaluable(cls, name, relation=">", group="", note=""):
        return cls(name, None, None, None, relation, group, note)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "relation": self.relation,
            "satisfied": self.satisfied,
            "group": self.group,
            "note": self.note,
        }
