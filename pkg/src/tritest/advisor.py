"""Test-selection advisor driven by declared topology of the truth regions.

Whether a two-stage three-outcome test can control a given error cell is
governed by topological properties of the three truth regions, which the
caller declares (they are never computed here: deciding closedness of an
arbitrary hypothesis set is not a library's job).  Each region gets one of
four labels: closed and not open ("cno"), open and not closed ("onc"), both
("clopen"), or neither.  Together with the *control set*, the regions whose
error columns must be controlled, the labels select a branch of an encoded
decision table and the advisor emits the branch's recommended plans.

Each recommendation reports the error cells the topology guarantees
controllable.  The derivation walks the analytic bound table: a stage rate
bounds a cell, and the rate itself is controllable when the hypothesis set
the stage tests is closed.  A closed control-set region therefore always
yields its full error column; preferred ("blue") recommendations control
additional cells beyond those columns.  One caveat is surfaced rather than
decided: the extra control of the cells that wrongly conclude the first
region also needs the union of the two second-stage regions to be compact,
which labels alone cannot certify, so such recommendations carry a warning.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .core import ErrorCell, PlanKind, Region, TwoStagePlan, enumerate_plans
from .errors import ValidationError

__all__ = [
    "TopologyLabel",
    "AdvisorInput",
    "Recommendation",
    "UNION_COMPACTNESS_WARNING",
    "advise",
    "controlled_cells",
    "enumerate_plans",
]


class TopologyLabel(Enum):
    """Declared topological character of one truth region."""

    CLOSED_NOT_OPEN = "cno"
    OPEN_NOT_CLOSED = "onc"
    CLOPEN = "clopen"
    NEITHER = "neither"

    @property
    def is_closed(self) -> bool:
        return self in (TopologyLabel.CLOSED_NOT_OPEN, TopologyLabel.CLOPEN)

    @property
    def is_open(self) -> bool:
        return self in (TopologyLabel.OPEN_NOT_CLOSED, TopologyLabel.CLOPEN)


UNION_COMPACTNESS_WARNING = (
    "controlling the cells that conclude the first region additionally requires the union "
    "of the two second-stage regions to be compact, which the labels cannot certify; a "
    "problem-specific argument may still recover the guarantee"
)


def _as_label(value) -> TopologyLabel:
    if isinstance(value, TopologyLabel):
        return value
    try:
        return TopologyLabel(value)
    except ValueError:
        valid = ", ".join(repr(l.value) for l in TopologyLabel)
        raise ValidationError(f"unknown topology label {value!r}; expected one of {valid}") from None


@dataclass(frozen=True)
class AdvisorInput:
    """Labels for the three regions plus the set of regions needing column control.

    ``labels`` may be given as a mapping from region to label or as a
    sequence of three labels in region order; label values may be
    :class:`TopologyLabel` members or their strings.  Every region in
    ``control_set`` must be labeled closed (cno or clopen): controlling a
    region's error column is only achievable when the region is closed.
    """

    labels: tuple
    control_set: frozenset = frozenset()

    def __post_init__(self):
        raw = self.labels
        if isinstance(raw, dict):
            try:
                seq = [raw[Region(i)] if Region(i) in raw else raw[i] for i in range(3)]
            except KeyError as exc:
                raise ValidationError(f"every region must be labeled; missing {exc}") from None
        else:
            seq = list(raw)
        if len(seq) != 3:
            raise ValidationError(f"expected labels for exactly 3 regions, got {len(seq)}")
        labels = tuple(_as_label(v) for v in seq)
        object.__setattr__(self, "labels", labels)
        control = frozenset(Region(r) for r in self.control_set)
        object.__setattr__(self, "control_set", control)
        for region in sorted(control):
            if not labels[int(region)].is_closed:
                raise ValidationError(
                    f"region {int(region)} is in the control set but labeled "
                    f"{labels[int(region)].value!r}; column control is only guaranteed "
                    "for regions labeled closed (cno or clopen)"
                )

    def label_of(self, region: Region) -> TopologyLabel:
        return self.labels[int(Region(region))]


@dataclass(frozen=True)
class Recommendation:
    """One advised plan: the plan, its priority, and what it certifiably controls."""

    plan: TwoStagePlan
    preferred: bool
    controlled_cells: frozenset
    warning: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "controlled_cells", frozenset(self.controlled_cells))

    def to_json_dict(self) -> dict:
        cells = sorted((int(c.outcome), int(c.truth)) for c in self.controlled_cells)
        return {
            "plan": self.plan.to_json_dict(),
            "preferred": self.preferred,
            "controlled_cells": [list(c) for c in cells],
            "warning": self.warning,
        }


def controlled_cells(plan: TwoStagePlan, labels) -> frozenset:
    """Error cells of the plan whose analytic bound rests on a controllable rate.

    ``labels`` is indexable by region (a 3-tuple or an :class:`AdvisorInput`'s
    ``labels``).  Cells bounded by a stage-1 rate are controllable when the
    corresponding stage-1 hypothesis region is closed: the first region for
    the rate governing conclusions *away* from it, the union of the other two
    for the rate governing wrong conclusions *of* it (the union is closed
    when the first region is open or both pieces are closed).  The two
    stage-2 cells are controllable when the respective stage-2 null or
    alternative region is closed.
    """
    labels = tuple(_as_label(v) for v in labels)
    if len(labels) != 3:
        raise ValidationError(f"expected labels for exactly 3 regions, got {len(labels)}")
    f, sn, sa = plan.first, plan.second_null, plan.second_alt
    closed_first = labels[int(f)].is_closed
    union_closed = labels[int(f)].is_open or (
        labels[int(sn)].is_closed and labels[int(sa)].is_closed
    )
    cells = set()
    if closed_first:
        cells.add(ErrorCell(outcome=int(sn), truth=int(f)))
        cells.add(ErrorCell(outcome=int(sa), truth=int(f)))
    if union_closed:
        cells.add(ErrorCell(outcome=int(f), truth=int(sn)))
        cells.add(ErrorCell(outcome=int(f), truth=int(sa)))
    if labels[int(sn)].is_closed:
        cells.add(ErrorCell(outcome=int(sa), truth=int(sn)))
    if labels[int(sa)].is_closed:
        cells.add(ErrorCell(outcome=int(sn), truth=int(sa)))
    return frozenset(cells)


def _recommend(inp: AdvisorInput, plan: TwoStagePlan, preferred: bool) -> Recommendation:
    cells = controlled_cells(plan, inp.labels)
    claims_union_route = ErrorCell(outcome=int(plan.first), truth=int(plan.second_null)) in cells
    needs_warning = claims_union_route and not (
        {plan.second_null, plan.second_alt} <= inp.control_set
    )
    return Recommendation(
        plan=plan,
        preferred=preferred,
        controlled_cells=cells,
        warning=UNION_COMPACTNESS_WARNING if needs_warning else None,
    )


def _others(region: Region) -> list:
    return [r for r in Region if r != region]


def _sn(first: Region, second_null: Region) -> TwoStagePlan:
    return TwoStagePlan.make(PlanKind.SPLIT_NULL, first=first, second_null=second_null)


def _sa(first: Region, second_null: Region) -> TwoStagePlan:
    return TwoStagePlan.make(PlanKind.SPLIT_ALTERNATIVE, first=first, second_null=second_null)


def _not_covered(inp: AdvisorInput) -> ValidationError:
    lbl = "/".join(l.value for l in inp.labels)
    ctl = ",".join(str(int(r)) for r in sorted(inp.control_set)) or "none"
    return ValidationError(
        f"labels ({lbl}) with control set ({ctl}) are not covered by the encoded decision tables"
    )


def advise(inp: AdvisorInput) -> list:
    """Recommended two-stage plans for the declared topology and control set.

    Dispatches on the size of the control set.  Empty: a split-null plan
    concluding each open-not-closed region first (both stage-2 splits), or
    nothing when no such region exists.  All three regions: any plan works,
    so all 12 are emitted as preferred.  Sizes one and two: the encoded
    decision-table branches below; label combinations the tables do not
    enumerate raise a validation error rather than guessing.

    Within a branch, preferred recommendations come first; "either stage-2
    split" expands into both plans, in region order, sharing a flag.
    """
    k = len(inp.control_set)
    recs: list = []

    if k == 0:
        for region in Region:
            if inp.label_of(region) is TopologyLabel.OPEN_NOT_CLOSED:
                for second_null in _others(region):
                    recs.append(_recommend(inp, _sn(region, second_null), preferred=True))
        return recs

    if k == 3:
        return [_recommend(inp, plan, preferred=True) for plan in enumerate_plans()]

    if k == 1:
        (target,) = inp.control_set
        rest = _others(target)
        rest_labels = sorted(inp.label_of(r).value for r in rest)
        target_label = inp.label_of(target)
        if target_label is TopologyLabel.CLOSED_NOT_OPEN and rest_labels == ["onc", "onc"]:
            for r in rest:
                recs.append(_recommend(inp, _sn(r, target), preferred=True))
            for second_null in rest:
                recs.append(_recommend(inp, _sa(target, second_null), preferred=False))
            return recs
        if target_label is TopologyLabel.CLOSED_NOT_OPEN and rest_labels == ["neither", "onc"]:
            (open_region,) = [r for r in rest if inp.label_of(r) is TopologyLabel.OPEN_NOT_CLOSED]
            recs.append(_recommend(inp, _sn(open_region, target), preferred=True))
            for second_null in rest:
                recs.append(_recommend(inp, _sa(target, second_null), preferred=False))
            return recs
        if target_label is TopologyLabel.CLOPEN and rest_labels == ["neither", "neither"]:
            for second_null in rest:
                recs.append(_recommend(inp, _sn(target, second_null), preferred=True))
            for second_null in rest:
                recs.append(_recommend(inp, _sa(target, second_null), preferred=True))
            return recs
        if target_label is TopologyLabel.CLOSED_NOT_OPEN and rest_labels == ["neither", "neither"]:
            for second_null in rest:
                recs.append(_recommend(inp, _sa(target, second_null), preferred=True))
            return recs
        raise _not_covered(inp)

    if k == 2:
        (third,) = [r for r in Region if r not in inp.control_set]
        targets = sorted(inp.control_set)
        target_labels = sorted(inp.label_of(r).value for r in targets)
        third_label = inp.label_of(third)
        if third_label not in (TopologyLabel.OPEN_NOT_CLOSED, TopologyLabel.NEITHER):
            raise _not_covered(inp)
        if target_labels == ["cno", "cno"]:
            for second_null in targets:
                recs.append(_recommend(inp, _sn(third, second_null), preferred=True))
            return recs
        if target_labels == ["clopen", "cno"]:
            (co,) = [r for r in targets if inp.label_of(r) is TopologyLabel.CLOPEN]
            (cn,) = [r for r in targets if inp.label_of(r) is TopologyLabel.CLOSED_NOT_OPEN]
            recs.append(_recommend(inp, _sa(co, cn), preferred=True))
            recs.append(_recommend(inp, _sn(co, cn), preferred=True))
            for second_null in targets:
                recs.append(_recommend(inp, _sn(third, second_null), preferred=False))
            return recs
        raise _not_covered(inp)

    raise _not_covered(inp)
