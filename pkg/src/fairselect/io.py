"""JSON instance and report files.

Floats are written with Python's shortest round-trip ``repr``, so a file that
is read and written back is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .model import (
    AllSubsets,
    Box,
    Cardinality,
    FairnessSpec,
    GroupCount,
    GroupStructure,
    Instance,
    LowerBounds,
    MNLGroupShare,
    MNLRevenue,
    Modular,
    Pairwise,
    Permutations,
    SequentialMix,
    SolutionDistribution,
    UtilitySpec,
    Violation,
    WeightedCoverage,
)
from .oracle import OracleGuarantee
from .solver import SolveReport


class FormatError(ValidationError):
    """A document that does not follow the file format."""

    def __init__(self, path: str, message: str):
        super().__init__([Violation(path, message)])


def _floats(values) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


def _field(doc: dict, key: str, path: str):
    if not isinstance(doc, dict):
        raise FormatError(path, "expected a JSON object")
    if key not in doc:
        raise FormatError(f"{path}.{key}", "missing field")
    return doc[key]


def utility_from_json(doc: dict, path: str = "utility") -> UtilitySpec:
    kind = _field(doc, "type", path)
    try:
        if kind == "modular":
            return Modular(_floats(_field(doc, "weights", path)))
        if kind == "coverage":
            covers = tuple(frozenset(int(e) for e in c) for c in _field(doc, "covers", path))
            return WeightedCoverage(_floats(_field(doc, "element_weights", path)), covers)
        if kind == "group_count":
            return GroupCount(int(_field(doc, "group", path)))
        if kind == "mnl_revenue":
            return MNLRevenue(_floats(_field(doc, "revenues", path)), _floats(_field(doc, "nu", path)),
                              float(_field(doc, "nu0", path)))
        if kind == "mnl_share":
            return MNLGroupShare(int(_field(doc, "group", path)), _floats(_field(doc, "nu", path)),
                                 float(_field(doc, "nu0", path)))
        if kind == "sequential":
            comps = tuple(utility_from_json(c, f"{path}.components[{j}]")
                          for j, c in enumerate(_field(doc, "components", path)))
            return SequentialMix(_floats(_field(doc, "lambdas", path)), comps)
    except (TypeError, ValueError) as exc:
        raise FormatError(path, f"bad {kind} fields: {exc}") from exc
    raise FormatError(f"{path}.type", f"unknown utility type {kind!r}")


def utility_to_json(spec: UtilitySpec) -> dict:
    if isinstance(spec, Modular):
        return {"type": "modular", "weights": list(spec.weights)}
    if isinstance(spec, WeightedCoverage):
        return {"type": "coverage", "element_weights": list(spec.element_weights),
                "covers": [sorted(c) for c in spec.covers]}
    if isinstance(spec, GroupCount):
        return {"type": "group_count", "group": spec.group}
    if isinstance(spec, MNLRevenue):
        return {"type": "mnl_revenue", "revenues": list(spec.revenues), "nu": list(spec.nu), "nu0": spec.nu0}
    if isinstance(spec, MNLGroupShare):
        return {"type": "mnl_share", "group": spec.group, "nu": list(spec.nu), "nu0": spec.nu0}
    if isinstance(spec, SequentialMix):
        return {"type": "sequential", "lambdas": list(spec.lambdas),
                "components": [utility_to_json(c) for c in spec.components]}
    raise TypeError(f"cannot serialize {type(spec).__name__}")


def family_from_json(doc: dict):
    kind = _field(doc, "type", "family")
    if kind == "cardinality":
        return Cardinality(int(_field(doc, "k", "family")))
    if kind == "all_subsets":
        return AllSubsets()
    if kind == "permutations":
        return Permutations()
    raise FormatError("family.type", f"unknown family type {kind!r}")


def family_to_json(family) -> dict:
    if isinstance(family, Cardinality):
        return {"type": "cardinality", "k": family.k}
    if isinstance(family, AllSubsets):
        return {"type": "all_subsets"}
    return {"type": "permutations"}


def fairness_from_json(doc: dict) -> FairnessSpec:
    kind = _field(doc, "type", "fairness")
    try:
        if kind == "lower":
            return LowerBounds(_floats(_field(doc, "alpha", "fairness")))
        if kind == "box":
            return Box(_floats(_field(doc, "alpha", "fairness")), _floats(_field(doc, "beta", "fairness")))
        if kind == "pairwise":
            return Pairwise(tuple(_floats(row) for row in _field(doc, "gamma", "fairness")))
    except (TypeError, ValueError) as exc:
        raise FormatError("fairness", f"bad {kind} fields: {exc}") from exc
    raise FormatError("fairness.type", f"unknown fairness type {kind!r}")


def fairness_to_json(fairness: FairnessSpec) -> dict:
    if isinstance(fairness, LowerBounds):
        return {"type": "lower", "alpha": list(fairness.alpha)}
    if isinstance(fairness, Box):
        return {"type": "box", "alpha": list(fairness.alpha), "beta": list(fairness.beta)}
    return {"type": "pairwise", "gamma": [list(row) for row in fairness.gamma]}


def instance_from_json(doc: dict) -> tuple[Instance, FairnessSpec]:
    """Parse an instance document. Structural problems raise FormatError."""
    n = _field(doc, "n", "instance")
    if not isinstance(n, int) or isinstance(n, bool):
        raise FormatError("n", f"item count must be an integer, got {n!r}")
    groups_doc = _field(doc, "groups", "instance")
    if not isinstance(groups_doc, list) or not all(isinstance(g, list) for g in groups_doc):
        raise FormatError("groups", "expected an array of index arrays")
    try:
        groups = GroupStructure.from_lists(groups_doc)
    except (TypeError, ValueError) as exc:
        raise FormatError("groups", str(exc)) from exc
    gdoc = _field(doc, "group_utils", "instance")
    if not isinstance(gdoc, list):
        raise FormatError("group_utils", "expected an array")
    instance = Instance(
        n=n,
        groups=groups,
        global_utility=utility_from_json(_field(doc, "global", "instance"), "global"),
        group_utils=tuple(utility_from_json(g, f"group_utils[{t}]") for t, g in enumerate(gdoc)),
        family=family_from_json(_field(doc, "family", "instance")),
    )
    return instance, fairness_from_json(_field(doc, "fairness", "instance"))


def instance_to_json(instance: Instance, fairness: FairnessSpec) -> dict:
    return {
        "n": instance.n,
        "groups": [sorted(g) for g in instance.groups.members],
        "global": utility_to_json(instance.global_utility),
        "group_utils": [utility_to_json(g) for g in instance.group_utils],
        "family": family_to_json(instance.family),
        "fairness": fairness_to_json(fairness),
    }


def load_instance(path: str | Path) -> tuple[Instance, FairnessSpec]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError("instance", f"malformed JSON: {exc}") from exc
    return instance_from_json(doc)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def save_instance(path: str | Path, instance: Instance, fairness: FairnessSpec) -> None:
    Path(path).write_text(dumps(instance_to_json(instance, fairness)))


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------

def report_to_json(report: SolveReport, permutations: bool = False) -> dict:
    key = "perm" if permutations else "set"
    return {
        "status": "ok",
        "value": float(report.value),
        "upper_bound": float(report.upper_bound),
        "rho": report.guarantee.rho,
        "mu": report.guarantee.mu,
        "epsilon": report.epsilon,
        "distribution": [{key: list(sel), "prob": float(p)} for sel, p in report.distribution.support],
        "expected_groups": [float(v) for v in report.expected_groups],
        "f_prime_size": len(report.F_prime),
    }


@dataclass(frozen=True)
class ReportFile:
    """A report read back from disk, shaped like a solve report for checking."""

    status: str
    value: float
    upper_bound: float
    guarantee: OracleGuarantee
    epsilon: float
    distribution: SolutionDistribution
    expected_groups: np.ndarray
    f_prime_size: int


def report_from_json(doc: dict) -> ReportFile:
    try:
        pairs = []
        for j, entry in enumerate(_field(doc, "distribution", "report")):
            sel = entry.get("set", entry.get("perm"))
            if sel is None:
                raise FormatError(f"distribution[{j}]", "needs a 'set' or 'perm' field")
            pairs.append((tuple(int(i) for i in sel), float(entry["prob"])))
        return ReportFile(
            status=str(_field(doc, "status", "report")),
            value=float(_field(doc, "value", "report")),
            upper_bound=float(_field(doc, "upper_bound", "report")),
            guarantee=OracleGuarantee(float(_field(doc, "rho", "report")), float(_field(doc, "mu", "report")),
                                      True),
            epsilon=float(_field(doc, "epsilon", "report")),
            distribution=SolutionDistribution(tuple(pairs)),
            expected_groups=np.asarray(_floats(_field(doc, "expected_groups", "report"))),
            f_prime_size=int(_field(doc, "f_prime_size", "report")),
        )
    except (TypeError, ValueError, KeyError, AttributeError) as exc:
        raise FormatError("report", f"bad report fields: {exc}") from exc


def load_report(path: str | Path) -> ReportFile:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError("report", f"malformed JSON: {exc}") from exc
    return report_from_json(doc)
