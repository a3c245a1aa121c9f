"""Shipped task-network bundles and a structural linter."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from goalcoach.tasknet import TaskNet, load_tasknet

_FILES = {"kitchen": "kitchen.tasknet.json", "blocks": "blocks.tasknet.json"}
EXPECTED_VAR_COUNTS = {"kitchen": 18, "blocks": 26}


@dataclass
class DomainBundle:
    name: str
    document: dict
    expected_var_count: int
    provenance: str = "hand-authored reconstruction"

    def load(self) -> TaskNet:
        return load_tasknet(self.document)


def domain_names() -> tuple[str, ...]:
    return tuple(_FILES)


def builtin_bundle(name: str) -> DomainBundle:
    if name not in _FILES:
        raise KeyError(f"unknown domain: {name!r}")
    text = resources.files(__package__).joinpath(_FILES[name]).read_text()
    doc = json.loads(text)
    return DomainBundle(
        name=name,
        document=doc,
        expected_var_count=EXPECTED_VAR_COUNTS[name],
        provenance=doc.get("note", "hand-authored reconstruction"),
    )


def load_domain(name: str) -> TaskNet:
    return builtin_bundle(name).load()


@dataclass
class LintReport:
    warnings: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.warnings)


def lint_domain(bundle: DomainBundle) -> LintReport:
    """Structural lint on top of load-time validation; returns warnings only."""
    net = bundle.load()  # load failures propagate
    report = LintReport()

    reachable: set[str] = set()
    for g in net.goals:
        reachable |= net.primitives_under(g)
    for p in sorted(set(net.primitives) - reachable):
        report.warnings.append(f"primitive {p!r} unreachable from any goal")

    read = {v for p in net.primitives.values() for v, _ in p.pre}
    written = {v for p in net.primitives.values() for v, _ in p.eff}
    for v in net.vars:
        if v not in read and v not in written:
            report.warnings.append(f"variable {v!r} is never read or written")

    for m in net.methods.values():
        if len(set(m.subtasks)) != len(m.subtasks):
            report.warnings.append(f"method {m.id!r} lists a duplicate subtask")

    if len(net.vars) != bundle.expected_var_count:
        report.warnings.append(
            f"domain declares {len(net.vars)} variables, expected {bundle.expected_var_count}"
        )
    return report
