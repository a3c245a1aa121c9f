"""Task network: goals, methods, primitive actions over binary world variables.

The task graph is immutable after loading. Execution progress is inferred
from the world itself: a primitive counts as complete when its attribute
effects hold, so sensor-style variables may be toggled freely without
confusing the bookkeeping.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

SCHEMA_VERSION = 1


class TaskNetError(Exception):
    """Base error for task-network loading and queries."""


class ParseError(TaskNetError):
    """Raised when a document cannot be parsed at all."""


class ValidationError(TaskNetError):
    """Raised when a parsed document violates a structural invariant."""


@dataclass(frozen=True)
class WorldVar:
    id: str
    kind: str  # "ss" (smart sensor) or "att" (object attribute)
    initial: bool


@dataclass(frozen=True)
class Primitive:
    id: str
    pre: tuple[tuple[str, bool], ...]
    eff: tuple[tuple[str, bool], ...]


@dataclass(frozen=True)
class Method:
    id: str
    task: str
    subtasks: tuple[str, ...]
    ordering: str  # "ordered" or "unordered"
    prob: float


@dataclass(eq=False)
class TaskNet:
    domain: str
    vars: dict[str, WorldVar]
    primitives: dict[str, Primitive]
    methods: dict[str, Method]
    goals: tuple[str, ...]

    # derived, filled in __post_init__
    var_order: tuple[str, ...] = field(default_factory=tuple)
    methods_by_task: dict[str, tuple[Method, ...]] = field(default_factory=dict)

    def __post_init__(self):
        self.var_order = tuple(self.vars)
        self._bit = {v: 1 << i for i, v in enumerate(self.var_order)}
        by_task: dict[str, list[Method]] = {}
        for m in self.methods.values():
            by_task.setdefault(m.task, []).append(m)
        self.methods_by_task = {t: tuple(ms) for t, ms in by_task.items()}
        # bitmask forms of preconditions / effects / completion markers
        self._pre_mask: dict[str, tuple[int, int]] = {}
        self._eff_mask: dict[str, tuple[int, int]] = {}
        self._done_mask: dict[str, tuple[int, int]] = {}
        for p in self.primitives.values():
            self._pre_mask[p.id] = self._cond_mask(p.pre)
            self._eff_mask[p.id] = self._cond_mask(p.eff)
            markers = [(v, b) for v, b in p.eff if self.vars[v].kind == "att"]
            self._done_mask[p.id] = self._cond_mask(markers if markers else p.eff)
        self._valid_cache: dict[tuple[int, str], frozenset[str]] = {}
        self._exec_cache: dict[int, frozenset[str]] = {}
        self._wrong_cache: dict[int, frozenset[str]] = {}
        self.initial_mask = self.mask_of({v.id: v.initial for v in self.vars.values()})

    def _cond_mask(self, pairs: Iterable[tuple[str, bool]]) -> tuple[int, int]:
        mask = bits = 0
        for var, val in pairs:
            b = self._bit[var]
            mask |= b
            if val:
                bits |= b
        return mask, bits

    # ---- world-assignment <-> bitmask ----

    def mask_of(self, world: Mapping[str, bool]) -> int:
        mask = 0
        for var, bit in self._bit.items():
            if world[var]:
                mask |= bit
        return mask

    def world_of(self, mask: int) -> dict[str, bool]:
        return {var: bool(mask & bit) for var, bit in self._bit.items()}

    def initial_world(self) -> dict[str, bool]:
        return {v.id: v.initial for v in self.vars.values()}

    def var_bit(self, var: str) -> int:
        return self._bit[var]

    # ---- primitive queries (mask based) ----

    def pre_holds(self, mask: int, pid: str) -> bool:
        m, b = self._pre_mask[pid]
        return (mask & m) == b

    def primitive_done(self, mask: int, pid: str) -> bool:
        m, b = self._done_mask[pid]
        return (mask & m) == b

    def apply_mask(self, mask: int, pid: str) -> int:
        m, b = self._eff_mask[pid]
        return (mask & ~m) | b

    def touched_vars(self, pid: str) -> tuple[str, ...]:
        return tuple(v for v, _ in self.primitives[pid].eff)

    def is_primitive(self, name: str) -> bool:
        return name in self.primitives

    # ---- task structure ----

    def task_complete(self, mask: int, task: str) -> bool:
        if task in self.primitives:
            return self.primitive_done(mask, task)
        return any(
            all(self.task_complete(mask, sub) for sub in m.subtasks)
            for m in self.methods_by_task.get(task, ())
        )

    def _next_candidates(self, mask: int, task: str) -> frozenset[str]:
        """Primitives that could structurally be executed next for `task`."""
        if task in self.primitives:
            if self.primitive_done(mask, task):
                return frozenset()
            return frozenset((task,))
        out: set[str] = set()
        for m in self.methods_by_task.get(task, ()):
            if m.ordering == "ordered":
                for sub in m.subtasks:
                    if not self.task_complete(mask, sub):
                        out |= self._next_candidates(mask, sub)
                        break
            else:
                for sub in m.subtasks:
                    if not self.task_complete(mask, sub):
                        out |= self._next_candidates(mask, sub)
        return frozenset(out)

    def valid_next_mask(self, mask: int, goal: str) -> frozenset[str]:
        if goal not in self.goals:
            raise TaskNetError(f"unknown goal id: {goal!r}")
        key = (mask, goal)
        hit = self._valid_cache.get(key)
        if hit is None:
            if self.task_complete(mask, goal):
                hit = frozenset()
            else:
                hit = frozenset(
                    p for p in self._next_candidates(mask, goal) if self.pre_holds(mask, p)
                )
            self._valid_cache[key] = hit
        return hit

    def executable_mask(self, mask: int) -> frozenset[str]:
        hit = self._exec_cache.get(mask)
        if hit is None:
            hit = frozenset(p for p in self.primitives if self.pre_holds(mask, p))
            self._exec_cache[mask] = hit
        return hit

    def wrong_set_mask(self, mask: int) -> frozenset[str]:
        """Executable primitives that advance no goal."""
        hit = self._wrong_cache.get(mask)
        if hit is None:
            valid_any: set[str] = set()
            for g in self.goals:
                valid_any |= self.valid_next_mask(mask, g)
            hit = self.executable_mask(mask) - valid_any
            self._wrong_cache[mask] = hit
        return hit

    def depth(self, task: str | None = None) -> int:
        """Longest decomposition chain from `task` (or any goal) to a leaf."""
        if task is None:
            return max(self.depth(g) for g in self.goals)
        if task in self.primitives:
            return 1
        return 1 + max(
            self.depth(sub)
            for m in self.methods_by_task[task]
            for sub in m.subtasks
        )

    def primitives_under(self, task: str) -> frozenset[str]:
        if task in self.primitives:
            return frozenset((task,))
        out: set[str] = set()
        for m in self.methods_by_task.get(task, ()):
            for sub in m.subtasks:
                out |= self.primitives_under(sub)
        return frozenset(out)


# ---- public operations on world assignments (dicts) ----


def valid_next_primitives(net: TaskNet, world: Mapping[str, bool], goal: str) -> set[str]:
    return set(net.valid_next_mask(net.mask_of(world), goal))


def wrong_action_set(net: TaskNet, world: Mapping[str, bool], goal: str) -> set[str]:
    if goal not in net.goals:
        raise TaskNetError(f"unknown goal id: {goal!r}")
    return set(net.wrong_set_mask(net.mask_of(world)))


def apply_primitive(net: TaskNet, world: Mapping[str, bool], pid: str) -> dict[str, bool]:
    if pid not in net.primitives:
        raise TaskNetError(f"unknown primitive id: {pid!r}")
    out = dict(world)
    for var, val in net.primitives[pid].eff:
        out[var] = val
    return out


def goal_complete(net: TaskNet, world: Mapping[str, bool], goal: str) -> bool:
    if goal not in net.goals:
        raise TaskNetError(f"unknown goal id: {goal!r}")
    return net.task_complete(net.mask_of(world), goal)


# ---- loading / validation ----


def load_tasknet(document) -> TaskNet:
    """Build a validated TaskNet from a parsed document (see schema in README)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ParseError(f"malformed task-network document: {e}") from e
    if not isinstance(document, dict):
        raise ParseError("task-network document must be a JSON object")
    if document.get("schema") != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema version: {document.get('schema')!r}")

    try:
        vars_ = {
            v["id"]: WorldVar(v["id"], v["kind"], bool(v["initial"]))
            for v in document["vars"]
        }
        prims = {
            p["id"]: Primitive(
                p["id"],
                tuple((v, bool(b)) for v, b in p["pre"]),
                tuple((v, bool(b)) for v, b in p["eff"]),
            )
            for p in document["primitives"]
        }
        methods = {
            m["id"]: Method(
                m["id"], m["task"], tuple(m["subtasks"]), m["ordering"], float(m["prob"])
            )
            for m in document["methods"]
        }
        goals = tuple(document["goals"])
        domain = document["domain"]
    except (KeyError, TypeError) as e:
        raise ParseError(f"malformed task-network document: {e}") from e

    if len(vars_) != len(document["vars"]):
        raise ValidationError("duplicate variable ids")
    if len(prims) != len(document["primitives"]):
        raise ValidationError("duplicate primitive ids")
    if len(methods) != len(document["methods"]):
        raise ValidationError("duplicate method ids")

    for v in vars_.values():
        if v.kind not in ("ss", "att"):
            raise ValidationError(f"variable {v.id!r} has unknown kind {v.kind!r}")
    for p in prims.values():
        if not p.eff:
            raise ValidationError(f"primitive {p.id!r} has no effects")
        for var, _ in p.pre + p.eff:
            if var not in vars_:
                raise ValidationError(f"primitive {p.id!r} references unknown variable {var!r}")
    for m in methods.values():
        if m.ordering not in ("ordered", "unordered"):
            raise ValidationError(f"method {m.id!r} has unknown ordering {m.ordering!r}")
        if not (0.0 < m.prob <= 1.0):
            raise ValidationError(f"method {m.id!r} has expand probability outside (0,1]")
        for sub in m.subtasks:
            if sub not in prims and not any(mm.task == sub for mm in methods.values()):
                raise ValidationError(f"method {m.id!r} references dangling subtask {sub!r}")

    by_task: dict[str, float] = {}
    for m in methods.values():
        by_task[m.task] = by_task.get(m.task, 0.0) + m.prob
    for task, total in by_task.items():
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(
                f"method probabilities for task {task!r} sum to {total}, expected 1"
            )

    for g in goals:
        if g in prims:
            raise ValidationError(f"goal {g!r} is a primitive, expected a task")
        if not any(m.task == g for m in methods.values()):
            raise ValidationError(f"goal {g!r} has no decomposition method")

    _check_acyclic(methods, prims)

    net = TaskNet(domain=domain, vars=vars_, primitives=prims, methods=methods, goals=goals)

    reachable: set[str] = set()
    for g in goals:
        under = net.primitives_under(g)
        if not under:
            raise ValidationError(f"goal {g!r} reaches no primitive leaf")
        reachable |= under
    orphans = sorted(set(prims) - reachable)
    if orphans:
        raise ValidationError(f"primitives unreachable from any goal: {orphans}")
    return net


def _check_acyclic(methods: dict[str, Method], prims: dict[str, Primitive]) -> None:
    children: dict[str, set[str]] = {}
    for m in methods.values():
        children.setdefault(m.task, set()).update(m.subtasks)
    WHITE, GREY, BLACK = 0, 1, 2
    color = {t: WHITE for t in children}

    def visit(t: str) -> None:
        if t in prims or t not in children:
            return
        if color[t] == GREY:
            raise ValidationError(f"decomposition cycle through task {t!r}")
        if color[t] == BLACK:
            return
        color[t] = GREY
        for sub in children[t]:
            visit(sub)
        color[t] = BLACK

    for t in children:
        visit(t)


def to_document(net: TaskNet) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "domain": net.domain,
        "vars": [
            {"id": v.id, "kind": v.kind, "initial": v.initial} for v in net.vars.values()
        ],
        "primitives": [
            {"id": p.id, "pre": [list(x) for x in p.pre], "eff": [list(x) for x in p.eff]}
            for p in net.primitives.values()
        ],
        "methods": [
            {
                "id": m.id,
                "task": m.task,
                "subtasks": list(m.subtasks),
                "ordering": m.ordering,
                "prob": m.prob,
            }
            for m in net.methods.values()
        ],
        "goals": list(net.goals),
    }
