"""Restricted-class influence diagram for two-arm trial models.

The statistical model is a level-structured acyclic graph containing
exactly three kinds of node: parentless beta-distributed chance nodes,
deterministic function nodes (identity, mixture, measurement-error),
and single-parent evidence nodes holding binomial counts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Union

import numpy as np

from .errors import CycleDetected, MissingAssignment, ValueOutOfRange


class Level(str, Enum):
    POPULATION = "population"
    STUDY = "study"
    EFFECTIVE = "effective"
    PATIENT = "patient"


#: Interlevel dependency order; the patient level is special-cased
#: (it depends directly on the population level only).
_LEVEL_RANK = {Level.POPULATION: 0, Level.STUDY: 1, Level.EFFECTIVE: 2}


class Role(str, Enum):
    OUTCOME = "outcome"
    METHODOLOGICAL = "methodological"


class Arm(str, Enum):
    EXP = "exp"
    CTL = "ctl"
    BASELINE = "baseline"
    NONE = "none"


@dataclass
class ChanceBeta:
    """Parentless beta prior over a rate in (0, 1).

    ``pending`` marks a parameter created by a construction step whose
    prior has not yet been elicited; inference refuses such models.
    """

    a: float = 1.0
    b: float = 1.0
    pending: bool = False


@dataclass
class Identity:
    parent: int


@dataclass
class Mixture:
    """mix * in_part + (1 - mix) * out_part."""

    mix: int
    in_part: int
    out_part: int


@dataclass
class MeasurementError:
    """sens * source + (1 - spec) * (1 - source)."""

    sens: int
    spec: int
    source: int


DetFn = Union[Identity, Mixture, MeasurementError]


@dataclass
class Deterministic:
    fn: DetFn


@dataclass
class Evidence:
    successes: int
    trials: int
    parent: int


NodeKind = Union[ChanceBeta, Deterministic, Evidence]


@dataclass
class ParameterNode:
    id: int
    name: str
    level: Level
    role: Role
    arm: Arm
    kind: NodeKind


@dataclass
class Violation:
    node_id: int | None
    message: str


@dataclass
class ReductionMap:
    """Collapse of identity chains onto their roots.

    ``representative`` maps every parameter node onto the node that
    carries its value: chance nodes and non-identity deterministic nodes
    map to themselves, identity chains map to their root. The map is
    idempotent by construction.
    """

    representative: dict[int, int]
    free_count: int
    total_count: int

    def rep(self, node_id: int) -> int:
        return self.representative[node_id]


def fn_parent_ids(fn: DetFn) -> list[int]:
    if isinstance(fn, Identity):
        return [fn.parent]
    if isinstance(fn, Mixture):
        return [fn.mix, fn.in_part, fn.out_part]
    return [fn.sens, fn.spec, fn.source]


def fn_value(fn: DetFn, values: dict[int, float]):
    if isinstance(fn, Identity):
        return values[fn.parent]
    if isinstance(fn, Mixture):
        m = values[fn.mix]
        return m * values[fn.in_part] + (1.0 - m) * values[fn.out_part]
    src = values[fn.source]
    return values[fn.sens] * src + (1.0 - values[fn.spec]) * (1.0 - src)


def fn_local_partials(fn: DetFn, values: dict[int, float]) -> dict[int, float]:
    """Partial of the node value w.r.t. each direct parent's value.

    Contributions accumulate, so a node referencing the same parent in
    two slots gets the summed partial.
    """
    if isinstance(fn, Identity):
        return {fn.parent: 1.0}
    if isinstance(fn, Mixture):
        m = values[fn.mix]
        pairs = [
            (fn.mix, values[fn.in_part] - values[fn.out_part]),
            (fn.in_part, m),
            (fn.out_part, 1.0 - m),
        ]
    else:
        src = values[fn.source]
        pairs = [
            (fn.sens, src),
            (fn.spec, -(1.0 - src)),
            (fn.source, values[fn.sens] + values[fn.spec] - 1.0),
        ]
    out: dict[int, float] = {}
    for parent, w in pairs:
        out[parent] = out.get(parent, 0.0) + w
    return out


class InfluenceDiagram:
    """Mutable container for the statistical model graph.

    Node ids are opaque integers assigned sequentially; names carry all
    the semantics and must be unique. Mutations bump ``version``.
    """

    def __init__(self) -> None:
        self.nodes: dict[int, ParameterNode] = {}
        self.version = 0
        self._next_id = 0
        self._names: set[str] = set()

    # ------------------------------------------------------------------
    # construction

    def _add(self, name: str, level: Level, role: Role, arm: Arm, kind: NodeKind) -> int:
        if not name:
            raise ValueError("node name must be nonempty")
        if name in self._names:
            raise ValueError(f"duplicate node name: {name!r}")
        node_id = self._next_id
        self._next_id += 1
        self.nodes[node_id] = ParameterNode(node_id, name, level, role, arm, kind)
        self._names.add(name)
        self.version += 1
        return node_id

    def add_chance(
        self,
        name: str,
        level: Level = Level.POPULATION,
        role: Role = Role.OUTCOME,
        arm: Arm = Arm.NONE,
        a: float = 1.0,
        b: float = 1.0,
        pending: bool = False,
    ) -> int:
        return self._add(name, level, role, arm, ChanceBeta(a, b, pending))

    def add_deterministic(
        self,
        name: str,
        level: Level,
        fn: DetFn,
        role: Role = Role.OUTCOME,
        arm: Arm = Arm.NONE,
    ) -> int:
        return self._add(name, level, role, arm, Deterministic(fn))

    def add_evidence(self, name: str, parent: int, successes: int, trials: int) -> int:
        parent_node = self.nodes[parent]
        return self._add(
            name, parent_node.level, Role.OUTCOME, parent_node.arm, Evidence(successes, trials, parent)
        )

    def set_shapes(self, node_id: int, a: float, b: float, override: bool = False) -> None:
        """Set beta shapes on a chance node; shapes below 1 need ``override``."""
        kind = self.nodes[node_id].kind
        if not isinstance(kind, ChanceBeta):
            raise ValueError(f"node {node_id} is not a chance node")
        if a <= 0 or b <= 0:
            raise ValueError("beta shapes must be positive")
        if (a < 1.0 or b < 1.0) and not override:
            raise ValueError("shapes below 1 give boundary modes; pass override=True")
        kind.a = float(a)
        kind.b = float(b)
        kind.pending = False
        self.version += 1

    def replace_fn(self, node_id: int, fn: DetFn) -> None:
        """Swap a deterministic node's function (e.g. identity -> mixture)."""
        node = self.nodes[node_id]
        if not isinstance(node.kind, Deterministic):
            raise ValueError(f"node {node_id} is not deterministic")
        node.kind = Deterministic(fn)
        self.version += 1

    # ------------------------------------------------------------------
    # structure queries

    def node_by_name(self, name: str) -> int:
        for node_id, node in self.nodes.items():
            if node.name == name:
                return node_id
        raise KeyError(f"no node named {name!r}")

    def parent_ids(self, node_id: int) -> list[int]:
        kind = self.nodes[node_id].kind
        if isinstance(kind, ChanceBeta):
            return []
        if isinstance(kind, Deterministic):
            return fn_parent_ids(kind.fn)
        return [kind.parent]

    def parameter_ids(self) -> list[int]:
        """Chance and deterministic nodes; excludes evidence."""
        return [i for i, n in self.nodes.items() if not isinstance(n.kind, Evidence)]

    def free_ids(self) -> list[int]:
        return [i for i, n in self.nodes.items() if isinstance(n.kind, ChanceBeta)]

    def evidence_ids(self) -> list[int]:
        return [i for i, n in self.nodes.items() if isinstance(n.kind, Evidence)]

    def pending_ids(self) -> list[int]:
        return [
            i
            for i, n in self.nodes.items()
            if isinstance(n.kind, ChanceBeta) and n.kind.pending
        ]

    def topological_order(self) -> list[int]:
        """Node ids ordered so every node follows all of its parents."""
        state: dict[int, int] = {}  # 0 visiting, 1 done
        order: list[int] = []
        for start in self.nodes:
            if start in state:
                continue
            stack: list[tuple[int, Iterable[int]]] = [(start, iter(self.parent_ids(start)))]
            state[start] = 0
            while stack:
                node, parents = stack[-1]
                advanced = False
                for p in parents:
                    if p not in self.nodes:
                        continue
                    if state.get(p) == 0:
                        cycle = [self.nodes[n].name for n, _ in stack]
                        raise CycleDetected(cycle)
                    if p not in state:
                        state[p] = 0
                        stack.append((p, iter(self.parent_ids(p))))
                        advanced = True
                        break
                if not advanced:
                    stack.pop()
                    state[node] = 1
                    order.append(node)
        return order

    # ------------------------------------------------------------------
    # validation

    def validate_restricted_class(self) -> list[Violation]:
        """Every restricted-class violation, empty iff the model is valid."""
        out: list[Violation] = []
        seen_names: set[str] = set()
        for node_id, node in self.nodes.items():
            if not node.name:
                out.append(Violation(node_id, "empty node name"))
            elif node.name in seen_names:
                out.append(Violation(node_id, f"duplicate name {node.name!r}"))
            seen_names.add(node.name)

            for p in self.parent_ids(node_id):
                if p not in self.nodes:
                    out.append(Violation(node_id, f"reference to missing node {p}"))

            kind = node.kind
            if isinstance(kind, ChanceBeta):
                if kind.a <= 0 or kind.b <= 0:
                    out.append(Violation(node_id, "nonpositive beta shape"))
            elif isinstance(kind, Evidence):
                if not (0 <= kind.successes <= kind.trials) or kind.trials < 1:
                    out.append(
                        Violation(node_id, f"invalid counts {kind.successes}/{kind.trials}")
                    )
                parent = self.nodes.get(kind.parent)
                if parent is not None:
                    if isinstance(parent.kind, Evidence):
                        out.append(Violation(node_id, "evidence node with evidence parent"))
                    if parent.level not in (Level.STUDY, Level.EFFECTIVE):
                        out.append(
                            Violation(node_id, "evidence parent not at study/effective level")
                        )
            else:
                out.extend(self._level_violations(node))

            if node.role is Role.METHODOLOGICAL and not (
                isinstance(kind, ChanceBeta) and node.level is Level.POPULATION
            ):
                out.append(
                    Violation(node_id, "methodological role off the population chance layer")
                )

        try:
            self.topological_order()
        except CycleDetected as exc:
            out.append(Violation(None, str(exc)))
        return out

    def _level_violations(self, node: ParameterNode) -> list[Violation]:
        out = []
        for p in self.parent_ids(node.id):
            parent = self.nodes.get(p)
            if parent is None:
                continue
            if node.level is Level.PATIENT:
                if parent.level is not Level.POPULATION:
                    out.append(
                        Violation(node.id, "patient-level node with non-population parent")
                    )
            elif parent.level is Level.PATIENT:
                out.append(Violation(node.id, "dependency on a patient-level node"))
            elif _LEVEL_RANK[parent.level] > _LEVEL_RANK[node.level]:
                out.append(
                    Violation(
                        node.id,
                        f"{node.level.value}-level node depends on {parent.level.value} level",
                    )
                )
        return out

    # ------------------------------------------------------------------
    # evaluation

    def evaluate(self, free_assignment: dict[int, float]) -> dict[int, float]:
        """Values of all parameter nodes given the free chance values.

        Accepts scalars or numpy arrays as values. Evidence nodes are
        excluded from the result.
        """
        values: dict[int, float] = {}
        for node_id in self.topological_order():
            kind = self.nodes[node_id].kind
            if isinstance(kind, ChanceBeta):
                if node_id not in free_assignment:
                    raise MissingAssignment(node_id)
                v = free_assignment[node_id]
                if not (np.all(np.asarray(v) > 0.0) and np.all(np.asarray(v) < 1.0)):
                    raise ValueOutOfRange(node_id, v)
                values[node_id] = v
            elif isinstance(kind, Deterministic):
                values[node_id] = fn_value(kind.fn, values)
        return values

    def partials(self, free_assignment: dict[int, float]) -> dict[tuple[int, int], float]:
        """Chain-rule partials d(node)/d(free) for all parameter nodes.

        Returns a sparse map keyed by (node id, free id); absent keys
        are structural zeros.
        """
        values = self.evaluate(free_assignment)
        per_node: dict[int, dict[int, float]] = {}
        flat: dict[tuple[int, int], float] = {}
        for node_id in self.topological_order():
            kind = self.nodes[node_id].kind
            if isinstance(kind, ChanceBeta):
                per_node[node_id] = {node_id: 1.0}
            elif isinstance(kind, Deterministic):
                local = fn_local_partials(kind.fn, values)
                acc: dict[int, float] = {}
                for parent, w in local.items():
                    for free, d in per_node[parent].items():
                        acc[free] = acc.get(free, 0.0) + w * d
                per_node[node_id] = acc
            else:
                continue
            for free, d in per_node[node_id].items():
                flat[(node_id, free)] = d
        return flat

    # ------------------------------------------------------------------
    # reduction

    def eliminate_identical(self) -> ReductionMap:
        """Collapse identity chains onto their roots in linear time."""
        rep: dict[int, int] = {}
        for node_id in self.topological_order():
            kind = self.nodes[node_id].kind
            if isinstance(kind, Evidence):
                continue
            if isinstance(kind, Deterministic) and isinstance(kind.fn, Identity):
                rep[node_id] = rep[kind.fn.parent]
            else:
                rep[node_id] = node_id
        return ReductionMap(
            representative=rep,
            free_count=len(self.free_ids()),
            total_count=len(self.parameter_ids()),
        )

    # ------------------------------------------------------------------
    # serialization

    def to_json_dict(self) -> dict:
        nodes = []
        for node in self.nodes.values():
            kind = node.kind
            if isinstance(kind, ChanceBeta):
                kd = {"type": "chance_beta", "a": kind.a, "b": kind.b, "pending": kind.pending}
            elif isinstance(kind, Deterministic):
                fn = kind.fn
                if isinstance(fn, Identity):
                    fd = {"type": "identity", "parent": fn.parent}
                elif isinstance(fn, Mixture):
                    fd = {
                        "type": "mixture",
                        "mix": fn.mix,
                        "in_part": fn.in_part,
                        "out_part": fn.out_part,
                    }
                else:
                    fd = {
                        "type": "measurement_error",
                        "sens": fn.sens,
                        "spec": fn.spec,
                        "source": fn.source,
                    }
                kd = {"type": "deterministic", "fn": fd}
            else:
                kd = {
                    "type": "evidence",
                    "successes": kind.successes,
                    "trials": kind.trials,
                    "parent": kind.parent,
                }
            nodes.append(
                {
                    "id": node.id,
                    "name": node.name,
                    "level": node.level.value,
                    "role": node.role.value,
                    "arm": node.arm.value,
                    "kind": kd,
                }
            )
        return {"version": self.version, "nodes": nodes}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, doc: dict) -> "InfluenceDiagram":
        diagram = cls()
        for entry in doc["nodes"]:
            kd = entry["kind"]
            if kd["type"] == "chance_beta":
                kind: NodeKind = ChanceBeta(kd["a"], kd["b"], kd["pending"])
            elif kd["type"] == "deterministic":
                fd = kd["fn"]
                if fd["type"] == "identity":
                    fn: DetFn = Identity(fd["parent"])
                elif fd["type"] == "mixture":
                    fn = Mixture(fd["mix"], fd["in_part"], fd["out_part"])
                else:
                    fn = MeasurementError(fd["sens"], fd["spec"], fd["source"])
                kind = Deterministic(fn)
            else:
                kind = Evidence(kd["successes"], kd["trials"], kd["parent"])
            node = ParameterNode(
                entry["id"],
                entry["name"],
                Level(entry["level"]),
                Role(entry["role"]),
                Arm(entry["arm"]),
                kind,
            )
            diagram.nodes[node.id] = node
            diagram._names.add(node.name)
            diagram._next_id = max(diagram._next_id, node.id + 1)
        diagram.version = doc["version"]
        return diagram

    @classmethod
    def from_json(cls, text: str) -> "InfluenceDiagram":
        return cls.from_json_dict(json.loads(text))

    def to_dot(self) -> str:
        """Graphviz rendering with one cluster per level."""
        lines = ["digraph model {", "  rankdir=TB;"]
        for level in Level:
            members = [n for n in self.nodes.values() if n.level is level]
            lines.append(f'  subgraph "cluster_{level.value}" {{')
            lines.append(f'    label="{level.value}";')
            for node in members:
                if isinstance(node.kind, Evidence):
                    attrs = "shape=box"
                elif isinstance(node.kind, Deterministic):
                    attrs = "shape=ellipse, peripheries=2"
                else:
                    attrs = "shape=ellipse"
                lines.append(f'    n{node.id} [label="{node.name}", {attrs}];')
            lines.append("  }")
        for node_id in self.nodes:
            for p in self.parent_ids(node_id):
                lines.append(f"  n{p} -> n{node_id};")
        lines.append("}")
        return "\n".join(lines) + "\n"
