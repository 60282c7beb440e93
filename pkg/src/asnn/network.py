"""Network data model, the activation function and structural validation."""

from __future__ import annotations

import graphlib
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

# Steepness of the logistic used for every activation.
SIGMOID_SLOPE = 4.97

# Largest doubles/singles strictly below 1 and smallest strictly above 0.
_ONE_BELOW_64 = float(np.nextafter(1.0, 0.0))
_TINY_64 = float(np.nextafter(0.0, 1.0))
_ONE_BELOW_32 = np.float32(np.nextafter(np.float32(1.0), np.float32(0.0)))
_TINY_32 = np.float32(np.nextafter(np.float32(0.0), np.float32(1.0)))


class NetworkError(ValueError):
    """Base class for errors raised on structurally unusable networks."""


class ValidationError(NetworkError):
    def __init__(self, violations: Iterable[str]):
        self.violations = list(violations)
        super().__init__("invalid network: " + "; ".join(self.violations))


def sigmoid(x: float) -> float:
    """Logistic activation ``1 / (1 + exp(-4.97 x))`` in double precision.

    Evaluated in the overflow-safe split form and clamped to the open
    interval (0, 1), so large ``|x|`` saturates at the nearest representable
    value instead of reaching 0 or 1 exactly.
    """
    z = SIGMOID_SLOPE * x
    if z >= 0.0:
        v = 1.0 / (1.0 + math.exp(-z))
    else:
        e = math.exp(z)
        v = e / (1.0 + e)
    return min(max(v, _TINY_64), _ONE_BELOW_64)


def sigmoid32(x) -> np.float32:
    """Single-precision activation used by the evaluators.

    The double-precision value is rounded once to float32 and kept inside
    (0, 1). The compiled kernels reproduce this bit for bit.
    """
    v = np.float32(sigmoid(float(x)))
    return min(max(v, _TINY_32), _ONE_BELOW_32)


class Connection(NamedTuple):
    source: int
    target: int
    weight: float


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable feed-forward network.

    ``inputs`` and ``outputs`` keep their declared order; that order defines
    how input vectors are consumed and how results are reported. Equality is
    structural: connection order does not matter, weights compare exactly.
    """

    nodes: frozenset[int]
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    connections: tuple[Connection, ...]
    _preds: dict = field(default=None, init=False, repr=False, compare=False)

    @classmethod
    def build(
        cls,
        inputs: Iterable[int],
        outputs: Iterable[int],
        connections: Iterable[tuple[int, int, float]],
        nodes: Iterable[int] | None = None,
    ) -> "Network":
        """Convenience constructor.

        ``nodes`` defaults to every id mentioned. Weights are rounded to
        float32, the precision every evaluator works in.
        """
        inputs = tuple(int(i) for i in inputs)
        outputs = tuple(int(o) for o in outputs)
        conns = tuple(
            Connection(int(a), int(b), float(np.float32(w))) for a, b, w in connections
        )
        if nodes is None:
            ids = set(inputs) | set(outputs)
            for c in conns:
                ids.add(c.source)
                ids.add(c.target)
        else:
            ids = set(int(n) for n in nodes)
        return cls(frozenset(ids), inputs, outputs, conns)

    def _key(self):
        return (self.nodes, self.inputs, self.outputs, frozenset(self.connections))

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def predecessors(self) -> dict[int, list[tuple[int, float]]]:
        """Map each target id to its ``(source, weight)`` pairs, sources ascending."""
        if self._preds is None:
            preds: dict[int, list[tuple[int, float]]] = defaultdict(list)
            for c in self.connections:
                preds[c.target].append((c.source, c.weight))
            for lst in preds.values():
                lst.sort()
            object.__setattr__(self, "_preds", dict(preds))
        return self._preds

    def successors(self) -> dict[int, list[int]]:
        succ: dict[int, list[int]] = defaultdict(list)
        for c in self.connections:
            succ[c.source].append(c.target)
        return dict(succ)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def raise_if_invalid(self) -> None:
        if self.violations:
            raise ValidationError(self.violations)


def validate(net: Network) -> ValidationReport:
    """Collect every structural problem in ``net``; never raises."""
    problems: list[str] = []
    nodes = net.nodes

    if not net.inputs:
        problems.append("no inputs declared")
    if not net.outputs:
        problems.append("no outputs declared")
    for label, ids in (("input", net.inputs), ("output", net.outputs)):
        if len(set(ids)) != len(ids):
            problems.append(f"duplicate {label} id")
        missing = sorted(set(ids) - nodes)
        if missing:
            problems.append(f"{label} ids not in node set: {missing}")
    overlap = sorted(set(net.inputs) & set(net.outputs))
    if overlap:
        problems.append(f"input/output overlap: {overlap}")
    for n in nodes:
        if n < 0:
            problems.append(f"negative node id: {n}")
            break

    seen: set[tuple[int, int]] = set()
    inputs = set(net.inputs)
    graph: dict[int, set[int]] = {}
    for c in net.connections:
        pair = (c.source, c.target)
        if c.source not in nodes or c.target not in nodes:
            problems.append(f"dangling node id in connection {c.source}->{c.target}")
        if c.source == c.target:
            problems.append(f"self-loop at node {c.source}")
            continue
        if pair in seen:
            problems.append(f"duplicate connection {c.source}->{c.target}")
        seen.add(pair)
        if c.target in inputs:
            problems.append(f"input {c.target} has incoming connection {c.source}->{c.target}")
        if not math.isfinite(c.weight):
            problems.append(f"non-finite weight on {c.source}->{c.target}")
        graph.setdefault(c.target, set()).add(c.source)

    try:
        graphlib.TopologicalSorter(graph).prepare()
    except graphlib.CycleError as exc:
        cycle = exc.args[1][:-1]
        k = cycle.index(min(cycle))
        cycle = cycle[k:] + cycle[:k] + [cycle[k]]
        problems.append("cycle: " + "→".join(str(n) for n in cycle))

    return ValidationReport(tuple(problems))


def compute_required(net: Network) -> frozenset[int]:
    """Nodes with a directed path to some output, plus the outputs."""
    preds = net.predecessors()
    required = set(net.outputs)
    stack = list(net.outputs)
    while stack:
        n = stack.pop()
        for src, _ in preds.get(n, ()):
            if src not in required:
                required.add(src)
                stack.append(src)
    return frozenset(required)


def normalize(net: Network) -> tuple[Network, dict[int, int]]:
    """Relabel node ids to ``0..N-1`` by ascending original id.

    Returns the relabelled network and the ``old -> new`` mapping. Declared
    input/output order is kept.
    """
    mapping = {old: new for new, old in enumerate(sorted(net.nodes))}
    relabelled = Network(
        frozenset(mapping.values()),
        tuple(mapping[i] for i in net.inputs),
        tuple(mapping[o] for o in net.outputs),
        tuple(Connection(mapping[c.source], mapping[c.target], c.weight) for c in net.connections),
    )
    return relabelled, mapping
